"""Precision-recall figure rendering.

Figures are drawn straight onto a standalone matplotlib Figure (no pyplot,
no global backend state), so rendering works headless and is safe to call
from library code. The output format follows the file extension; SVG keeps
curve files diff-friendly.
"""

from __future__ import annotations

from matplotlib.figure import Figure

from .metrics import EvalReport

__all__ = ["render_pr_curves"]


def render_pr_curves(
    series: list[tuple[str, EvalReport]],
    path: str,
    title: str = "Precision-Recall",
) -> None:
    """Render one or more labeled PR curves to an image file.

    Each legend entry carries the series label and its AP. Curves start from
    the (0, 1) anchor to match the CSV output.
    """
    if not series:
        raise ValueError("need at least one (label, report) series")
    fig = Figure(figsize=(6.0, 4.5))
    ax = fig.add_subplot()
    for label, report in series:
        recalls = [0.0] + [r for r, _ in report.pr_points]
        precisions = [1.0] + [p for _, p in report.pr_points]
        ax.plot(recalls, precisions, linewidth=1.5, label=f"{label} (AP={report.ap:.4f})")
    ax.set_xlabel("Recall")
    ax.set_ylabel("Precision")
    ax.set_xlim(0.0, 1.0)
    ax.set_ylim(0.0, 1.05)
    ax.grid(True, linewidth=0.3, alpha=0.6)
    ax.set_title(title)
    ax.legend(loc="lower left", fontsize=9)
    fig.tight_layout()
    fig.savefig(path)
