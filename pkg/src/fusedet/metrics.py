"""Detection scoring: precision, recall, and average precision at a fixed IoU.

The evaluation protocol sweeps detections by descending confidence; each
detection claims the highest-IoU still-unclaimed ground truth of its scene
and class, provided the overlap meets the IoU threshold. Claims make true
positives, the rest false positives, and unclaimed ground truths count as
misses. AP integrates the monotone precision envelope over recall
(all-points interpolation by default, the 11-point variant as an option).
Only the ranking of scores matters, never their absolute values.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Protocol, Sequence

from .geometry import BoundingBox, iou

__all__ = [
    "GroundTruthBox",
    "EvalReport",
    "INTERP_ALL_POINTS",
    "INTERP_11_POINT",
    "evaluate",
    "pr_curve_csv",
]

INTERP_ALL_POINTS = "all"
INTERP_11_POINT = "11pt"


class ScoredDetection(Protocol):
    """Anything carrying a box, a confidence, and scene/class tags."""

    box: BoundingBox
    score: float
    class_id: int
    image_id: str


@dataclass(frozen=True)
class GroundTruthBox:
    box: BoundingBox
    class_id: int = 0
    image_id: str = ""


@dataclass(frozen=True)
class EvalReport:
    """Counts, the swept PR samples (descending score order), and the AP."""

    tp: int
    fp: int
    fn: int
    pr_points: tuple[tuple[float, float], ...]
    ap: float
    iou_threshold: float

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0


def _ap_all_points(points: Sequence[tuple[float, float]]) -> float:
    """Area under the non-increasing precision envelope over recall."""
    recalls = [0.0] + [r for r, _ in points] + [1.0]
    precisions = [0.0] + [p for _, p in points] + [0.0]
    for i in range(len(precisions) - 2, -1, -1):
        precisions[i] = max(precisions[i], precisions[i + 1])
    ap = 0.0
    for i in range(1, len(recalls)):
        ap += (recalls[i] - recalls[i - 1]) * precisions[i]
    return ap


def _ap_11_point(points: Sequence[tuple[float, float]]) -> float:
    total = 0.0
    for step in range(11):
        r = step / 10.0
        total += max((p for rec, p in points if rec >= r - 1e-12), default=0.0)
    return total / 11.0


def evaluate(
    dets: Sequence[ScoredDetection],
    gts: Sequence[GroundTruthBox],
    iou_threshold: float = 0.5,
    interpolation: str = INTERP_ALL_POINTS,
) -> EvalReport:
    """Score detections against ground truth at one IoU threshold.

    Ties in score break by detection input order. An empty ground-truth set
    is legal: everything becomes a false positive and the AP is 0.
    """
    if not 0.0 < iou_threshold < 1.0:
        raise ValueError(f"IoU threshold must lie in (0, 1), got {iou_threshold!r}")
    if interpolation not in (INTERP_ALL_POINTS, INTERP_11_POINT):
        raise ValueError(f"unknown interpolation {interpolation!r}")

    gt_by_scene: dict[tuple[str, int], list[int]] = {}
    for gi, gt in enumerate(gts):
        gt_by_scene.setdefault((gt.image_id, gt.class_id), []).append(gi)

    order = sorted(range(len(dets)), key=lambda k: (-dets[k].score, k))
    claimed: set[int] = set()
    points: list[tuple[float, float]] = []
    tp = 0
    fp = 0
    total_gt = len(gts)
    for k in order:
        det = dets[k]
        best_gi = -1
        best_iou = 0.0
        for gi in gt_by_scene.get((det.image_id, det.class_id), ()):
            if gi in claimed:
                continue
            overlap = iou(det.box, gts[gi].box)
            if overlap >= iou_threshold and overlap > best_iou:
                best_iou = overlap
                best_gi = gi
        if best_gi >= 0:
            claimed.add(best_gi)
            tp += 1
        else:
            fp += 1
        recall = tp / total_gt if total_gt else 0.0
        points.append((recall, tp / (tp + fp)))

    ap = 0.0
    if total_gt and points:
        if interpolation == INTERP_ALL_POINTS:
            ap = _ap_all_points(points)
        else:
            ap = _ap_11_point(points)

    return EvalReport(
        tp=tp,
        fp=fp,
        fn=total_gt - tp,
        pr_points=tuple(points),
        ap=ap,
        iou_threshold=iou_threshold,
    )


def pr_curve_csv(report: EvalReport) -> str:
    """Render the PR samples as a recall,precision CSV at fixed 6 decimals.

    A (0, 1) anchor row precedes the samples so the curve starts at zero
    recall; an empty report yields only the header.
    """
    out = io.StringIO()
    out.write("recall,precision\n")
    if report.pr_points:
        out.write("0.000000,1.000000\n")
        for recall, precision in report.pr_points:
            out.write(f"{recall:.6f},{precision:.6f}\n")
    return out.getvalue()
