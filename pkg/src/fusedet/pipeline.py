"""Scene-level fusion: match two detection sets, fuse confidences, emit one set.

For every matched pair the two confidences become mass functions on a shared
binary frame (target present / absent), are fused with the compatibility-
weighted Dempster route, and the fused present-mass becomes the output score
with the residual ignorance reported as uncertainty. Detections seen by only
one sensor survive according to the singleton policy; the paired-geometry
policy decides the canonical output box.

Scene fusion is a pure function, so datasets may be processed with any
number of workers without changing the result.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from . import evidence, matching
from .geometry import BoundingBox, SimilarityConfig
from .matching import Detection

__all__ = [
    "DETECTION_FRAME",
    "PROVENANCE_BOTH",
    "PROVENANCE_A_ONLY",
    "PROVENANCE_B_ONLY",
    "FusedDetection",
    "FusionConfig",
    "ScenePairingError",
    "fuse_scene",
    "fuse_dataset",
]

# Binary frame shared by all confidence fusion; the first label is the
# positive hypothesis by the mass_from_confidence convention.
DETECTION_FRAME = evidence.Frame(("present", "absent"))
_PRESENT = DETECTION_FRAME.singleton(0)
_THETA = DETECTION_FRAME.theta

PROVENANCE_BOTH = "both"
PROVENANCE_A_ONLY = "a_only"
PROVENANCE_B_ONLY = "b_only"
_PROVENANCE_ORDER = {PROVENANCE_BOTH: 0, PROVENANCE_A_ONLY: 1, PROVENANCE_B_ONLY: 2}

# Extreme confidences are pulled inside the open interval so that two
# maximally opposed detections cannot drive Dempster's rule to K = 0.
_SCORE_CLAMP = 1e-6


class ScenePairingError(ValueError):
    """Raised when the two sides of a dataset disagree on scene ids."""

    def __init__(self, missing_in_a: Sequence[str], missing_in_b: Sequence[str]):
        self.missing_in_a = tuple(missing_in_a)
        self.missing_in_b = tuple(missing_in_b)
        parts = []
        if self.missing_in_a:
            parts.append(f"missing in A: {', '.join(self.missing_in_a)}")
        if self.missing_in_b:
            parts.append(f"missing in B: {', '.join(self.missing_in_b)}")
        super().__init__("unpaired scene ids; " + "; ".join(parts))


@dataclass(frozen=True)
class FusedDetection:
    """A fused output target.

    ``score`` is the fused present-mass (optionally pignistic-shifted) and
    ``uncertainty`` the fused ignorance mass; together with the implicit
    absent-mass they sum to one. Per-source boxes are kept for rendering and
    for per-source evaluation.
    """

    box: BoundingBox
    score: float
    uncertainty: float
    provenance: str
    box_a: BoundingBox | None = None
    box_b: BoundingBox | None = None
    class_id: int = 0
    image_id: str = ""


@dataclass(frozen=True)
class FusionConfig:
    """All fusion knobs in one place; defaults are the reference setting."""

    similarity: SimilarityConfig = field(default_factory=SimilarityConfig)
    match_threshold: float = 0.3
    match_strategy: str = matching.STRATEGY_OPTIMAL
    match_metric: str = matching.METRIC_DDIOU
    singleton_policy: str = "passthrough"
    singleton_discount: float = 1.0
    geometry_policy: str = "score_weighted_mean"
    output_score: str = "exists_mass"

    def __post_init__(self) -> None:
        if self.singleton_policy not in ("passthrough", "discount"):
            raise ValueError(f"unknown singleton policy {self.singleton_policy!r}")
        if not 0.0 <= self.singleton_discount <= 1.0:
            raise ValueError("singleton discount must lie in [0, 1]")
        if self.geometry_policy not in ("score_weighted_mean", "max_score_box"):
            raise ValueError(f"unknown geometry policy {self.geometry_policy!r}")
        if self.output_score not in ("exists_mass", "exists_plus_half_theta"):
            raise ValueError(f"unknown output score mode {self.output_score!r}")


def _clamp_score(score: float) -> float:
    return min(max(score, _SCORE_CLAMP), 1.0 - _SCORE_CLAMP)


def _fuse_pair_masses(score_a: float, score_b: float) -> tuple[float, float]:
    """Weighted D-S fusion of two confidences; returns (present, ignorance)."""
    fused = evidence.fuse_weighted(
        [
            evidence.mass_from_confidence(DETECTION_FRAME, _clamp_score(score_a)),
            evidence.mass_from_confidence(DETECTION_FRAME, _clamp_score(score_b)),
        ]
    )
    return fused[_PRESENT], fused[_THETA]


def _fuse_geometry(det_a: Detection, det_b: Detection, cfg: FusionConfig) -> BoundingBox:
    if cfg.geometry_policy == "max_score_box":
        return det_a.box if det_a.score >= det_b.score else det_b.box
    wa = _clamp_score(det_a.score)
    wb = _clamp_score(det_b.score)
    total = wa + wb
    a, b = det_a.box, det_b.box
    return BoundingBox(
        (wa * a.cx + wb * b.cx) / total,
        (wa * a.cy + wb * b.cy) / total,
        (wa * a.w + wb * b.w) / total,
        (wa * a.h + wb * b.h) / total,
    )


def _output_score(present: float, theta: float, cfg: FusionConfig) -> float:
    if cfg.output_score == "exists_plus_half_theta":
        return present + 0.5 * theta
    return present


def _sort_key(det: FusedDetection) -> tuple:
    return (-det.score, _PROVENANCE_ORDER[det.provenance], det.box.cx, det.box.cy)


def fuse_scene(
    a: list[Detection], b: list[Detection], cfg: FusionConfig = FusionConfig()
) -> list[FusedDetection]:
    """Fuse one scene's two detection sets into a single ranked list."""
    image_ids = {d.image_id for d in a} | {d.image_id for d in b}
    if len(image_ids) > 1:
        raise ValueError(f"scene mixes image ids: {sorted(image_ids)}")
    image_id = image_ids.pop() if image_ids else ""

    result = matching.match(
        a,
        b,
        cfg.similarity,
        threshold=cfg.match_threshold,
        strategy=cfg.match_strategy,
        metric=cfg.match_metric,
    )

    fused: list[FusedDetection] = []
    for i, j, _ in result.pairs:
        det_a, det_b = a[i], b[j]
        present, theta = _fuse_pair_masses(det_a.score, det_b.score)
        fused.append(
            FusedDetection(
                box=_fuse_geometry(det_a, det_b, cfg),
                score=_output_score(present, theta, cfg),
                uncertainty=theta,
                provenance=PROVENANCE_BOTH,
                box_a=det_a.box,
                box_b=det_b.box,
                class_id=det_a.class_id,
                image_id=image_id,
            )
        )

    factor = cfg.singleton_discount if cfg.singleton_policy == "discount" else 1.0
    for idx in result.unmatched_a:
        det = a[idx]
        fused.append(
            FusedDetection(
                box=det.box,
                score=det.score * factor,
                uncertainty=0.0,
                provenance=PROVENANCE_A_ONLY,
                box_a=det.box,
                class_id=det.class_id,
                image_id=image_id,
            )
        )
    for idx in result.unmatched_b:
        det = b[idx]
        fused.append(
            FusedDetection(
                box=det.box,
                score=det.score * factor,
                uncertainty=0.0,
                provenance=PROVENANCE_B_ONLY,
                box_b=det.box,
                class_id=det.class_id,
                image_id=image_id,
            )
        )

    fused.sort(key=_sort_key)
    return fused


def fuse_dataset(
    scenes_a: Mapping[str, list[Detection]],
    scenes_b: Mapping[str, list[Detection]],
    cfg: FusionConfig = FusionConfig(),
    workers: int = 1,
) -> dict[str, list[FusedDetection]]:
    """Fuse every scene of a paired dataset, keyed by image id.

    The two mappings must cover exactly the same scene ids. Scenes are
    independent; with ``workers`` > 1 they are fused concurrently, with
    output identical to the sequential run.
    """
    only_a = sorted(set(scenes_a) - set(scenes_b))
    only_b = sorted(set(scenes_b) - set(scenes_a))
    if only_a or only_b:
        raise ScenePairingError(missing_in_a=only_b, missing_in_b=only_a)

    ids = sorted(scenes_a)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda i: fuse_scene(scenes_a[i], scenes_b[i], cfg), ids))
    else:
        results = [fuse_scene(scenes_a[i], scenes_b[i], cfg) for i in ids]
    return dict(zip(ids, results))
