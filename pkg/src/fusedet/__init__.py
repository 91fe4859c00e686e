"""Decision-level fusion of detections from two heterogeneous sensors.

The building blocks, bottom up:

* :mod:`fusedet.geometry` — normalized bounding boxes, IoU, the shape-only
  center-aligned IoU, and the distance-decay DDIoU similarity.
* :mod:`fusedet.evidence` — Dempster-Shafer frames, mass functions,
  Dempster's rule, and the compatibility-weighted fusion variant.
* :mod:`fusedet.matching` — one-to-one cross-sensor target matching.
* :mod:`fusedet.pipeline` — scene fusion: match, fuse confidences, emit a
  single ranked detection set.
* :mod:`fusedet.metrics` — precision / recall / AP evaluation.
* :mod:`fusedet.sim` — synthetic paired-detection scenario generator.
* :mod:`fusedet.formats`, :mod:`fusedet.plots`, :mod:`fusedet.cli` — JSON
  interchange, PR-curve figures, and the command-line front end.
"""

from .evidence import (
    Frame,
    MassFunction,
    TotalConflictError,
    dempster_combine,
    fuse_weighted,
    mass_from_confidence,
    weight_masses,
)
from .geometry import BoundingBox, SimilarityConfig, center_distance, ddiou, euclid_similarity, iou, iou_star
from .matching import Detection, MatchResult, match, score_matrix
from .metrics import EvalReport, GroundTruthBox, evaluate, pr_curve_csv
from .pipeline import FusedDetection, FusionConfig, fuse_dataset, fuse_scene
from .sim import ScenarioConfig, SensorModel, generate

__version__ = "0.1.0"

__all__ = [
    "BoundingBox",
    "SimilarityConfig",
    "center_distance",
    "euclid_similarity",
    "iou",
    "iou_star",
    "ddiou",
    "Frame",
    "MassFunction",
    "TotalConflictError",
    "mass_from_confidence",
    "weight_masses",
    "dempster_combine",
    "fuse_weighted",
    "Detection",
    "MatchResult",
    "score_matrix",
    "match",
    "FusedDetection",
    "FusionConfig",
    "fuse_scene",
    "fuse_dataset",
    "GroundTruthBox",
    "EvalReport",
    "evaluate",
    "pr_curve_csv",
    "ScenarioConfig",
    "SensorModel",
    "generate",
    "__version__",
]
