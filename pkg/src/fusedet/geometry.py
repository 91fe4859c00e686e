"""Axis-aligned bounding boxes and the similarity metrics used for cross-sensor matching.

All boxes live in normalized image coordinates (fractions of image width and
height), stored center/size. Normalization is a global contract: the
distance-decay term of DDIoU is otherwise resolution-dependent. Pixel
conversion happens only at the I/O boundary via ``from_corner_pixels`` /
``to_corner_pixels``.

Every function here is pure and every value immutable, so concurrent use
needs no synchronization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "BoundingBox",
    "SimilarityConfig",
    "center_distance",
    "euclid_similarity",
    "iou",
    "iou_star",
    "ddiou",
]


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box: center (cx, cy) and size (w, h), normalized.

    Coordinates are not clamped to [0, 1]; a box may extend past the image
    bounds. Zero or negative sizes are rejected at construction because the
    shape-only overlap ratio would otherwise degenerate to 0/0.
    """

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self) -> None:
        for name in ("cx", "cy", "w", "h"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"box field {name!r} must be finite, got {value!r}")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"box size must be positive, got w={self.w}, h={self.h}")

    @property
    def area(self) -> float:
        return self.w * self.h

    def corners(self) -> tuple[float, float, float, float]:
        """Return (x1, y1, x2, y2) in normalized coordinates."""
        return (
            self.cx - self.w / 2.0,
            self.cy - self.h / 2.0,
            self.cx + self.w / 2.0,
            self.cy + self.h / 2.0,
        )

    def translated(self, dx: float, dy: float) -> "BoundingBox":
        return BoundingBox(self.cx + dx, self.cy + dy, self.w, self.h)

    @classmethod
    def from_corner_pixels(
        cls, x1: float, y1: float, x2: float, y2: float, image_w: int, image_h: int
    ) -> "BoundingBox":
        """Build a normalized box from corner-format pixel coordinates."""
        if image_w <= 0 or image_h <= 0:
            raise ValueError("image dimensions must be positive")
        w = (x2 - x1) / image_w
        h = (y2 - y1) / image_h
        cx = (x1 + x2) / 2.0 / image_w
        cy = (y1 + y2) / 2.0 / image_h
        return cls(cx, cy, w, h)

    def to_corner_pixels(self, image_w: int, image_h: int) -> tuple[float, float, float, float]:
        x1, y1, x2, y2 = self.corners()
        return (x1 * image_w, y1 * image_h, x2 * image_w, y2 * image_h)


@dataclass(frozen=True)
class SimilarityConfig:
    """Weights for the similarity metrics.

    alpha1 / alpha2 weight the center-distance and size-distance terms of the
    weighted-Euclidean similarity; alpha is the distance-decay rate of DDIoU.
    All default to 1, the reference setting.
    """

    alpha1: float = 1.0
    alpha2: float = 1.0
    alpha: float = 1.0

    def __post_init__(self) -> None:
        for name in ("alpha1", "alpha2", "alpha"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")


def center_distance(a: BoundingBox, b: BoundingBox) -> float:
    """Euclidean distance between box centers in normalized coordinates."""
    return math.hypot(a.cx - b.cx, a.cy - b.cy)


def euclid_similarity(a: BoundingBox, b: BoundingBox, cfg: SimilarityConfig = SimilarityConfig()) -> float:
    """Weighted-Euclidean similarity: alpha1 * center distance + alpha2 * size distance.

    0 means identical boxes; lower is more similar. Scale-variant by
    construction, which is exactly why it serves only as the baseline metric.
    """
    return cfg.alpha1 * center_distance(a, b) + cfg.alpha2 * math.hypot(a.w - b.w, a.h - b.h)


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union; 0 for disjoint boxes, 1 for identical ones.

    Overlaps are computed in center/size form, which keeps the identity case
    exactly 1; the final ratio is clamped so rounding can never push it past
    the [0, 1] contract.
    """
    iw = min(a.w, b.w, (a.w + b.w) / 2.0 - abs(a.cx - b.cx))
    ih = min(a.h, b.h, (a.h + b.h) / 2.0 - abs(a.cy - b.cy))
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return min(1.0, inter / (a.area + b.area - inter))


def iou_star(a: BoundingBox, b: BoundingBox) -> float:
    """IoU after forcibly aligning the two centers: a pure shape similarity.

    Center-aligned boxes always overlap, so the value is strictly positive,
    and it is 1 exactly when the two boxes share width and height. Closed
    form: min(w)*min(h) / (area_a + area_b - min(w)*min(h)).
    """
    inter = min(a.w, b.w) * min(a.h, b.h)
    return min(1.0, inter / (a.area + b.area - inter))


def ddiou(a: BoundingBox, b: BoundingBox, cfg: SimilarityConfig = SimilarityConfig()) -> float:
    """Distance-decay IoU: exp(-alpha * center distance) * center-aligned IoU.

    Encodes shape with scale invariance like IoU, but stays strictly positive
    and strictly ordered by center distance where plain IoU collapses to 0
    for every non-overlapping pair. Higher is more similar; 1 iff identical.
    """
    return math.exp(-cfg.alpha * center_distance(a, b)) * iou_star(a, b)
