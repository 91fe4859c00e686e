"""Synthetic paired-detection scenes: ground truth plus two imperfect sensors.

Stands in for a real paired two-sensor test set. Each scene places
non-overlapping targets, then two sensor channels independently view them
with complementary failure modes: per-target occlusion and miss drops,
localization and size jitter, Beta-distributed confidences, and Poisson
spurious detections. Channel B additionally sees every box translated by a
constant offset, modeling the misregistration between acquisitions taken at
different times.

Generation is deterministic: scene s uses a generator seeded with
(seed, s), and within a scene the draw order is fixed as target placement,
then the A channel, then the B channel. Scenes can therefore be produced in
any order or in parallel without changing the output.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import BoundingBox, iou
from .matching import Detection
from .metrics import GroundTruthBox

__all__ = ["SensorModel", "ScenarioConfig", "PlacementError", "generate"]

# Placement keeps same-scene targets below this mutual IoU.
_PLACEMENT_MAX_IOU = 0.3
_PLACEMENT_RETRIES = 200


class PlacementError(RuntimeError):
    """Raised when a scene cannot fit its targets under the overlap limit."""


@dataclass(frozen=True)
class SensorModel:
    """Failure and scoring model of one detection channel.

    Rates are per target (miss, occlusion) or per scene (false positives,
    Poisson mean). Score distributions are Beta(a, b) parameter pairs over
    [0, 1]; the defaults concentrate true detections near 0.85 and spurious
    ones near 0.4.
    """

    name: str = "sensor"
    miss_rate: float = 0.1
    occlusion_rate: float = 0.0
    false_positive_rate: float = 1.0
    center_noise_sigma: float = 0.004
    size_noise_sigma: float = 0.05
    score_tp: tuple[float, float] = (8.5, 1.5)
    score_fp: tuple[float, float] = (4.0, 6.0)

    def __post_init__(self) -> None:
        for name in ("miss_rate", "occlusion_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        for name in ("false_positive_rate", "center_noise_sigma", "size_noise_sigma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        for name in ("score_tp", "score_fp"):
            a, b = getattr(self, name)
            if a <= 0 or b <= 0:
                raise ValueError(f"{name} needs positive Beta parameters")


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 0
    scenes: int = 10
    targets_per_scene: tuple[int, int] = (3, 8)
    size_range: tuple[float, float] = (0.05, 0.12)
    sensor_a: SensorModel = field(default_factory=lambda: SensorModel(name="optical"))
    sensor_b: SensorModel = field(default_factory=lambda: SensorModel(name="sar"))
    offset_b: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if self.seed < 0:
            raise ValueError("seed must be >= 0")
        if self.scenes < 0:
            raise ValueError("scene count must be >= 0")
        lo, hi = self.targets_per_scene
        if not 0 <= lo <= hi:
            raise ValueError("targets_per_scene range must be non-empty and nonnegative")
        lo, hi = self.size_range
        if not 0.0 < lo <= hi:
            raise ValueError("size_range must be positive and non-empty")


def _place_targets(rng: np.random.Generator, cfg: ScenarioConfig, image_id: str) -> list[GroundTruthBox]:
    lo, hi = cfg.targets_per_scene
    count = int(rng.integers(lo, hi + 1))
    placed: list[GroundTruthBox] = []
    for _ in range(count):
        for attempt in range(_PLACEMENT_RETRIES):
            w = float(rng.uniform(*cfg.size_range))
            h = float(rng.uniform(*cfg.size_range))
            cx = float(rng.uniform(w / 2, 1 - w / 2)) if w < 1 else 0.5
            cy = float(rng.uniform(h / 2, 1 - h / 2)) if h < 1 else 0.5
            box = BoundingBox(cx, cy, w, h)
            if all(iou(box, gt.box) < _PLACEMENT_MAX_IOU for gt in placed):
                placed.append(GroundTruthBox(box=box, class_id=0, image_id=image_id))
                break
        else:
            raise PlacementError(
                f"could not place target {len(placed) + 1}/{count} in {image_id} "
                f"after {_PLACEMENT_RETRIES} attempts"
            )
    return placed


def _sense(
    rng: np.random.Generator,
    sensor: SensorModel,
    truths: list[GroundTruthBox],
    image_id: str,
    size_range: tuple[float, float],
) -> list[Detection]:
    dets: list[Detection] = []
    for gt in truths:
        occluded = rng.random() < sensor.occlusion_rate
        missed = rng.random() < sensor.miss_rate
        dx, dy = rng.normal(0.0, sensor.center_noise_sigma, size=2)
        sw, sh = np.exp(rng.normal(0.0, sensor.size_noise_sigma, size=2))
        score = float(rng.beta(*sensor.score_tp))
        if occluded or missed:
            continue
        b = gt.box
        dets.append(
            Detection(
                box=BoundingBox(b.cx + dx, b.cy + dy, b.w * sw, b.h * sh),
                score=score,
                source=sensor.name,
                class_id=gt.class_id,
                image_id=image_id,
            )
        )
    for _ in range(int(rng.poisson(sensor.false_positive_rate))):
        w = float(rng.uniform(*size_range))
        h = float(rng.uniform(*size_range))
        cx = float(rng.uniform(w / 2, 1 - w / 2))
        cy = float(rng.uniform(h / 2, 1 - h / 2))
        dets.append(
            Detection(
                box=BoundingBox(cx, cy, w, h),
                score=float(rng.beta(*sensor.score_fp)),
                source=sensor.name,
                class_id=0,
                image_id=image_id,
            )
        )
    return dets


def generate(
    cfg: ScenarioConfig,
) -> tuple[list[GroundTruthBox], list[Detection], list[Detection]]:
    """Generate ground truths and both sensor channels for every scene.

    Per-target random draws happen unconditionally so the stream position
    never depends on earlier outcomes; the output is a pure function of the
    config.
    """
    truths: list[GroundTruthBox] = []
    dets_a: list[Detection] = []
    dets_b: list[Detection] = []
    for s in range(cfg.scenes):
        image_id = f"scene_{s:04d}"
        rng = np.random.default_rng([cfg.seed, s])
        placed = _place_targets(rng, cfg, image_id)
        truths.extend(placed)
        dets_a.extend(_sense(rng, cfg.sensor_a, placed, image_id, cfg.size_range))
        dx, dy = cfg.offset_b
        dets_b.extend(
            Detection(
                box=d.box.translated(dx, dy),
                score=d.score,
                source=d.source,
                class_id=d.class_id,
                image_id=d.image_id,
            )
            for d in _sense(rng, cfg.sensor_b, placed, image_id, cfg.size_range)
        )
    return truths, dets_a, dets_b
