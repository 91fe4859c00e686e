import json
import math
from dataclasses import asdict

import pytest

from fusedet.geometry import iou
from fusedet.sim import PlacementError, ScenarioConfig, SensorModel, generate


def serialize(triple):
    truths, dets_a, dets_b = triple
    return json.dumps(
        {
            "truths": [asdict(t) for t in truths],
            "a": [asdict(d) for d in dets_a],
            "b": [asdict(d) for d in dets_b],
        },
        sort_keys=True,
    )


PERFECT_SENSOR = SensorModel(
    name="x",
    miss_rate=0.0,
    occlusion_rate=0.0,
    false_positive_rate=0.0,
    center_noise_sigma=0.0,
    size_noise_sigma=0.0,
)


def test_seed_determinism_is_byte_exact():
    cfg = ScenarioConfig(seed=1234, scenes=6)
    assert serialize(generate(cfg)) == serialize(generate(cfg))


def test_different_seeds_differ():
    a = ScenarioConfig(seed=1, scenes=4)
    b = ScenarioConfig(seed=2, scenes=4)
    assert serialize(generate(a)) != serialize(generate(b))


def test_noiseless_limit_reproduces_ground_truth():
    cfg = ScenarioConfig(
        seed=7, scenes=5, sensor_a=PERFECT_SENSOR, sensor_b=PERFECT_SENSOR
    )
    truths, dets_a, dets_b = generate(cfg)
    assert len(dets_a) == len(truths) == len(dets_b)
    for gt, da, db in zip(truths, dets_a, dets_b):
        assert da.box == gt.box
        assert db.box == gt.box
        assert 0.0 <= da.score <= 1.0


def test_offset_translates_sensor_b_only():
    base = ScenarioConfig(seed=3, scenes=4, sensor_a=PERFECT_SENSOR, sensor_b=PERFECT_SENSOR)
    shifted = ScenarioConfig(
        seed=3, scenes=4, sensor_a=PERFECT_SENSOR, sensor_b=PERFECT_SENSOR,
        offset_b=(0.05, -0.02),
    )
    _, a0, b0 = generate(base)
    _, a1, b1 = generate(shifted)
    assert a0 == a1
    for before, after in zip(b0, b1):
        assert after.box.cx == pytest.approx(before.box.cx + 0.05)
        assert after.box.cy == pytest.approx(before.box.cy - 0.02)


def test_targets_respect_overlap_limit():
    truths, _, _ = generate(ScenarioConfig(seed=11, scenes=10, targets_per_scene=(6, 8)))
    by_scene = {}
    for t in truths:
        by_scene.setdefault(t.image_id, []).append(t)
    for scene in by_scene.values():
        for i in range(len(scene)):
            for j in range(i + 1, len(scene)):
                assert iou(scene[i].box, scene[j].box) < 0.3


def test_infeasible_placement_raises():
    cfg = ScenarioConfig(
        seed=0, scenes=1, targets_per_scene=(60, 60), size_range=(0.5, 0.6)
    )
    with pytest.raises(PlacementError):
        generate(cfg)


def test_rate_fidelity_within_binomial_bounds():
    """Empirical drop rates over >= 1000 targets stay within 3 sigma."""
    miss, occl = 0.15, 0.25
    cfg = ScenarioConfig(
        seed=99,
        scenes=200,
        targets_per_scene=(5, 8),
        sensor_a=SensorModel(
            name="a", miss_rate=miss, occlusion_rate=occl, false_positive_rate=0.0,
            center_noise_sigma=0.0, size_noise_sigma=0.0,
        ),
        sensor_b=SensorModel(
            name="b", miss_rate=0.0, occlusion_rate=0.0, false_positive_rate=2.0,
            center_noise_sigma=0.0, size_noise_sigma=0.0,
        ),
    )
    truths, dets_a, dets_b = generate(cfg)
    n = len(truths)
    assert n >= 1000
    p_detect = (1 - miss) * (1 - occl)
    sigma = math.sqrt(p_detect * (1 - p_detect) / n)
    assert abs(len(dets_a) / n - p_detect) < 3 * sigma

    # sensor B adds Poisson spurious detections on top of a perfect channel
    fp_count = len(dets_b) - n
    fp_sigma = math.sqrt(2.0 * cfg.scenes)
    assert abs(fp_count - 2.0 * cfg.scenes) < 3 * fp_sigma


def test_complementary_occlusion_grows_union_coverage():
    cfg = ScenarioConfig(
        seed=4242,
        scenes=150,
        targets_per_scene=(5, 8),
        sensor_a=SensorModel(
            name="a", miss_rate=0.0, occlusion_rate=0.3, false_positive_rate=0.0,
            center_noise_sigma=0.0, size_noise_sigma=0.0,
        ),
        sensor_b=SensorModel(
            name="b", miss_rate=0.2, occlusion_rate=0.0, false_positive_rate=0.0,
            center_noise_sigma=0.0, size_noise_sigma=0.0,
        ),
    )
    truths, dets_a, dets_b = generate(cfg)
    seen_a = {(d.image_id, d.box.cx, d.box.cy) for d in dets_a}
    seen_b = {(d.image_id, d.box.cx, d.box.cy) for d in dets_b}
    union = seen_a | seen_b
    assert len(union) > len(seen_a)
    assert len(union) > len(seen_b)
    # independent drop processes: union coverage approaches 1 - q_a * q_b
    expected = 1 - 0.3 * 0.2
    assert len(union) / len(truths) == pytest.approx(expected, abs=0.05)


def test_config_validation():
    with pytest.raises(ValueError):
        ScenarioConfig(seed=-1)
    with pytest.raises(ValueError):
        ScenarioConfig(targets_per_scene=(5, 3))
    with pytest.raises(ValueError):
        ScenarioConfig(size_range=(0.0, 0.1))
    with pytest.raises(ValueError):
        SensorModel(miss_rate=1.5)
    with pytest.raises(ValueError):
        SensorModel(score_tp=(0.0, 1.0))
