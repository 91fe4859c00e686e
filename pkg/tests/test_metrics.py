import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fusedet.geometry import BoundingBox, iou
from fusedet.matching import Detection
from fusedet.metrics import (
    INTERP_11_POINT,
    EvalReport,
    GroundTruthBox,
    evaluate,
    pr_curve_csv,
)


def det(cx, cy, score, w=0.1, h=0.1, image_id="img", class_id=0):
    return Detection(BoundingBox(cx, cy, w, h), score, "s", class_id, image_id)


def gt(cx, cy, w=0.1, h=0.1, image_id="img", class_id=0):
    return GroundTruthBox(BoundingBox(cx, cy, w, h), class_id, image_id)


def claim_from_scratch(dets, gts, iou_threshold):
    """Independent re-implementation of the claiming protocol for the oracle."""
    order = sorted(range(len(dets)), key=lambda k: (-dets[k].score, k))
    taken = set()
    tp = 0
    for k in order:
        d = dets[k]
        candidates = [
            (iou(d.box, g.box), gi)
            for gi, g in enumerate(gts)
            if gi not in taken
            and g.image_id == d.image_id
            and g.class_id == d.class_id
            and iou(d.box, g.box) >= iou_threshold
        ]
        if candidates:
            best = max(candidates, key=lambda c: (c[0], -c[1]))
            taken.add(best[1])
            tp += 1
    return tp, len(dets) - tp


def ap_oracle(dets, gts, iou_threshold):
    """One operating point per distinct score threshold, then direct
    integration of the running-max precision envelope over recall."""
    if not gts or not dets:
        return 0.0
    points = []
    for t in sorted({d.score for d in dets}, reverse=True):
        sub = [d for d in dets if d.score >= t]
        tp, fp = claim_from_scratch(sub, gts, iou_threshold)
        points.append((tp / len(gts), tp / (tp + fp)))
    area = 0.0
    prev_recall = 0.0
    for recall in sorted({r for r, _ in points}):
        if recall > prev_recall:
            peak = max(p for r, p in points if r >= recall)
            area += (recall - prev_recall) * peak
            prev_recall = recall
    return area


# ---------------------------------------------------------------- fixed cases


def test_perfect_detector():
    truths = [gt(0.2, 0.2), gt(0.6, 0.6), gt(0.8, 0.3)]
    dets = [det(g.box.cx, g.box.cy, 1.0) for g in truths]
    report = evaluate(dets, truths)
    assert report.tp == 3 and report.fp == 0 and report.fn == 0
    assert report.precision == 1.0 and report.recall == 1.0
    assert report.ap == pytest.approx(1.0, abs=1e-12)


def test_no_detections():
    report = evaluate([], [gt(0.5, 0.5)])
    assert report.recall == 0.0
    assert report.ap == 0.0
    assert report.fn == 1
    assert report.pr_points == ()


def test_detections_without_ground_truth():
    report = evaluate([det(0.5, 0.5, 0.9)], [])
    assert report.tp == 0 and report.fp == 1 and report.fn == 0
    assert report.ap == 0.0


def test_hand_traced_five_ninths():
    """Three truths; sweep hits TP, FP, TP, giving PR points
    (1/3, 1), (1/3, 1/2), (2/3, 2/3) and an envelope area of 5/9."""
    truths = [gt(0.2, 0.2), gt(0.5, 0.5), gt(0.8, 0.8)]
    dets = [
        det(0.2, 0.2, 0.9),
        det(0.35, 0.65, 0.8),  # overlaps nothing
        det(0.5, 0.5, 0.7),
    ]
    report = evaluate(dets, truths)
    assert np.allclose(report.pr_points, [(1 / 3, 1.0), (1 / 3, 1 / 2), (2 / 3, 2 / 3)])
    assert report.ap == pytest.approx(5 / 9, abs=1e-12)
    assert ap_oracle(dets, truths, 0.5) == pytest.approx(5 / 9, abs=1e-12)


def test_iou_threshold_gates_claims():
    truths = [gt(0.5, 0.5)]
    shifted = [det(0.54, 0.5, 0.9)]  # IoU = 0.6/1.4 ~ 0.43
    assert evaluate(shifted, truths, iou_threshold=0.4).tp == 1
    assert evaluate(shifted, truths, iou_threshold=0.5).tp == 0
    with pytest.raises(ValueError):
        evaluate(shifted, truths, iou_threshold=0.0)


def test_eleven_point_interpolation():
    truths = [gt(0.2, 0.2), gt(0.5, 0.5), gt(0.8, 0.8)]
    dets = [det(0.2, 0.2, 0.9), det(0.35, 0.65, 0.8), det(0.5, 0.5, 0.7)]
    report = evaluate(dets, truths, interpolation=INTERP_11_POINT)
    # envelope: precision 1 on recall <= 1/3, 2/3 on recall <= 2/3, 0 beyond
    expected = (4 * 1.0 + 3 * (2 / 3) + 4 * 0.0) / 11
    assert report.ap == pytest.approx(expected, abs=1e-12)


def test_claims_respect_scene_and_class():
    truths = [gt(0.5, 0.5, image_id="a"), gt(0.5, 0.5, image_id="b", class_id=1)]
    dets = [
        det(0.5, 0.5, 0.9, image_id="b"),  # wrong class in scene b
        det(0.5, 0.5, 0.8, image_id="a"),
    ]
    report = evaluate(dets, truths)
    assert report.tp == 1 and report.fp == 1 and report.fn == 1


# ------------------------------------------------------------------------ CSV


def test_csv_empty_report():
    report = EvalReport(0, 0, 0, (), 0.0, 0.5)
    assert pr_curve_csv(report) == "recall,precision\n"


def test_csv_perfect_single_detection():
    report = evaluate([det(0.5, 0.5, 1.0)], [gt(0.5, 0.5)])
    assert pr_curve_csv(report) == (
        "recall,precision\n0.000000,1.000000\n1.000000,1.000000\n"
    )


def test_csv_five_ninths_rows():
    truths = [gt(0.2, 0.2), gt(0.5, 0.5), gt(0.8, 0.8)]
    dets = [det(0.2, 0.2, 0.9), det(0.35, 0.65, 0.8), det(0.5, 0.5, 0.7)]
    lines = pr_curve_csv(evaluate(dets, truths)).strip().splitlines()
    assert lines[0] == "recall,precision"
    assert lines[1] == "0.000000,1.000000"
    assert lines[2:] == ["0.333333,1.000000", "0.333333,0.500000", "0.666667,0.666667"]


# ----------------------------------------------------------------- strategies


@st.composite
def micro_datasets(draw):
    """Up to 5 scenes / 8 boxes total on a coarse grid so overlaps happen,
    with distinct scores (tied scores are a documented ranking ambiguity)."""
    n_scenes = draw(st.integers(min_value=1, max_value=5))
    scenes = [f"s{i}" for i in range(n_scenes)]
    cell = st.integers(min_value=0, max_value=4)
    truths = []
    n_gt = draw(st.integers(min_value=0, max_value=8))
    for _ in range(n_gt):
        truths.append(
            gt(
                0.1 + 0.2 * draw(cell),
                0.1 + 0.2 * draw(cell),
                w=0.2,
                h=0.2,
                image_id=draw(st.sampled_from(scenes)),
            )
        )
    n_det = draw(st.integers(min_value=0, max_value=8))
    scores = draw(
        st.lists(
            st.floats(min_value=0.01, max_value=0.99),
            min_size=n_det,
            max_size=n_det,
            unique=True,
        )
    )
    dets = []
    for k in range(n_det):
        jitter = draw(st.sampled_from([0.0, 0.05, 0.12]))
        dets.append(
            det(
                0.1 + 0.2 * draw(cell) + jitter,
                0.1 + 0.2 * draw(cell),
                scores[k],
                w=0.2,
                h=0.2,
                image_id=draw(st.sampled_from(scenes)),
            )
        )
    return dets, truths


# ------------------------------------------------------------------ properties


@pytest.mark.properties
@given(data=micro_datasets())
def test_ap_matches_threshold_enumeration_oracle(data):
    dets, truths = data
    report = evaluate(dets, truths)
    assert report.ap == pytest.approx(ap_oracle(dets, truths, 0.5), abs=1e-9)


@pytest.mark.properties
@given(data=micro_datasets())
def test_report_invariants(data):
    dets, truths = data
    report = evaluate(dets, truths)
    assert 0.0 <= report.ap <= 1.0
    assert report.tp + report.fn == len(truths)
    assert report.tp + report.fp == len(dets)
    recalls = [r for r, _ in report.pr_points]
    assert recalls == sorted(recalls)
    if report.ap == pytest.approx(1.0, abs=1e-12) and truths:
        assert any(r == 1.0 and p == 1.0 for r, p in report.pr_points)


@pytest.mark.properties
@given(data=micro_datasets())
def test_envelope_is_monotone(data):
    dets, truths = data
    report = evaluate(dets, truths)
    points = list(report.pr_points)
    envelope = []
    best = 0.0
    for _, precision in reversed(points):
        best = max(best, precision)
        envelope.append(best)
    envelope.reverse()
    for (r1, _), (r2, _), e1, e2 in zip(points, points[1:], envelope, envelope[1:]):
        if r1 < r2:
            assert e1 >= e2 - 1e-12


@pytest.mark.properties
@given(data=micro_datasets(), power=st.sampled_from([0.5, 1.0, 3.0]))
def test_score_scale_invariance(data, power):
    # any strictly increasing transform of the scores preserves the ranking
    # and therefore the claims, the PR point set, and the AP
    dets, truths = data
    transformed = [
        Detection(d.box, d.score**power, d.source, d.class_id, d.image_id) for d in dets
    ]
    base = evaluate(dets, truths)
    warped = evaluate(transformed, truths)
    assert base.tp == warped.tp and base.fp == warped.fp
    assert base.pr_points == warped.pr_points
    assert base.ap == pytest.approx(warped.ap, abs=1e-12)


@pytest.mark.properties
@given(data=micro_datasets())
def test_claims_unique_and_ordered(data):
    dets, truths = data
    report = evaluate(dets, truths)
    # reconstruct claims independently: each ground truth claimed at most once
    tp, fp = claim_from_scratch(dets, truths, 0.5)
    assert (report.tp, report.fp) == (tp, fp)
