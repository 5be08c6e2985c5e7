import math

import pytest
from hypothesis import given, strategies as st

from iad.engine import AnomalyEvent
from iad.errors import MissingPrediction
from iad.evaluation import f1_score, overlap_predictions
from iad.model import GroundTruth


def truth_of(flags):
    return [GroundTruth(f"m{i}", f) for i, f in enumerate(flags)]


def test_perfect():
    t = truth_of([True, False, True])
    r = f1_score({gt.vmm_id: gt.anomalous for gt in t}, t)
    assert (r.precision, r.recall, r.f1) == (1.0, 1.0, 1.0)


def test_all_negative():
    t = truth_of([True, False])
    r = f1_score({"m0": False, "m1": False}, t)
    assert (r.recall, r.f1, r.precision) == (0.0, 0.0, 0.0)


def test_hand_evaluated_counts():
    # TP=4, FP=1, FN=1 (+2 TN) -> P = R = 0.8, F1 = 2*.64/1.6 = 0.8
    t = truth_of([True] * 5 + [False] * 3)
    pred = {f"m{i}": i < 4 for i in range(5)} | {"m5": True, "m6": False, "m7": False}
    r = f1_score(pred, t)
    assert (r.true_positives, r.false_positives, r.false_negatives, r.true_negatives) == (4, 1, 1, 2)
    assert r.precision == pytest.approx(0.8) and r.recall == pytest.approx(0.8) and r.f1 == pytest.approx(0.8)
    assert [row[3][1] for row in r.table] == ["TP"] * 4 + ["FN", "FP", "TN", "TN"]


def test_missing_prediction():
    with pytest.raises(MissingPrediction) as exc:
        f1_score({"m0": True}, truth_of([True, False]))
    assert exc.value.vmm_id == "m1"


def test_strict_rejects_unlabeled_prediction():
    assert f1_score({"m0": True, "zz": True}, truth_of([True])).f1 == 1.0
    with pytest.raises(MissingPrediction):
        f1_score({"m0": True, "zz": True}, truth_of([True]), strict=True)


@given(st.lists(st.tuples(st.booleans(), st.booleans()), max_size=30), st.randoms())
def test_bounds_and_permutation(pairs, rnd):
    t = truth_of([a for a, _ in pairs])
    pred = {f"m{i}": p for i, (_, p) in enumerate(pairs)}
    r = f1_score(pred, t)
    for v in (r.precision, r.recall, r.f1):
        assert 0.0 <= v <= 1.0 and not math.isnan(v)
    assert r.true_positives + r.false_positives + r.false_negatives + r.true_negatives == len(pairs)
    if r.precision + r.recall > 0:
        assert r.f1 == pytest.approx(2 * r.precision * r.recall / (r.precision + r.recall))
    shuffled = list(t)
    rnd.shuffle(shuffled)
    r2 = f1_score(pred, shuffled)
    assert (r2.precision, r2.recall, r2.f1) == (r.precision, r.recall, r.f1)


def test_overlap_predictions():
    truth = [GroundTruth("a", True, (400, 600)), GroundTruth("b", True, (400, 600)), GroundTruth("c", False)]
    ev = lambda v, s, e: AnomalyEvent(v, s, e, 1.0)
    events = {"a": [ev("a", 345, 380)], "b": [ev("b", 700, 720)], "c": [ev("c", 10, 12)]}
    assert overlap_predictions(events, truth, lead=0) == {"a": False, "b": False, "c": True}
    assert overlap_predictions(events, truth, lead=60) == {"a": True, "b": False, "c": True}
