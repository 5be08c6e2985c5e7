import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import two_pass_mean_std
from iad.errors import InsufficientHistory, InvalidSample, InvalidWindow
from iad.stats import RunningStats, stats_fold, stats_mean, stats_std, stats_update, windowed_mean

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def close(a, b, rel=1e-9):
    return math.isclose(a, b, rel_tol=rel, abs_tol=rel * 1e-3)


def test_textbook_sequence():
    s = stats_fold([2, 4, 4, 4, 5, 5, 7, 9])
    assert stats_mean(s) == 5.0
    # two-pass sample std of the same values
    assert stats_std(s) == pytest.approx(2.138089935299395, rel=1e-12)


def test_single_sample():
    s = stats_fold([3.25])
    assert (s.count, stats_mean(s)) == (1, 3.25)
    with pytest.raises(InsufficientHistory):
        stats_std(s)


def test_constant_has_zero_std():
    assert stats_std(stats_fold([7.5] * 4)) == 0.0


def test_empty_accumulator():
    s = RunningStats()
    assert s.count == 0 and s.empty
    assert stats_mean(s) == 0.0
    assert s.m2 == 0.0


def test_rejects_non_finite():
    with pytest.raises(InvalidSample):
        stats_update(RunningStats(), float("inf"))
    with pytest.raises(InvalidSample):
        stats_update(RunningStats(), float("nan"))


def test_update_returns_new_value():
    s0 = RunningStats()
    s1 = s0.update(4.0)
    assert s0.count == 0 and s1.count == 1


def test_windowed_mean_examples():
    assert windowed_mean([10, 10, 10]) == 10
    assert windowed_mean([0, 100]) == 50
    with pytest.raises(InvalidWindow):
        windowed_mean([])


def test_windowed_mean_uniform_sixty():
    xs = np.random.default_rng(7).uniform(0, 100, 60).tolist()
    oracle = 0.0
    for x in xs:
        oracle += x
    assert abs(windowed_mean(xs) - oracle / 60) <= 1e-12 * max(1.0, abs(oracle / 60))


@given(st.lists(finite, min_size=2, max_size=400))
def test_fold_matches_two_pass(xs):
    s = stats_fold(xs)
    mean, std = two_pass_mean_std(xs)
    scale = max(abs(x) for x in xs) or 1.0
    assert math.isclose(s.mean, mean, rel_tol=1e-9, abs_tol=1e-9 * scale)
    assert math.isclose(stats_std(s), std, rel_tol=1e-9, abs_tol=1e-9 * scale)


@given(st.lists(finite, min_size=2, max_size=200), st.randoms())
def test_permutation_invariance(xs, rnd):
    ys = list(xs)
    rnd.shuffle(ys)
    a, b = stats_fold(xs), stats_fold(ys)
    scale = max(abs(x) for x in xs) or 1.0
    assert math.isclose(a.mean, b.mean, rel_tol=1e-9, abs_tol=1e-9 * scale)
    assert math.isclose(stats_std(a), stats_std(b), rel_tol=1e-9, abs_tol=1e-9 * scale)


@given(st.lists(finite, max_size=300))
def test_m2_never_negative(xs):
    s = RunningStats()
    for x in xs:
        s = stats_update(s, x)
        assert s.m2 >= 0.0


def test_stable_on_ill_conditioned_data():
    # spread ~1e-3 on a 1e6 offset: the textbook sum-of-squares formula loses
    # every significant digit, the running update keeps the std to ~1e-6
    rng = np.random.default_rng(1)
    for _ in range(20):
        xs = (rng.uniform(-1e6, 1e6) + rng.normal(0, 1e-3, 5000)).tolist()
        _, std = two_pass_mean_std(xs)
        n = len(xs)
        naive_var = (math.fsum(x * x for x in xs) - sum(xs) ** 2 / n) / (n - 1)
        naive = math.sqrt(naive_var) if naive_var > 0 else 0.0
        assert abs(stats_std(stats_fold(xs)) - std) / std < 1e-6
        assert abs(naive - std) / std > 1e-3
