import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import brute_force_vmm
from iad.datagen import SyntheticSpec, generate_synthetic
from iad.detectors import VmDetectorState, vm_step
from iad.engine import (
    AnomalyEvent,
    VmmEngineState,
    classify_vmm,
    detect_many,
    detect_offline,
    engine_step,
    merge_events,
)
from iad.errors import ArityMismatch, EmptySeries, InvalidSample, LengthMismatch
from iad.model import DetectorConfig, VmmGroup, VmmVerdict, VmSeries


def make_group(matrix, vmm_id="h"):
    m = np.asarray(matrix, dtype=float)
    return VmmGroup(vmm_id, [VmSeries(f"v{j}", m[:, j]) for j in range(m.shape[1])])


def fold(group, cfg):
    state = VmmEngineState.for_group(group, cfg)
    out = []
    for row in group.matrix():
        state, v = engine_step(state, list(row))
        if v is not None:
            out.append(v)
    return out


def verdict(tick, anomalous, frac=1.0):
    return VmmVerdict("h", tick, anomalous, frozenset(), frac)


def shifted(n_changed, d=10, n=400, w=20):
    """d flat VMs; the first n_changed jump by +30 at tick 201."""
    m = np.full((n, d), 50.0)
    m[200:, :n_changed] += 30.0
    return make_group(m), DetectorConfig(w=w)


@pytest.mark.parametrize("n_changed,anomalous", [(9, True), (8, False), (10, True)])
def test_voting_examples(n_changed, anomalous):
    g, cfg = shifted(n_changed)
    verdicts, _ = detect_offline(g, cfg)
    v = next(v for v in verdicts if v.tick == 200)
    assert v.vote_fraction == n_changed / 10
    assert len(v.changed_vm_ids) == n_changed
    assert v.anomalous is anomalous


def test_two_vm_groups_need_both():
    m = np.full((300, 2), 40.0)
    m[150:, 0] += 20
    verdicts, events = detect_offline(make_group(m), DetectorConfig(w=20))
    assert not any(v.anomalous for v in verdicts)
    m[150:, 1] -= 20
    verdicts, events = detect_offline(make_group(m), DetectorConfig(w=20))
    assert any(v.anomalous for v in verdicts) and events


def test_arity_and_sample_checks():
    state = VmmEngineState("h", ["a", "b"], DetectorConfig(w=3))
    with pytest.raises(ArityMismatch):
        engine_step(state, [1.0])
    with pytest.raises(InvalidSample):
        engine_step(state, [1.0, float("inf")])


def test_validation_errors_abort_without_output():
    with pytest.raises(EmptySeries):
        detect_offline(VmmGroup("h", [VmSeries("a", [1.0]), VmSeries("b", [])]))
    with pytest.raises(LengthMismatch):
        detect_offline(VmmGroup("h", [VmSeries("a", [1.0] * 100), VmSeries("b", [1.0] * 99)]))


def test_merge_events_examples():
    run = [verdict(t, True) for t in range(100, 161)]
    assert merge_events(run) == [AnomalyEvent("h", 100, 160, 1.0)]
    pair = [verdict(100, True, 0.9), verdict(101, False), verdict(102, False), verdict(103, True, 1.0)]
    assert merge_events(pair, max_gap=2) == [AnomalyEvent("h", 100, 103, 1.0)]
    assert len(merge_events(pair, max_gap=1)) == 2
    assert merge_events([]) == []


def test_merge_events_gap_semantics():
    vs = [verdict(100, True), verdict(102, True), verdict(106, True)]
    assert [(e.start_tick, e.end_tick) for e in merge_events(vs, 2)] == [(100, 102), (106, 106)]
    assert [(e.start_tick, e.end_tick) for e in merge_events(vs, 3)] == [(100, 106)]
    assert len(merge_events(vs, 0)) == 3


def test_classify_vmm():
    ev = AnomalyEvent("h", 1, 2, 1.0)
    assert classify_vmm([]) is False
    assert classify_vmm([ev]) is True
    assert classify_vmm([ev], min_events=2) is False


def test_injected_vmm_produces_overlapping_event():
    spec = SyntheticSpec(num_vmms=1, percent_anomalous_vmms=100, fault_interval=(400, 600), seed=11)
    groups, truth = generate_synthetic(spec)
    assert truth[0].anomalous
    _, events = detect_offline(groups[0])
    w = DetectorConfig().w
    assert any(e.start_tick <= 600 and e.end_tick >= 400 - w for e in events)


def test_clean_vmms_produce_no_events_across_seeds():
    for seed in range(10):
        groups, _ = generate_synthetic(SyntheticSpec(num_vmms=1, percent_anomalous_vmms=0, seed=seed))
        assert detect_offline(groups[0])[1] == []


def test_latency_contract():
    cfg = DetectorConfig(w=7, warmup_ticks=3)
    rng = np.random.default_rng(0)
    state = VmmEngineState("h", ["a", "b", "c"], cfg)
    for i in range(1, 60):
        _, v = engine_step(state, rng.uniform(0, 100, 3))
        if i < cfg.w + cfg.effective_warmup:
            assert v is None
        else:
            assert v.tick == i - cfg.w


def test_engine_matches_brute_force_on_step_group():
    m = np.full((300, 4), 50.0)
    m[150:, :] += np.array([30.0, -20.0, 10.0, 0.0])
    g = make_group(m)
    cfg = DetectorConfig(w=20, min_percent_vms_fault=75)
    want = brute_force_vmm(m, 20, min_percent=75)
    got = {v.tick: (v.anomalous, len(v.changed_vm_ids)) for v in detect_offline(g, cfg)[0]}
    assert got == want


def test_vm_state_snapshot_resumes_identically():
    rng = np.random.default_rng(3)
    m = rng.normal(50, 3, size=(200, 3))
    cfg = DetectorConfig(w=10)
    state = VmmEngineState("h", ["a", "b", "c"], cfg)
    for row in m[:120]:
        engine_step(state, row)
    snap = state.vm_state(1)
    assert snap.ticks_seen == 120 and len(snap.pending_window) == 10
    assert list(snap.pending_window) == list(m[110:120, 1])
    ref = VmDetectorState("b", cfg)
    for x in m[:120, 1]:
        vm_step(ref, x)
    assert snap.history_stats.count == ref.history_stats.count
    assert snap.history_stats.mean == ref.history_stats.mean
    assert snap.history_stats.m2 == ref.history_stats.m2


matrices = st.integers(1, 6).flatmap(
    lambda d: st.lists(
        st.lists(st.floats(0, 100, allow_nan=False), min_size=d, max_size=d), min_size=1, max_size=80
    )
)


@given(matrices, st.integers(2, 10), st.sampled_from(["zscore", "mean"]))
def test_batch_equals_streaming(rows, w, kind):
    g = make_group(rows)
    cfg = DetectorConfig(w=w, detector_kind=kind)
    assert detect_offline(g, cfg)[0] == fold(g, cfg)


@given(matrices, st.integers(2, 10))
def test_engine_agrees_with_per_vm_detectors(rows, w):
    g = make_group(rows)
    cfg = DetectorConfig(w=w, min_percent_vms_fault=50)
    states = [VmDetectorState(s.vm_id, cfg) for s in g.series]
    per_tick = {}
    for row in g.matrix():
        for st_, x in zip(states, row):
            _, v = vm_step(st_, x)
            if v is not None and v.changed:
                per_tick.setdefault(v.tick, set()).add(v.vm_id)
    for v in detect_offline(g, cfg)[0]:
        assert set(v.changed_vm_ids) == per_tick.get(v.tick, set())


@given(matrices, st.randoms())
def test_vm_order_permutation_invariance(rows, rnd):
    g = make_group(rows)
    perm = list(g.series)
    rnd.shuffle(perm)
    cfg = DetectorConfig(w=4)
    a, ea = detect_offline(g, cfg)
    b, eb = detect_offline(VmmGroup("h", perm), cfg)
    assert [(v.tick, v.anomalous, v.changed_vm_ids) for v in a] == [
        (v.tick, v.anomalous, v.changed_vm_ids) for v in b
    ]
    assert ea == eb


@given(matrices, st.floats(1, 100), st.floats(1, 100))
def test_voting_antitone_in_threshold(rows, f1, f2):
    lo, hi = sorted((f1, f2))
    g = make_group(rows)
    at_hi = {v.tick for v in detect_offline(g, DetectorConfig(w=4, min_percent_vms_fault=hi))[0] if v.anomalous}
    at_lo = {v.tick for v in detect_offline(g, DetectorConfig(w=4, min_percent_vms_fault=lo))[0] if v.anomalous}
    assert at_hi <= at_lo


def test_vmm_independence_and_parallel_determinism():
    groups, _ = generate_synthetic(SyntheticSpec(num_vmms=4, vms_per_vmm=5, ticks=400, seed=2))
    cfg = DetectorConfig(w=30)
    alone = [detect_offline(g, cfg) for g in groups]
    serial = detect_many(groups, cfg)
    parallel = detect_many(groups, cfg, parallelism=2)
    for (verdicts, events), s, p in zip(alone, serial, parallel):
        assert s.verdicts == verdicts == p.verdicts
        assert s.events == events == p.events
