"""VMM-level detection: run one detector per hosted VM in lock step and vote.

The engine keeps all VMs of a VMM column-wise in numpy arrays (ring buffer of
the pending windows plus Welford history vectors) so a tick costs a handful of
vector operations regardless of the VM count.  :func:`detect_offline` is a
plain fold of :func:`engine_step` over the group's ticks.
"""

from __future__ import annotations

import time
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .detectors import VmDetectorState
from .errors import ArityMismatch, InvalidSample
from .model import DetectorConfig, DetectorKind, VmmGroup, VmmVerdict, validate_group, votes_anomalous
from .stats import RunningStats

DEFAULT_MAX_GAP = 2
DEFAULT_MIN_EVENTS = 1


@dataclass(frozen=True)
class AnomalyEvent:
    vmm_id: str
    start_tick: int
    end_tick: int
    peak_vote_fraction: float

    def to_dict(self) -> dict:
        return {
            "start_tick": self.start_tick,
            "end_tick": self.end_tick,
            "peak_vote_fraction": self.peak_vote_fraction,
        }


class VmmEngineState:
    """Lock-step detector state for the ``d`` VMs of one VMM (mutated in place)."""

    def __init__(self, vmm_id: str, vm_ids: Sequence[str], cfg: DetectorConfig = DetectorConfig()):
        if len(vm_ids) == 0:
            raise ArityMismatch(1, 0)
        self.vmm_id = vmm_id
        self.vm_ids = tuple(vm_ids)
        self.cfg = cfg
        self.d = len(self.vm_ids)
        self.ticks_seen = 0
        self._ring = np.zeros((cfg.w, self.d))
        self._hist_count = 0
        self._hist_mean = np.zeros(self.d)
        self._hist_m2 = np.zeros(self.d)
        self._ids = np.array(self.vm_ids, dtype=object)
        self._sqrt_w = np.sqrt(float(cfg.w))
        self._warmup = cfg.effective_warmup

    @classmethod
    def for_group(cls, group: VmmGroup, cfg: DetectorConfig) -> "VmmEngineState":
        return cls(group.vmm_id, group.vm_ids, cfg)

    def _fold_into_history(self, x: np.ndarray) -> None:
        # Welford, same operation order as stats.stats_update
        self._hist_count += 1
        delta = x - self._hist_mean
        self._hist_mean = self._hist_mean + delta / self._hist_count
        self._hist_m2 = self._hist_m2 + delta * (x - self._hist_mean)

    def _changed(self) -> np.ndarray:
        cfg = self.cfg
        wmean = self._ring.sum(axis=0) / cfg.w
        diff = wmean - self._hist_mean
        if cfg.detector_kind is DetectorKind.MEAN:
            denom = np.maximum(np.abs(self._hist_mean), cfg.epsilon)
            return 100.0 * np.abs(diff) / denom > cfg.mean_threshold_percent
        std = np.sqrt(self._hist_m2 / (self._hist_count - 1))
        flat = std <= cfg.epsilon
        if flat.any():
            z = diff / (np.where(flat, 1.0, std) / self._sqrt_w)
            return np.where(flat, np.abs(diff) > cfg.epsilon, np.abs(z) > cfg.z_multiplier)
        return np.abs(diff / (std / self._sqrt_w)) > cfg.z_multiplier

    def step(self, xs) -> Optional[VmmVerdict]:
        x = np.asarray(xs, dtype=np.float64).reshape(-1)
        if x.shape[0] != self.d:
            raise ArityMismatch(self.d, x.shape[0])
        if not np.isfinite(x).all():
            raise InvalidSample(f"non-finite sample at tick {self.ticks_seen + 1} for VMM {self.vmm_id!r}")
        return self._advance(x)

    def _advance(self, x: np.ndarray) -> Optional[VmmVerdict]:
        # x: validated float64 vector of length d
        w = self.cfg.w
        slot = self.ticks_seen % w
        if self.ticks_seen >= w:
            self._fold_into_history(self._ring[slot].copy())
        self._ring[slot] = x
        self.ticks_seen += 1
        if self.ticks_seen < w or self._hist_count < self._warmup:
            return None
        changed = self._changed()
        m = int(np.count_nonzero(changed))
        return VmmVerdict(
            vmm_id=self.vmm_id,
            tick=self.ticks_seen - w,
            anomalous=votes_anomalous(m, self.d, self.cfg.min_percent_vms_fault),
            changed_vm_ids=frozenset(self._ids[changed]) if m else frozenset(),
            vote_fraction=m / self.d,
        )

    def vm_state(self, j: int) -> VmDetectorState:
        """Snapshot of VM ``j`` as a single-VM :class:`VmDetectorState`."""
        w = self.cfg.w
        k = min(self.ticks_seen, w)
        order = [(self.ticks_seen - k + i) % w for i in range(k)]
        return VmDetectorState(
            vm_id=self.vm_ids[j],
            cfg=self.cfg,
            pending_window=deque(float(v) for v in self._ring[order, j]),
            history_stats=RunningStats(
                self._hist_count, float(self._hist_mean[j]), float(self._hist_m2[j])
            ),
            ticks_seen=self.ticks_seen,
        )


def engine_step(state: VmmEngineState, xs) -> tuple[VmmEngineState, Optional[VmmVerdict]]:
    return state, state.step(xs)


def merge_events(verdicts: Iterable[VmmVerdict], max_gap: int = DEFAULT_MAX_GAP) -> list[AnomalyEvent]:
    """Merge runs of anomalous ticks separated by at most ``max_gap`` quiet ticks.

    Anomalous ticks 100 and 103 have a gap of 2 (ticks 101 and 102).
    """
    events: list[AnomalyEvent] = []
    cur = None  # [vmm_id, start, end, peak]
    for v in verdicts:
        if not v.anomalous:
            continue
        if cur is not None and v.tick - cur[2] - 1 <= max_gap:
            cur[2] = v.tick
            cur[3] = max(cur[3], v.vote_fraction)
            continue
        if cur is not None:
            events.append(AnomalyEvent(*cur))
        cur = [v.vmm_id, v.tick, v.tick, v.vote_fraction]
    if cur is not None:
        events.append(AnomalyEvent(*cur))
    return events


def classify_vmm(events: Sequence[AnomalyEvent], min_events: int = DEFAULT_MIN_EVENTS) -> bool:
    return len(events) >= min_events


def detect_offline(
    group: VmmGroup, cfg: DetectorConfig = DetectorConfig(), max_gap: int = DEFAULT_MAX_GAP
) -> tuple[list[VmmVerdict], list[AnomalyEvent]]:
    validate_group(group)
    state = VmmEngineState.for_group(group, cfg)
    verdicts = []
    # VmSeries guarantees finite values, so rows skip the per-tick checks
    for row in group.matrix():
        v = state._advance(row)
        if v is not None:
            verdicts.append(v)
    return verdicts, merge_events(verdicts, max_gap)


@dataclass
class VmmResult:
    """Detection output for one VMM, as serialized into the results JSON."""

    vmm_id: str
    num_vms: int
    num_ticks: int
    verdicts: list[VmmVerdict]
    events: list[AnomalyEvent]
    seconds: float
    predicted_anomalous: bool = False

    def to_dict(self) -> dict:
        return {
            "vmm_id": self.vmm_id,
            "num_vms": self.num_vms,
            "num_ticks": self.num_ticks,
            "first_verdict_tick": self.verdicts[0].tick if self.verdicts else None,
            "vote_fractions": [v.vote_fraction for v in self.verdicts],
            "anomalous_ticks": [v.tick for v in self.verdicts if v.anomalous],
            "events": [e.to_dict() for e in self.events],
            "predicted_anomalous": self.predicted_anomalous,
            "seconds": self.seconds,
        }


def _detect_one(args) -> VmmResult:
    group, cfg, max_gap, min_events = args
    t0 = time.perf_counter()
    verdicts, events = detect_offline(group, cfg, max_gap)
    elapsed = time.perf_counter() - t0
    return VmmResult(
        group.vmm_id, group.d, group.n, verdicts, events, elapsed, classify_vmm(events, min_events)
    )


def detect_many(
    groups: Sequence[VmmGroup],
    cfg: DetectorConfig = DetectorConfig(),
    max_gap: int = DEFAULT_MAX_GAP,
    min_events: int = DEFAULT_MIN_EVENTS,
    parallelism: int = 1,
) -> list[VmmResult]:
    """Detect on every VMM independently; results keep the input order."""
    for g in groups:
        validate_group(g)
    jobs = [(g, cfg, max_gap, min_events) for g in groups]
    if parallelism <= 1 or len(groups) <= 1:
        return [_detect_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(_detect_one, jobs))


def results_to_json(
    results: Sequence[VmmResult],
    cfg: DetectorConfig,
    max_gap: int = DEFAULT_MAX_GAP,
    min_events: int = DEFAULT_MIN_EVENTS,
    extra: Optional[dict] = None,
) -> dict:
    doc = {
        "format": "iad-results/1",
        "config": {**cfg.to_dict(), "max_gap": max_gap, "min_events": min_events},
        "vmms": [r.to_dict() for r in results],
        "timings": {
            "detect_seconds_total": sum(r.seconds for r in results),
            "per_vmm_seconds": {r.vmm_id: r.seconds for r in results},
        },
    }
    if extra:
        doc.update(extra)
    return doc
