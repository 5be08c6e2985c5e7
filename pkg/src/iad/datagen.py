"""Synthetic VMM datasets, anomaly injection and trace grouping.

Every random stream is seeded from ``(seed, vmm_id[, vm_id])`` through a
``numpy.random.SeedSequence``, so outputs do not depend on the order in which
VMMs or VMs are generated.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import IntervalOutOfRange, InvalidSpec, PoolTooSmall
from .model import GroundTruth, VmmGroup, VmSeries


def _key(*parts) -> list[int]:
    out = []
    for p in parts:
        digest = hashlib.sha256(str(p).encode("utf-8")).digest()
        out.append(int.from_bytes(digest[:8], "little"))
    return out


def substream(seed: int, *parts) -> np.random.Generator:
    """Independent generator for the stream named by ``parts`` under ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed) & ((1 << 64) - 1), spawn_key=_key(*parts))
    return np.random.default_rng(ss)


def vmm_name(i: int) -> str:
    return f"vmm{i:03d}"


def vm_name(vmm_id: str, j: int) -> str:
    return f"{vmm_id}-vm{j:02d}"


@dataclass(frozen=True)
class SyntheticSpec:
    num_vmms: int = 10
    vms_per_vmm: int = 10
    percent_vms_with_fault: float = 100.0
    percent_anomalous_vmms: float = 50.0
    ticks: int = 1000
    baseline_mean_range: tuple[float, float] = (20.0, 60.0)
    baseline_std: float = 2.0
    # magnitude; the sign is drawn per anomalous VMM unless fixed_sign is set
    fault_shift: float = 25.0
    fixed_sign: Optional[int] = None
    fault_interval: Optional[tuple[int, int]] = None  # None: [0.4 * ticks, 0.6 * ticks]
    seed: int = 0

    def __post_init__(self):
        if self.fault_interval is None:
            object.__setattr__(
                self, "fault_interval", (round(0.4 * self.ticks), round(0.6 * self.ticks))
            )
        object.__setattr__(self, "fault_interval", tuple(int(v) for v in self.fault_interval))
        object.__setattr__(self, "baseline_mean_range", tuple(float(v) for v in self.baseline_mean_range))
        self.validate()

    def validate(self) -> None:
        if self.num_vmms < 1:
            raise InvalidSpec("num_vmms", "must be a positive integer")
        if self.vms_per_vmm < 1:
            raise InvalidSpec("vms_per_vmm", "must be a positive integer")
        if self.ticks < 1:
            raise InvalidSpec("ticks", "must be a positive integer")
        if not 0 <= self.percent_vms_with_fault <= 100:
            raise InvalidSpec("percent_vms_with_fault", "must be in [0, 100]")
        if not 0 <= self.percent_anomalous_vmms <= 100:
            raise InvalidSpec("percent_anomalous_vmms", "must be in [0, 100]")
        lo, hi = self.baseline_mean_range
        if not lo <= hi or hi > 100 or lo < 0:
            raise InvalidSpec("baseline_mean_range", f"need 0 <= lo <= hi <= 100, got {(lo, hi)}")
        if not self.baseline_std > 0:
            raise InvalidSpec("baseline_std", "must be > 0")
        start, end = self.fault_interval
        if not 1 <= start <= end <= self.ticks:
            raise InvalidSpec("fault_interval", f"need 1 <= start <= end <= ticks, got {(start, end)}")
        if self.fixed_sign not in (None, 1, -1):
            raise InvalidSpec("fixed_sign", "must be +1, -1 or unset")

    def to_dict(self) -> dict:
        return {
            "num_vmms": self.num_vmms,
            "vms_per_vmm": self.vms_per_vmm,
            "percent_vms_with_fault": self.percent_vms_with_fault,
            "percent_anomalous_vmms": self.percent_anomalous_vmms,
            "ticks": self.ticks,
            "baseline_mean_range": list(self.baseline_mean_range),
            "baseline_std": self.baseline_std,
            "fault_shift": self.fault_shift,
            "fixed_sign": self.fixed_sign,
            "fault_interval": list(self.fault_interval),
            "seed": self.seed,
        }


def _count_of(total: int, percent: float) -> int:
    # round half up, so 50% of 5 is 3
    return int(np.floor(total * percent / 100.0 + 0.5))


def inject_anomaly(series: VmSeries, interval: tuple[int, int], shift: float) -> VmSeries:
    """Add ``shift`` to ticks ``start..end`` (1-based, inclusive), clamped to [0, 100]."""
    start, end = interval
    n = len(series)
    if not 1 <= start <= end <= n:
        raise IntervalOutOfRange(f"interval {interval} outside ticks 1..{n} of {series.vm_id!r}")
    values = series.values.copy()
    if shift != 0:
        seg = values[start - 1 : end] + shift
        values[start - 1 : end] = np.clip(seg, 0.0, 100.0)
    return VmSeries(series.vm_id, values)


def _baseline(spec: SyntheticSpec, vmm_id: str, vm_id: str) -> VmSeries:
    rng = substream(spec.seed, "baseline", vmm_id, vm_id)
    lo, hi = spec.baseline_mean_range
    mu = rng.uniform(lo, hi)
    values = np.clip(rng.normal(mu, spec.baseline_std, size=spec.ticks), 0.0, 100.0)
    return VmSeries(vm_id, values)


def generate_synthetic(spec: SyntheticSpec) -> tuple[list[VmmGroup], list[GroundTruth]]:
    """Gaussian VM utilization per VMM with a mean shift injected into the anomalous VMMs."""
    spec.validate()
    vmm_ids = [vmm_name(i) for i in range(spec.num_vmms)]
    n_anomalous = _count_of(spec.num_vmms, spec.percent_anomalous_vmms)
    pick = substream(spec.seed, "anomalous-vmms")
    anomalous = set(pick.choice(spec.num_vmms, size=n_anomalous, replace=False).tolist())
    n_faulty = _count_of(spec.vms_per_vmm, spec.percent_vms_with_fault)

    groups, truth = [], []
    for i, vmm_id in enumerate(vmm_ids):
        series = [_baseline(spec, vmm_id, vm_name(vmm_id, j)) for j in range(spec.vms_per_vmm)]
        injected = i in anomalous and n_faulty > 0
        if injected:
            rng = substream(spec.seed, "fault", vmm_id)
            sign = spec.fixed_sign if spec.fixed_sign is not None else (1 if rng.random() < 0.5 else -1)
            faulty = rng.choice(spec.vms_per_vmm, size=n_faulty, replace=False)
            for j in faulty:
                series[j] = inject_anomaly(series[j], spec.fault_interval, sign * spec.fault_shift)
        groups.append(VmmGroup(vmm_id, series))
        truth.append(GroundTruth(vmm_id, injected, spec.fault_interval if injected else None))
    return groups, truth


def group_traces(
    pool: Sequence[VmSeries],
    vms_per_vmm: int,
    seed: int = 0,
    truncate: bool = False,
    prefix: str = "vmm",
) -> list[VmmGroup]:
    """Shuffle a pool of VM traces into disjoint VMM groups; leftovers are dropped."""
    if vms_per_vmm < 1:
        raise InvalidSpec("vms_per_vmm", "must be a positive integer")
    if len(pool) < vms_per_vmm:
        raise PoolTooSmall(f"pool has {len(pool)} VMs, need at least {vms_per_vmm}")
    lengths = {len(s) for s in pool}
    if len(lengths) > 1:
        if not truncate:
            raise InvalidSpec("pool", f"series lengths differ {sorted(lengths)}; use truncate=True")
        n = min(lengths)
        pool = [VmSeries(s.vm_id, s.values[:n]) for s in pool]
    order = substream(seed, "group-traces").permutation(len(pool))
    n_groups = len(pool) // vms_per_vmm
    return [
        VmmGroup(
            f"{prefix}{g:03d}",
            [pool[k] for k in order[g * vms_per_vmm : (g + 1) * vms_per_vmm]],
        )
        for g in range(n_groups)
    ]


def inject_groups(
    groups: Sequence[VmmGroup],
    percent_anomalous_vmms: float = 50.0,
    percent_vms_with_fault: float = 100.0,
    fault_shift: float = 25.0,
    fault_interval: Optional[tuple[int, int]] = None,
    seed: int = 0,
) -> tuple[list[VmmGroup], list[GroundTruth]]:
    """Turn grouped real traces into a labeled dataset by raising or lowering CPU on some VMMs."""
    if not groups:
        return [], []
    n = groups[0].n
    interval = fault_interval or (round(0.4 * n), round(0.6 * n))
    n_anomalous = _count_of(len(groups), percent_anomalous_vmms)
    anomalous = set(
        substream(seed, "anomalous-vmms").choice(len(groups), size=n_anomalous, replace=False).tolist()
    )
    out, truth = [], []
    for i, g in enumerate(groups):
        n_faulty = _count_of(g.d, percent_vms_with_fault)
        injected = i in anomalous and n_faulty > 0
        series = list(g.series)
        if injected:
            rng = substream(seed, "fault", g.vmm_id)
            sign = 1 if rng.random() < 0.5 else -1
            for j in rng.choice(g.d, size=n_faulty, replace=False):
                series[j] = inject_anomaly(series[j], interval, sign * fault_shift)
        out.append(VmmGroup(g.vmm_id, series))
        truth.append(GroundTruth(g.vmm_id, injected, interval if injected else None))
    return out, truth


def extend_ticks(group: VmmGroup, ticks: int, noise_std: float = 1.0, seed: int = 0) -> VmmGroup:
    """Repeat a group's series in time up to ``ticks``, adding Gaussian noise to each copy."""
    out = []
    for s in group.series:
        reps = -(-ticks // len(s))
        rng = substream(seed, "extend", group.vmm_id, s.vm_id)
        tiled = np.tile(s.values, reps)[:ticks]
        noisy = tiled + rng.normal(0.0, noise_std, size=ticks)
        noisy[: len(s)] = s.values[:ticks]  # first copy stays the original
        out.append(VmSeries(s.vm_id, np.clip(noisy, 0.0, 100.0)))
    return VmmGroup(group.vmm_id, out)
