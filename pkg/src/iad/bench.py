"""Wall-clock scaling of :func:`iad.engine.detect_offline` over VM and tick counts."""

from __future__ import annotations

import csv
import io
import os
import platform
import statistics
import time
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .datagen import SyntheticSpec, extend_ticks, generate_synthetic
from .engine import detect_offline
from .model import DetectorConfig, VmmGroup


@dataclass
class BenchReport:
    rows: list[tuple[int, int, float]]  # (num_vms, num_ticks, median seconds)
    environment: dict = field(default_factory=dict)

    def seconds(self, num_vms: int, num_ticks: int) -> float:
        for v, t, s in self.rows:
            if v == num_vms and t == num_ticks:
                return s
        raise KeyError((num_vms, num_ticks))

    def to_dict(self) -> dict:
        return {
            "format": "iad-bench/1",
            "environment": self.environment,
            "rows": [{"num_vms": v, "num_ticks": t, "seconds": s} for v, t, s in self.rows],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["num_vms", "num_ticks", "seconds"])
        for v, t, s in self.rows:
            w.writerow([v, t, repr(s)])
        return buf.getvalue()


def environment_info(parallelism: int = 1, repeats: int = 3) -> dict:
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "platform": platform.platform(),
        "machine": platform.machine(),
        "cpu_count": os.cpu_count(),
        "parallelism": parallelism,
        "repeats": repeats,
        "statistic": "median",
        "clock": "time.perf_counter",
    }


def time_detection(group: VmmGroup, cfg: DetectorConfig, repeats: int = 3) -> float:
    """Median wall-clock seconds of ``detect_offline`` (detection only, data prebuilt)."""
    runs = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        detect_offline(group, cfg)
        runs.append(time.perf_counter() - t0)
    return statistics.median(runs)


def bench_scaling(
    vm_counts: Sequence[int],
    tick_counts: Sequence[int],
    base_spec: SyntheticSpec = SyntheticSpec(),
    cfg: DetectorConfig = DetectorConfig(),
    repeats: int = 3,
    noise_std: float = 1.0,
) -> BenchReport:
    """Time detection over the grid ``vm_counts x tick_counts``.

    One synthetic VMM with ``max(vm_counts)`` VMs is generated from
    ``base_spec``; longer tick counts repeat that dataset with added Gaussian
    noise, smaller VM counts take the leading VMs.
    """
    if not vm_counts or not tick_counts:
        raise ValueError("vm_counts and tick_counts must be non-empty")
    spec = replace(base_spec, num_vmms=1, vms_per_vmm=max(vm_counts))
    base = generate_synthetic(spec)[0][0]
    rows = []
    for ticks in tick_counts:
        full = extend_ticks(base, ticks, noise_std=noise_std, seed=spec.seed)
        for k in vm_counts:
            group = VmmGroup(full.vmm_id, full.series[:k])
            rows.append((int(k), int(ticks), time_detection(group, cfg, repeats)))
    return BenchReport(rows, environment_info(1, repeats))
