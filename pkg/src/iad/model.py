"""Domain types shared by the detector, data tooling and evaluation code."""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import EmptySeries, InvalidConfig, LengthMismatch, ValidationError


class DetectorKind(str, enum.Enum):
    MEAN = "mean"
    ZSCORE = "zscore"


@dataclass(frozen=True, eq=False)
class VmSeries:
    """Utilization samples of one VM, one value per tick (tick 1 is ``values[0]``)."""

    vm_id: str
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64, copy=True).reshape(-1)
        if arr.size and not np.all(np.isfinite(arr)):
            raise ValidationError(f"series for VM {self.vm_id!r} has non-finite values")
        if arr.size and (arr.min() < 0.0 or arr.max() > 100.0):
            warnings.warn(
                f"VM {self.vm_id!r} has utilization outside [0, 100]", stacklevel=3
            )
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.shape[0]

    def __eq__(self, other):
        if not isinstance(other, VmSeries):
            return NotImplemented
        return self.vm_id == other.vm_id and np.array_equal(self.values, other.values)

    __hash__ = None


@dataclass(frozen=True)
class VmmGroup:
    """The VMs hosted on one VMM; the unit of detection."""

    vmm_id: str
    series: tuple[VmSeries, ...]

    def __post_init__(self):
        object.__setattr__(self, "series", tuple(self.series))
        if not self.series:
            raise ValidationError(f"VMM {self.vmm_id!r} hosts no VMs")

    @property
    def d(self) -> int:
        return len(self.series)

    @property
    def n(self) -> int:
        return len(self.series[0])

    @property
    def vm_ids(self) -> tuple[str, ...]:
        return tuple(s.vm_id for s in self.series)

    def matrix(self) -> np.ndarray:
        """(n, d) array, rows are ticks. Only valid after :func:`validate_group`."""
        return np.column_stack([s.values for s in self.series])


@dataclass(frozen=True)
class DetectorConfig:
    w: int = 60
    mean_threshold_percent: float = 5.0
    z_multiplier: float = 3.0
    min_percent_vms_fault: float = 90.0
    warmup_ticks: Optional[int] = None  # None means "same as w"
    epsilon: float = 1e-9
    detector_kind: DetectorKind = DetectorKind.ZSCORE

    def __post_init__(self):
        object.__setattr__(self, "detector_kind", DetectorKind(self.detector_kind))
        if self.warmup_ticks is None:
            object.__setattr__(self, "warmup_ticks", self.w)
        if int(self.w) != self.w or self.w < 2:
            raise InvalidConfig(f"w must be an integer >= 2, got {self.w}")
        if self.mean_threshold_percent <= 0:
            raise InvalidConfig("mean_threshold_percent must be > 0")
        if self.z_multiplier <= 0:
            raise InvalidConfig("z_multiplier must be > 0")
        if not 0 < self.min_percent_vms_fault <= 100:
            raise InvalidConfig("min_percent_vms_fault must be in (0, 100]")
        if int(self.warmup_ticks) != self.warmup_ticks or self.warmup_ticks < 0:
            raise InvalidConfig("warmup_ticks must be a non-negative integer")
        if not self.epsilon > 0:
            raise InvalidConfig("epsilon must be > 0")

    @property
    def effective_warmup(self) -> int:
        # the z-score needs a standard deviation, hence two samples
        floor = 2 if self.detector_kind is DetectorKind.ZSCORE else 1
        return max(int(self.warmup_ticks), floor)

    def to_dict(self) -> dict:
        return {
            "w": self.w,
            "mean_threshold_percent": self.mean_threshold_percent,
            "z_multiplier": self.z_multiplier,
            "min_percent_vms_fault": self.min_percent_vms_fault,
            "warmup_ticks": self.warmup_ticks,
            "epsilon": self.epsilon,
            "detector_kind": self.detector_kind.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DetectorConfig":
        return cls(**d)


@dataclass(frozen=True)
class VmmVerdict:
    vmm_id: str
    tick: int
    anomalous: bool
    changed_vm_ids: frozenset = field(default_factory=frozenset)
    vote_fraction: float = 0.0


@dataclass(frozen=True)
class GroundTruth:
    vmm_id: str
    anomalous: bool
    fault_interval: Optional[tuple[int, int]] = None

    def __post_init__(self):
        if self.fault_interval is not None:
            start, end = self.fault_interval
            if not 1 <= start <= end:
                raise ValidationError(
                    f"bad fault interval {self.fault_interval} for {self.vmm_id!r}"
                )
            object.__setattr__(self, "fault_interval", (int(start), int(end)))


def votes_anomalous(n_changed: int, d: int, min_percent: float) -> bool:
    """Voting rule: at least ``min_percent`` percent of the ``d`` VMs changed."""
    # integer-side comparison, avoids 0.29 * 100 < 29 style rounding
    return 100 * n_changed >= min_percent * d


def validate_group(group: VmmGroup) -> VmmGroup:
    """Check for empty series and unequal lengths; return the group unchanged."""
    series: Sequence[VmSeries] = group.series
    for s in series:
        if len(s) == 0:
            raise EmptySeries(s.vm_id, group.vmm_id)
    expected = len(series[0])
    for s in series[1:]:
        if len(s) != expected:
            raise LengthMismatch(expected, s.vm_id, len(s), group.vmm_id)
    return group
