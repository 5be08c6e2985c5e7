"""Single-pass running mean / standard deviation and the windowed mean."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InsufficientHistory, InvalidSample, InvalidWindow


@dataclass(frozen=True)
class RunningStats:
    """Welford accumulator state: sample count, mean and sum of squared deviations."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def update(self, x: float) -> "RunningStats":
        return stats_update(self, x)

    @property
    def empty(self) -> bool:
        return self.count == 0

    @property
    def variance(self) -> float:
        if self.count < 2:
            raise InsufficientHistory(f"variance needs >= 2 samples, have {self.count}")
        return self.m2 / (self.count - 1)

    @property
    def std(self) -> float:
        return stats_std(self)


def stats_update(s: RunningStats, x: float) -> RunningStats:
    x = float(x)
    if not math.isfinite(x):
        raise InvalidSample(f"non-finite sample {x!r}")
    count = s.count + 1
    delta = x - s.mean
    mean = s.mean + delta / count
    m2 = s.m2 + delta * (x - mean)
    return RunningStats(count, mean, m2)


def stats_fold(xs: Iterable[float], s: RunningStats = RunningStats()) -> RunningStats:
    for x in xs:
        s = stats_update(s, x)
    return s


def stats_mean(s: RunningStats) -> float:
    """Mean of the folded samples; 0.0 for an empty accumulator (check ``s.count``)."""
    return s.mean


def stats_std(s: RunningStats) -> float:
    """Sample (n - 1) standard deviation."""
    if s.count < 2:
        raise InsufficientHistory(f"std needs >= 2 samples, have {s.count}")
    return math.sqrt(s.m2 / (s.count - 1))


def windowed_mean(window: Sequence[float]) -> float:
    if len(window) == 0:
        raise InvalidWindow("window is empty")
    return math.fsum(window) / len(window)
