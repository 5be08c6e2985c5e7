"""Per-VM online change-point detection.

A detector holds the last ``w`` samples of one VM as its pending window and
folds every sample that falls out of that window into running history
statistics.  After ingesting tick ``t + w`` it decides whether tick ``t`` is a
change point by comparing the window (ticks ``t+1 .. t+w``) with the history
(ticks ``1 .. t``).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import InsufficientHistory, InvalidSample
from .model import DetectorConfig, DetectorKind
from .stats import RunningStats, stats_std, stats_update, windowed_mean


def mean_detector(window: Sequence[float], hist: RunningStats, cfg: DetectorConfig) -> bool:
    """Absolute percent difference of window mean vs history mean exceeds the threshold."""
    if hist.count < 1:
        raise InsufficientHistory("mean detector needs at least one history sample")
    diff = abs(windowed_mean(window) - hist.mean)
    return 100.0 * diff / max(abs(hist.mean), cfg.epsilon) > cfg.mean_threshold_percent


def zscore_detector(window: Sequence[float], hist: RunningStats, cfg: DetectorConfig) -> bool:
    """z-test of the window mean against the history distribution.

    ``z = (window_mean - hist_mean) / (hist_std / sqrt(w))`` where ``w`` is the
    window length; a change point when ``|z| > cfg.z_multiplier``.  When the
    history has (numerically) zero spread, any mean difference above
    ``cfg.epsilon`` counts as a change.
    """
    if hist.count < 2:
        raise InsufficientHistory("z-score detector needs at least two history samples")
    diff = windowed_mean(window) - hist.mean
    std = stats_std(hist)
    if std <= cfg.epsilon:
        return abs(diff) > cfg.epsilon
    z = diff / (std / math.sqrt(len(window)))
    return abs(z) > cfg.z_multiplier


def detect_change(window: Sequence[float], hist: RunningStats, cfg: DetectorConfig) -> bool:
    if cfg.detector_kind is DetectorKind.MEAN:
        return mean_detector(window, hist, cfg)
    return zscore_detector(window, hist, cfg)


@dataclass(frozen=True)
class ChangePointVerdict:
    vm_id: str
    tick: int
    changed: bool


@dataclass
class VmDetectorState:
    """Streaming state of one VM's detector. Advanced in place by :func:`vm_step`."""

    vm_id: str
    cfg: DetectorConfig = field(default_factory=DetectorConfig)
    pending_window: deque = field(default_factory=deque)
    history_stats: RunningStats = field(default_factory=RunningStats)
    ticks_seen: int = 0

    def step(self, x: float) -> Optional[ChangePointVerdict]:
        return vm_step(self, x)[1]


def vm_step(
    state: VmDetectorState, x: float, cfg: Optional[DetectorConfig] = None
) -> tuple[VmDetectorState, Optional[ChangePointVerdict]]:
    """Ingest one sample; return the state and, once warm, the verdict for ``ticks_seen - w``."""
    cfg = cfg or state.cfg
    x = float(x)
    if not math.isfinite(x):
        raise InvalidSample(f"non-finite sample {x!r} for VM {state.vm_id!r}")
    state.pending_window.append(x)
    state.ticks_seen += 1
    if len(state.pending_window) > cfg.w:
        state.history_stats = stats_update(state.history_stats, state.pending_window.popleft())
    if len(state.pending_window) < cfg.w or state.history_stats.count < cfg.effective_warmup:
        return state, None
    tick = state.ticks_seen - cfg.w
    return state, ChangePointVerdict(state.vm_id, tick, detect_change(state.pending_window, state.history_stats, cfg))

