"""Indirect detection of anomalous hypervisors (VMMs) from hosted-VM utilization."""

__version__ = "0.1.0"

from .datagen import SyntheticSpec, generate_synthetic, group_traces, inject_anomaly, inject_groups
from .detectors import VmDetectorState, mean_detector, vm_step, zscore_detector
from .engine import (
    AnomalyEvent,
    VmmEngineState,
    classify_vmm,
    detect_many,
    detect_offline,
    engine_step,
    merge_events,
)
from .errors import IADError
from .evaluation import EvalReport, f1_score
from .model import DetectorConfig, DetectorKind, GroundTruth, VmmGroup, VmmVerdict, VmSeries, validate_group
from .stats import RunningStats, stats_mean, stats_std, stats_update, windowed_mean

__all__ = [
    "AnomalyEvent",
    "DetectorConfig",
    "DetectorKind",
    "EvalReport",
    "GroundTruth",
    "IADError",
    "RunningStats",
    "SyntheticSpec",
    "VmDetectorState",
    "VmSeries",
    "VmmEngineState",
    "VmmGroup",
    "VmmVerdict",
    "classify_vmm",
    "detect_many",
    "detect_offline",
    "engine_step",
    "f1_score",
    "generate_synthetic",
    "group_traces",
    "inject_anomaly",
    "inject_groups",
    "mean_detector",
    "merge_events",
    "stats_mean",
    "stats_std",
    "stats_update",
    "validate_group",
    "vm_step",
    "windowed_mean",
    "zscore_detector",
]
