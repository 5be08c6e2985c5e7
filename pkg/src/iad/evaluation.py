"""VMM-level precision / recall / F1 against ground-truth labels."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .engine import AnomalyEvent
from .errors import MissingPrediction
from .model import GroundTruth


@dataclass(frozen=True)
class EvalReport:
    true_positives: int
    false_positives: int
    false_negatives: int
    true_negatives: int
    precision: float
    recall: float
    f1: float
    table: tuple = field(default=(), compare=False)

    def to_dict(self) -> dict:
        return {
            "true_positives": self.true_positives,
            "false_positives": self.false_positives,
            "false_negatives": self.false_negatives,
            "true_negatives": self.true_negatives,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "per_vmm": [dict(row) for row in self.table],
        }


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def f1_score(
    predicted: Mapping[str, bool], truth: Sequence[GroundTruth], strict: bool = False
) -> EvalReport:
    """Binary classification score with anomalous VMMs as the positive class.

    Zero denominators give 0.0 rather than NaN.  Predictions for VMMs that
    have no label are ignored unless ``strict`` is set.
    """
    if strict:
        labeled = {gt.vmm_id for gt in truth}
        for vmm_id in predicted:
            if vmm_id not in labeled:
                raise MissingPrediction(vmm_id, missing="label")
    tp = fp = fn = tn = 0
    table = []
    for gt in truth:
        if gt.vmm_id not in predicted:
            raise MissingPrediction(gt.vmm_id)
        pred = bool(predicted[gt.vmm_id])
        if pred and gt.anomalous:
            tp += 1
            outcome = "TP"
        elif pred:
            fp += 1
            outcome = "FP"
        elif gt.anomalous:
            fn += 1
            outcome = "FN"
        else:
            tn += 1
            outcome = "TN"
        table.append(
            (("vmm_id", gt.vmm_id), ("truth", gt.anomalous), ("predicted", pred), ("outcome", outcome))
        )
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    f1 = _ratio(2 * precision * recall, precision + recall) if precision + recall > 0 else 0.0
    return EvalReport(tp, fp, fn, tn, precision, recall, f1, tuple(table))


def overlap_predictions(
    events: Mapping[str, Sequence[AnomalyEvent]],
    truth: Sequence[GroundTruth],
    lead: int = 0,
) -> dict[str, bool]:
    """Timing-aware predictions for the secondary, overlap-based F1.

    An anomalous VMM with a labeled interval ``[s, e]`` counts as detected
    only if one of its events overlaps ``[s - lead, e]``; ``lead`` allows for
    detections that fire up to a window ahead of the fault.  Every other VMM
    is predicted anomalous iff it has any event.
    """
    out = {}
    for gt in truth:
        if gt.vmm_id not in events:
            raise MissingPrediction(gt.vmm_id)
        evs = events[gt.vmm_id]
        if gt.anomalous and gt.fault_interval is not None:
            lo, hi = gt.fault_interval[0] - lead, gt.fault_interval[1]
            out[gt.vmm_id] = any(e.start_tick <= hi and e.end_tick >= lo for e in evs)
        else:
            out[gt.vmm_id] = len(evs) > 0
    return out
