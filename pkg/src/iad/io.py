"""CSV formats for traces and labels, plus atomic file writing.

Traces are long format with header ``tick,vmm_id,vm_id,value`` (ticks are
1-based).  Labels use ``vmm_id,anomalous,start_tick,end_tick`` where the last
two columns are empty for VMMs without a fault interval.  A ``.gz`` suffix
selects gzip compression for both reading and writing.
"""

from __future__ import annotations

import contextlib
import csv
import gzip
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import MalformedRow, MissingHeader, NonRectangular
from .model import GroundTruth, VmmGroup, VmSeries

TRACE_HEADER = ["tick", "vmm_id", "vm_id", "value"]
LABEL_HEADER = ["vmm_id", "anomalous", "start_tick", "end_tick"]


def _open_text(path, mode: str):
    path = str(path)
    if path.endswith(".gz"):
        return gzip.open(path, mode + "t", encoding="utf-8", newline="")
    return open(path, mode, encoding="utf-8", newline="")


def _umask() -> int:
    mask = os.umask(0)
    os.umask(mask)
    return mask


@contextlib.contextmanager
def atomic_write(path, binary: bool = False) -> Iterator:
    """Write to a temp file next to ``path`` and rename it into place on success."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "wb") as raw, contextlib.ExitStack() as stack:
            sink = raw
            if str(path).endswith(".gz"):
                # mtime=0 keeps compressed output byte-identical across runs
                sink = stack.enter_context(gzip.GzipFile(fileobj=raw, mode="wb", mtime=0))
            if binary:
                yield sink
            else:
                text = io.TextIOWrapper(sink, encoding="utf-8", newline="")
                yield text
                text.flush()
                text.detach()
        os.chmod(tmp, 0o666 & ~_umask())
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def write_json(doc: dict, path) -> None:
    with atomic_write(path) as fh:
        json.dump(doc, fh, indent=2, sort_keys=False)
        fh.write("\n")


def _check_header(row, expected: Sequence[str], path) -> None:
    if row is None or [c.strip() for c in row] != list(expected):
        raise MissingHeader(f"{path}: expected header {','.join(expected)}, got {row!r}")


def write_traces_csv(groups: Iterable[VmmGroup], path) -> None:
    with atomic_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for g in groups:
            ids = g.vm_ids
            mat = g.matrix()
            for t in range(mat.shape[0]):
                for vm_id, v in zip(ids, mat[t]):
                    w.writerow((t + 1, g.vmm_id, vm_id, repr(float(v))))


def read_traces_csv(path) -> list[VmmGroup]:
    # vmm_id -> vm_id -> {tick: value}; dicts keep first-seen order
    data: dict[str, dict[str, dict[int, float]]] = {}
    with _open_text(path, "r") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), TRACE_HEADER, path)
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != 4:
                raise MalformedRow(line, f"expected 4 fields, got {len(row)}")
            tick_s, vmm_id, vm_id, value_s = row
            try:
                tick = int(tick_s)
            except ValueError:
                raise MalformedRow(line, f"tick {tick_s!r} is not an integer") from None
            try:
                value = float(value_s)
            except ValueError:
                raise MalformedRow(line, f"value {value_s!r} is not numeric") from None
            if not math.isfinite(value):
                raise MalformedRow(line, f"value {value_s!r} is not finite")
            if tick < 1:
                raise MalformedRow(line, f"tick {tick} < 1")
            if not vmm_id or not vm_id:
                raise MalformedRow(line, "empty vmm_id or vm_id")
            vm = data.setdefault(vmm_id, {}).setdefault(vm_id, {})
            if tick in vm:
                raise MalformedRow(line, f"duplicate tick {tick} for VM {vm_id!r}")
            vm[tick] = value

    groups = []
    for vmm_id, vms in data.items():
        series = []
        for vm_id, ticks in vms.items():
            n = len(ticks)
            if max(ticks) != n:
                missing = next(t for t in range(1, max(ticks) + 1) if t not in ticks)
                raise NonRectangular(f"VM {vm_id!r} of VMM {vmm_id!r} is missing tick {missing}")
            values = np.fromiter((ticks[t] for t in range(1, n + 1)), dtype=np.float64, count=n)
            series.append(VmSeries(vm_id, values))
        # unequal lengths between VMs are reported by validate_group
        groups.append(VmmGroup(vmm_id, series))
    return groups


def write_labels_csv(labels: Iterable[GroundTruth], path) -> None:
    with atomic_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LABEL_HEADER)
        for gt in labels:
            start, end = gt.fault_interval if gt.fault_interval else ("", "")
            w.writerow((gt.vmm_id, "true" if gt.anomalous else "false", start, end))


_BOOL = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def read_labels_csv(path) -> list[GroundTruth]:
    out = []
    with _open_text(path, "r") as fh:
        reader = csv.reader(fh)
        _check_header(next(reader, None), LABEL_HEADER, path)
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != 4:
                raise MalformedRow(line, f"expected 4 fields, got {len(row)}")
            vmm_id, flag, start_s, end_s = (c.strip() for c in row)
            if flag.lower() not in _BOOL:
                raise MalformedRow(line, f"anomalous must be true/false, got {flag!r}")
            interval = None
            if start_s or end_s:
                try:
                    interval = (int(start_s), int(end_s))
                except ValueError:
                    raise MalformedRow(line, "start_tick/end_tick must be integers") from None
                if not 1 <= interval[0] <= interval[1]:
                    raise MalformedRow(line, f"bad interval {interval}")
            out.append(GroundTruth(vmm_id, _BOOL[flag.lower()], interval))
    return out
