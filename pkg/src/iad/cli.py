"""Command-line entry point: ``iad {generate,detect,evaluate,bench,pipeline}``.

Every option can also come from a ``--config`` file of ``key = value`` lines
(``#`` starts a comment; keys are option names with ``-`` or ``_``) or from an
environment variable ``IAD_<NAME>`` (e.g. ``IAD_MIN_PERCENT_VMS_FAULT=80``).
Precedence, lowest to highest: built-in default, config file, environment,
command-line flag.

Exit codes: 0 success (also when anomalies are found), 2 usage or validation
error, 3 I/O error, 4 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

from . import __version__
from .bench import bench_scaling
from .datagen import SyntheticSpec, generate_synthetic
from .engine import AnomalyEvent, detect_many, results_to_json
from .errors import IADError
from .evaluation import f1_score, overlap_predictions
from .io import atomic_write, read_labels_csv, read_traces_csv, write_json, write_labels_csv, write_traces_csv
from .model import DetectorConfig

log = logging.getLogger("iad")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_INTERNAL = 0, 2, 3, 4


class UsageError(IADError):
    pass


def _int_list(text: str) -> list[int]:
    try:
        out = [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


@dataclass(frozen=True)
class Opt:
    name: str
    type: Callable[[str], Any]
    default: Any
    help: str
    choices: Optional[Sequence[str]] = None

    @property
    def flag(self) -> str:
        return "--" + self.name.replace("_", "-")


DETECTOR_OPTS = [
    Opt("w", int, 60, "window length in ticks"),
    Opt("mean_threshold_percent", float, 5.0, "mean detector threshold, percent"),
    Opt("z_multiplier", float, 3.0, "z-score detector threshold on |z|"),
    Opt("min_percent_vms_fault", float, 90.0, "percent of a VMM's VMs that must change at a tick"),
    Opt("warmup_ticks", int, None, "history ticks required before the first verdict (default: w)"),
    Opt("epsilon", float, 1e-9, "guard for zero spread / zero mean"),
    Opt("detector", str, "zscore", "per-VM change-point detector", ("zscore", "mean")),
    Opt("max_gap", int, 2, "merge anomalous ticks at most this far apart into one event"),
    Opt("min_events", int, 1, "events needed to classify a VMM anomalous"),
]

SPEC_OPTS = [
    Opt("num_vmms", int, 10, "number of VMMs"),
    Opt("vms_per_vmm", int, 10, "VMs hosted per VMM"),
    Opt("percent_vms_with_fault", float, 100.0, "percent of an anomalous VMM's VMs that get the fault"),
    Opt("percent_anomalous_vmms", float, 50.0, "percent of VMMs that are anomalous"),
    Opt("ticks", int, 1000, "ticks per VM"),
    Opt("baseline_mean_lo", float, 20.0, "lower bound of per-VM mean utilization"),
    Opt("baseline_mean_hi", float, 60.0, "upper bound of per-VM mean utilization"),
    Opt("baseline_std", float, 2.0, "per-tick Gaussian noise"),
    Opt("fault_shift", float, 25.0, "magnitude of the injected mean shift"),
    Opt("fault_sign", str, "random", "direction of the shift", ("random", "up", "down")),
    Opt("fault_start", int, None, "first faulty tick (default 0.4 * ticks)"),
    Opt("fault_end", int, None, "last faulty tick (default 0.6 * ticks)"),
    Opt("seed", int, 0, "random seed"),
]

PARALLEL_OPTS = [Opt("parallelism", int, 1, "worker processes over VMMs")]

GENERATE_OPTS = SPEC_OPTS + [
    Opt("traces_out", str, None, "trace CSV to write (.gz for gzip)"),
    Opt("labels_out", str, None, "label CSV to write"),
]
DETECT_OPTS = DETECTOR_OPTS + PARALLEL_OPTS + [
    Opt("traces", str, None, "trace CSV to read"),
    Opt("out", str, "-", "results JSON path, '-' for stdout"),
]
EVALUATE_OPTS = [
    Opt("results", str, None, "results JSON from 'detect'"),
    Opt("labels", str, None, "label CSV"),
    Opt("overlap_lead", int, None, "lead allowance for the overlap metric (default: w of the run)"),
    Opt("out", str, "-", "evaluation JSON path, '-' for stdout"),
]
BENCH_OPTS = [o for o in SPEC_OPTS if o.name not in ("ticks", "num_vmms", "vms_per_vmm")] + DETECTOR_OPTS + [
    Opt("vms", _int_list, [1, 10, 100], "comma-separated VM counts"),
    Opt("ticks", _int_list, [1000, 10000], "comma-separated tick counts"),
    Opt("base_ticks", int, 1000, "length of the generated dataset before time-duplication"),
    Opt("noise_std", float, 1.0, "noise added to each duplicated copy"),
    Opt("repeats", int, 3, "timing repetitions per grid point (median reported)"),
    Opt("out_json", str, None, "BenchReport JSON path"),
    Opt("out_csv", str, None, "plot-ready CSV path"),
    Opt("format", str, "csv", "stdout format when no output path is given", ("csv", "json")),
]
PIPELINE_OPTS = SPEC_OPTS + DETECTOR_OPTS + PARALLEL_OPTS + [
    Opt("workdir", str, None, "directory for traces, labels, results and evaluation files"),
]


def _load_config_file(path: str) -> dict[str, str]:
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line or (line.startswith("[") and line.endswith("]")):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (p.strip() for p in line.split("=", 1))
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        out[key.replace("-", "_")] = value
    return out


def resolve(args: argparse.Namespace, opts: Sequence[Opt], env=None) -> dict[str, Any]:
    """Merge built-in defaults, config file, environment and flags for ``opts``."""
    env = os.environ if env is None else env
    file_values = _load_config_file(args.config) if getattr(args, "config", None) else {}
    # keys of other subcommands are allowed so one file can serve every command
    unknown = sorted(set(file_values) - _all_option_names())
    if unknown:
        raise UsageError(f"unknown key(s) in config file: {', '.join(unknown)}")
    out = {}
    for o in opts:
        value = getattr(args, o.name, None)
        source = None
        if value is None and f"IAD_{o.name.upper()}" in env:
            source = env[f"IAD_{o.name.upper()}"]
        elif value is None and o.name in file_values:
            source = file_values[o.name]
        if source is not None:
            try:
                value = o.type(source)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"bad value {source!r} for {o.name}: {exc}") from None
            if o.choices and value not in o.choices:
                raise UsageError(f"{o.name} must be one of {', '.join(o.choices)}")
        out[o.name] = o.default if value is None else value
    return out


def _require(values: dict, *names: str) -> None:
    missing = [n for n in names if not values.get(n)]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


def detector_config(v: dict) -> DetectorConfig:
    return DetectorConfig(
        w=v["w"],
        mean_threshold_percent=v["mean_threshold_percent"],
        z_multiplier=v["z_multiplier"],
        min_percent_vms_fault=v["min_percent_vms_fault"],
        warmup_ticks=v["warmup_ticks"],
        epsilon=v["epsilon"],
        detector_kind=v["detector"],
    )


def synthetic_spec(v: dict, **overrides) -> SyntheticSpec:
    v = {**v, **overrides}
    interval = None
    if v["fault_start"] is not None or v["fault_end"] is not None:
        ticks = v["ticks"]
        interval = (
            v["fault_start"] if v["fault_start"] is not None else round(0.4 * ticks),
            v["fault_end"] if v["fault_end"] is not None else round(0.6 * ticks),
        )
    return SyntheticSpec(
        num_vmms=v["num_vmms"],
        vms_per_vmm=v["vms_per_vmm"],
        percent_vms_with_fault=v["percent_vms_with_fault"],
        percent_anomalous_vmms=v["percent_anomalous_vmms"],
        ticks=v["ticks"],
        baseline_mean_range=(v["baseline_mean_lo"], v["baseline_mean_hi"]),
        baseline_std=v["baseline_std"],
        fault_shift=v["fault_shift"],
        fixed_sign={"random": None, "up": 1, "down": -1}[v["fault_sign"]],
        fault_interval=interval,
        seed=v["seed"],
    )


def _emit_json(doc: dict, out: str) -> None:
    if out == "-":
        json.dump(doc, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        write_json(doc, out)


# ---------------------------------------------------------------- commands


def cmd_generate(v: dict) -> int:
    _require(v, "traces_out", "labels_out")
    spec = synthetic_spec(v)
    groups, truth = generate_synthetic(spec)
    write_traces_csv(groups, v["traces_out"])
    write_labels_csv(truth, v["labels_out"])
    n_anom = sum(gt.anomalous for gt in truth)
    print(f"vmms={len(groups)} anomalous={n_anom} vms_per_vmm={spec.vms_per_vmm} ticks={spec.ticks} seed={spec.seed}")
    return EXIT_OK


def _detect_doc(groups, v: dict, extra: Optional[dict] = None) -> dict:
    cfg = detector_config(v)
    t0 = time.perf_counter()
    results = detect_many(groups, cfg, v["max_gap"], v["min_events"], v["parallelism"])
    wall = time.perf_counter() - t0
    doc = results_to_json(results, cfg, v["max_gap"], v["min_events"], extra)
    doc["timings"]["wall_seconds"] = wall
    doc["timings"]["parallelism"] = v["parallelism"]
    return doc


def cmd_detect(v: dict) -> int:
    _require(v, "traces")
    groups = read_traces_csv(v["traces"])
    doc = _detect_doc(groups, v, {"input": {"traces": v["traces"]}})
    _emit_json(doc, v["out"])
    if v["out"] != "-":
        flagged = [r["vmm_id"] for r in doc["vmms"] if r["predicted_anomalous"]]
        print(f"vmms={len(doc['vmms'])} flagged={len(flagged)} results={v['out']}")
    return EXIT_OK


def _events_from_doc(doc: dict) -> dict[str, list[AnomalyEvent]]:
    return {
        r["vmm_id"]: [
            AnomalyEvent(r["vmm_id"], e["start_tick"], e["end_tick"], e["peak_vote_fraction"])
            for e in r["events"]
        ]
        for r in doc["vmms"]
    }


def evaluate_doc(doc: dict, truth, lead: Optional[int] = None) -> dict:
    predicted = {r["vmm_id"]: bool(r["predicted_anomalous"]) for r in doc["vmms"]}
    report = f1_score(predicted, truth, strict=True)
    lead = doc["config"]["w"] if lead is None else lead
    overlap = f1_score(overlap_predictions(_events_from_doc(doc), truth, lead), truth)
    return {
        "format": "iad-eval/1",
        "config": doc.get("config"),
        "vmm_level": report.to_dict(),
        "overlap": {"lead": lead, **overlap.to_dict()},
    }


def cmd_evaluate(v: dict) -> int:
    _require(v, "results", "labels")
    try:
        doc = json.loads(Path(v["results"]).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{v['results']} is not valid JSON: {exc}") from None
    truth = read_labels_csv(v["labels"])
    out = evaluate_doc(doc, truth, v["overlap_lead"])
    out["input"] = {"results": v["results"], "labels": v["labels"]}
    _emit_json(out, v["out"])
    if v["out"] != "-":
        print(f"f1={out['vmm_level']['f1']:.6f}")
    return EXIT_OK


def cmd_bench(v: dict) -> int:
    spec = synthetic_spec(v, ticks=v["base_ticks"], num_vmms=1, vms_per_vmm=max(v["vms"]))
    report = bench_scaling(v["vms"], v["ticks"], spec, detector_config(v), v["repeats"], v["noise_std"])
    doc = report.to_dict()
    doc["config"] = {**detector_config(v).to_dict(), "spec": spec.to_dict(), "noise_std": v["noise_std"]}
    if v["out_json"]:
        write_json(doc, v["out_json"])
    if v["out_csv"]:
        with atomic_write(v["out_csv"]) as fh:
            fh.write(report.to_csv())
    if not v["out_json"] and not v["out_csv"]:
        if v["format"] == "json":
            _emit_json(doc, "-")
        else:
            sys.stdout.write(report.to_csv())
    return EXIT_OK


def cmd_pipeline(v: dict) -> int:
    spec = synthetic_spec(v)
    groups, truth = generate_synthetic(spec)
    doc = _detect_doc(groups, v, {"spec": spec.to_dict()})
    ev = evaluate_doc(doc, truth)
    ev["spec"] = spec.to_dict()
    if v["workdir"]:
        wd = Path(v["workdir"])
        wd.mkdir(parents=True, exist_ok=True)
        write_traces_csv(groups, wd / "traces.csv")
        write_labels_csv(truth, wd / "labels.csv")
        write_json(doc, wd / "results.json")
        write_json(ev, wd / "eval.json")
    rep = ev["vmm_level"]
    for row in rep["per_vmm"]:
        print(f"{row['vmm_id']} truth={row['truth']} predicted={row['predicted']} {row['outcome']}")
    print(
        f"tp={rep['true_positives']} fp={rep['false_positives']} fn={rep['false_negatives']} "
        f"tn={rep['true_negatives']} precision={rep['precision']:.4f} recall={rep['recall']:.4f}"
    )
    print(f"{rep['f1']:.6f}")
    return EXIT_OK


COMMANDS = {
    "generate": (cmd_generate, GENERATE_OPTS, "write a synthetic trace CSV and label CSV"),
    "detect": (cmd_detect, DETECT_OPTS, "run detection on a trace CSV"),
    "evaluate": (cmd_evaluate, EVALUATE_OPTS, "score detection results against labels"),
    "bench": (cmd_bench, BENCH_OPTS, "time detection over VM and tick counts"),
    "pipeline": (cmd_pipeline, PIPELINE_OPTS, "generate, detect and evaluate in one run"),
}


def _all_option_names() -> set[str]:
    return {o.name for _, opts, _ in COMMANDS.values() for o in opts}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iad",
        description="Detect anomalous hypervisors from the utilization of the VMs they host.",
        epilog="Options may also be set in a --config file or as IAD_<NAME> environment variables.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (_, opts, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", help="key = value file with option defaults")
        p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
        for o in opts:
            default = "" if o.default is None else f" (default: {o.default})"
            p.add_argument(o.flag, dest=o.name, type=o.type, default=None, choices=o.choices,
                           help=o.help + default)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler, opts, _ = COMMANDS[args.command]
    try:
        values = resolve(args, opts)
        log.debug("resolved options: %s", values)
        return handler(values)
    except IADError as exc:
        print(f"iad {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"iad {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"iad {args.command}: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
