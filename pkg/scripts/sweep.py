"""Hyper-parameter sweep: run ``iad pipeline`` over a grid of flags.

    python scripts/sweep.py --w 30,60,120 --min-percent-vms-fault 70,80,90 --seeds 0-4

Writes one CSV row per (grid point, seed) with the F1 printed by the pipeline.
"""

import argparse
import contextlib
import csv
import io
import itertools
import sys

from iad.cli import main as iad_main


def parse_seeds(text):
    if "-" in text:
        lo, hi = text.split("-")
        return list(range(int(lo), int(hi) + 1))
    return [int(s) for s in text.split(",")]


def run_pipeline(flags):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        rc = iad_main(["pipeline", *flags])
    if rc != 0:
        raise SystemExit(f"pipeline failed ({rc}) for {flags}")
    return float(buf.getvalue().strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--w", default="60")
    ap.add_argument("--min-percent-vms-fault", default="90")
    ap.add_argument("--z-multiplier", default="3")
    ap.add_argument("--detector", default="zscore")
    ap.add_argument("--seeds", default="0-4")
    ap.add_argument("--extra", default="", help="flags passed through to every pipeline run")
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    grid = {
        "w": args.w.split(","),
        "min_percent_vms_fault": args.min_percent_vms_fault.split(","),
        "z_multiplier": args.z_multiplier.split(","),
        "detector": args.detector.split(","),
    }
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow([*grid, "seed", "f1"])
    for values in itertools.product(*grid.values()):
        for seed in parse_seeds(args.seeds):
            flags = [f for k, v in zip(grid, values) for f in ("--" + k.replace("_", "-"), v)]
            f1 = run_pipeline(flags + ["--seed", str(seed)] + args.extra.split())
            writer.writerow([*values, seed, f"{f1:.6f}"])
            fh.flush()
    if fh is not sys.stdout:
        fh.close()


if __name__ == "__main__":
    main()
