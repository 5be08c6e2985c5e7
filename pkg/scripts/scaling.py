"""Detection time vs number of VMs and vs number of ticks.

    python scripts/scaling.py --out-dir results/scaling [--plot]

Runs two sweeps through ``bench_scaling``: VMs 1..100 at a fixed tick count,
and ticks up to 100000 at 100 VMs.  Each writes a ``num_vms,num_ticks,seconds``
CSV plus the JSON report.
"""

import argparse
import json
from pathlib import Path

from iad.bench import bench_scaling
from iad.datagen import SyntheticSpec


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--vms", default="1,10,20,30,40,50,60,70,80,90,100")
    ap.add_argument("--ticks-fixed", type=int, default=10_000)
    ap.add_argument("--ticks", default="10000,20000,40000,60000,80000,100000")
    ap.add_argument("--vms-fixed", type=int, default=100)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out-dir", default="scaling")
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    spec = SyntheticSpec(seed=args.seed)
    sweeps = {
        "vms": bench_scaling([int(v) for v in args.vms.split(",")], [args.ticks_fixed], spec, repeats=args.repeats),
        "ticks": bench_scaling([args.vms_fixed], [int(t) for t in args.ticks.split(",")], spec, repeats=args.repeats),
    }
    for name, report in sweeps.items():
        (out / f"scaling_{name}.csv").write_text(report.to_csv())
        (out / f"scaling_{name}.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
        for v, t, s in report.rows:
            print(f"{name}: vms={v} ticks={t} seconds={s:.3f}")

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
        rows = sweeps["vms"].rows
        axes[0].plot([r[0] for r in rows], [r[2] for r in rows], marker="o")
        axes[0].set_xlabel("number of VMs")
        rows = sweeps["ticks"].rows
        axes[1].plot([r[1] for r in rows], [r[2] for r in rows], marker="o")
        axes[1].set_xlabel("number of time ticks")
        for ax in axes:
            ax.set_ylabel("detection time [s]")
        fig.tight_layout()
        fig.savefig(out / "scaling.png", dpi=120)


if __name__ == "__main__":
    main()
