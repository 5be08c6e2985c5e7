"""F1 as a function of the number of VMs per VMM (mean over seeds).

    python scripts/vm_sensitivity.py --vms 1-10 --seeds 10 --out f1_vs_vms.csv [--plot f1_vs_vms.png]

The default generator separates the classes easily; ``--fault-shift``,
``--baseline-std`` and ``--percent-vms-with-fault`` make the task harder.
"""

import argparse
import csv
import statistics
import sys

from iad.datagen import SyntheticSpec, generate_synthetic
from iad.engine import detect_many
from iad.evaluation import f1_score
from iad.model import DetectorConfig


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--vms", default="1-10")
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--fault-shift", type=float, default=25.0)
    ap.add_argument("--baseline-std", type=float, default=2.0)
    ap.add_argument("--percent-vms-with-fault", type=float, default=100.0)
    ap.add_argument("--min-percent-vms-fault", type=float, default=90.0)
    ap.add_argument("--w", type=int, default=60)
    ap.add_argument("--out", default="-")
    ap.add_argument("--plot", default=None)
    args = ap.parse_args()

    lo, _, hi = args.vms.partition("-")
    vm_counts = range(int(lo), int(hi or lo) + 1)
    cfg = DetectorConfig(w=args.w, min_percent_vms_fault=args.min_percent_vms_fault)
    rows = []
    for d in vm_counts:
        f1s = []
        for seed in range(args.seeds):
            spec = SyntheticSpec(vms_per_vmm=d, fault_shift=args.fault_shift, baseline_std=args.baseline_std,
                                 percent_vms_with_fault=args.percent_vms_with_fault, seed=seed)
            groups, truth = generate_synthetic(spec)
            results = detect_many(groups, cfg)
            f1s.append(f1_score({r.vmm_id: r.predicted_anomalous for r in results}, truth).f1)
        rows.append((d, statistics.mean(f1s), statistics.pstdev(f1s)))
        print(f"vms={d} f1={rows[-1][1]:.3f}", file=sys.stderr)

    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["vms_per_vmm", "mean_f1", "std_f1"])
    w.writerows(rows)
    if fh is not sys.stdout:
        fh.close()

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.errorbar([r[0] for r in rows], [r[1] for r in rows], yerr=[r[2] for r in rows], marker="o")
        ax.set_xlabel("VMs per VMM")
        ax.set_ylabel("F1")
        ax.set_ylim(0, 1.05)
        fig.tight_layout()
        fig.savefig(args.plot, dpi=120)


if __name__ == "__main__":
    main()
