"""Build a labeled VMM dataset from a pool of real VM utilization traces.

Input is any trace CSV in the package's long format (``tick,vmm_id,vm_id,value``);
the ``vmm_id`` column is ignored and every VM goes into one pool.  VMs are
shuffled into groups of ``--vms-per-vmm`` and a share of the groups get their
CPU raised or lowered over a fault interval.

    python scripts/traces_to_dataset.py pool.csv.gz --vms-per-vmm 10 \\
        --percent-anomalous-vmms 60 --traces-out azure_like.csv --labels-out azure_like_labels.csv
"""

import argparse

from iad.datagen import group_traces, inject_groups
from iad.io import read_traces_csv, write_labels_csv, write_traces_csv


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("pool")
    ap.add_argument("--vms-per-vmm", type=int, default=10)
    ap.add_argument("--percent-anomalous-vmms", type=float, default=50.0)
    ap.add_argument("--percent-vms-with-fault", type=float, default=100.0)
    ap.add_argument("--fault-shift", type=float, default=25.0)
    ap.add_argument("--fault-start", type=int, default=None)
    ap.add_argument("--fault-end", type=int, default=None)
    ap.add_argument("--truncate", action="store_true", help="cut all VMs to the shortest trace")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--traces-out", required=True)
    ap.add_argument("--labels-out", required=True)
    args = ap.parse_args()

    pool = [s for g in read_traces_csv(args.pool) for s in g.series]
    groups = group_traces(pool, args.vms_per_vmm, seed=args.seed, truncate=args.truncate)
    interval = None
    if args.fault_start is not None and args.fault_end is not None:
        interval = (args.fault_start, args.fault_end)
    groups, truth = inject_groups(groups, args.percent_anomalous_vmms, args.percent_vms_with_fault,
                                  args.fault_shift, interval, seed=args.seed)
    write_traces_csv(groups, args.traces_out)
    write_labels_csv(truth, args.labels_out)
    print(f"pool={len(pool)} vmms={len(groups)} anomalous={sum(t.anomalous for t in truth)} "
          f"dropped={len(pool) - len(groups) * args.vms_per_vmm}")


if __name__ == "__main__":
    main()
