#!/usr/bin/env python3
"""Cost sweep over all four queries on a seeded insert workload.

Writes one CSV row per (query, epsilon, size) cell; columns match the
`trimaint bench` output. Counter units only, wall-clock is advisory.
"""

import argparse

from trimaint.cli import bench_sweep, write_rows
from trimaint.workload import WorkloadSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="1024,4096")
    ap.add_argument("--epsilons", default="0,0.25,0.5,0.75,1")
    ap.add_argument("--queries", default="d0,d1,d2,d3")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--domain", type=int, default=64)
    ap.add_argument("--skew", default="uniform")
    ap.add_argument("--out")
    args = ap.parse_args()
    sizes = [int(tok) for tok in args.sizes.split(",")]
    epsilons = [float(tok) for tok in args.epsilons.split(",")]
    rows = []
    for query in args.queries.split(","):
        spec = WorkloadSpec(
            seed=args.seed, domain=args.domain, updates=1, skew=args.skew
        )
        rows.extend(bench_sweep(query, epsilons, sizes, spec))
    write_rows(rows, args.out)


if __name__ == "__main__":
    main()
