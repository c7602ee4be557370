#!/usr/bin/env python3
"""Run the full experiment battery and drop the CSV products in one directory.

Produces sweep_destinations.csv, sweep_diffusers.csv, critical_points.csv and
degree_gradient.csv, plus a short stdout summary of headline numbers.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from dnmtp.experiments import (  # noqa: E402
    ExperimentConfig,
    default_graphs,
    degree_rows_to_csv,
    find_critical_points,
    gradient_vs_degree,
    sweep_destinations,
    sweep_diffusers,
)
from dnmtp.fileio import atomic_write_text  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", default="results")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--precision", type=float, default=None)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--m-list", default="2,3,4")
    args = parser.parse_args()

    overrides = {}
    for name in ("seed", "precision", "workers"):
        if getattr(args, name) is not None:
            overrides[name] = getattr(args, name)
    cfg = ExperimentConfig(**overrides)
    os.makedirs(args.outdir, exist_ok=True)
    graphs = default_graphs(cfg)

    start = time.perf_counter()
    dest = sweep_destinations(graphs, cfg)
    atomic_write_text(os.path.join(args.outdir, "sweep_destinations.csv"), dest.to_csv())
    print(f"destination sweep done ({time.perf_counter() - start:.0f}s); headline "
          f"reductions with {cfg.dest_sweep_k} diffusers:")
    print(f"  ShP at |R|=32: {dest.reduction('ShP', 32, cfg.dest_sweep_k):.1%}")
    print(f"  StT at |R|=16: {dest.reduction('StT', 16, cfg.dest_sweep_k):.1%}")

    diff = sweep_diffusers(graphs, cfg, n_dest=20)
    atomic_write_text(os.path.join(args.outdir, "sweep_diffusers.csv"), diff.to_csv())
    print("diffuser sweep done; reductions at |R|=20:")
    for k in (3, 15):
        print(f"  k={k}: ShP {diff.reduction('ShP', 20, k):.1%}, StT {diff.reduction('StT', 20, k):.1%}")

    study = find_critical_points(graphs, cfg)
    atomic_write_text(os.path.join(args.outdir, "critical_points.csv"), study.to_csv())
    slope = "undefined" if study.slope is None else f"{study.slope:.2f}"
    print(f"critical points: {study.points} (slope {slope})")

    rows = gradient_vs_degree(cfg, [int(x) for x in args.m_list.split(",")])
    atomic_write_text(os.path.join(args.outdir, "degree_gradient.csv"), degree_rows_to_csv(rows))
    for row in rows:
        slope = "undefined" if row.slope is None else f"{row.slope:.2f}"
        print(f"  m={row.m}: avg degree {row.avg_degree:.2f}, slope {slope}")

    print(f"all products in {args.outdir}/ ({time.perf_counter() - start:.0f}s total)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
