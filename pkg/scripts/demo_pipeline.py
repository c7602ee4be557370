#!/usr/bin/env python3
"""End-to-end demo: generate a topology, build both trees for one request,
place diffusers for a few budgets, and show the resulting path sets."""

from __future__ import annotations

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from dnmtp.experiments import sample_request, sample_seed  # noqa: E402
from dnmtp.loads import load, materialize_paths  # noqa: E402
from dnmtp.solver import solve_dnmtp  # noqa: E402
from dnmtp.topology import average_degree, generate_waxman  # noqa: E402
from dnmtp.trees import build_shp_tree, build_stt_tree  # noqa: E402

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 10

g = generate_waxman(60, seed=seed)
print(f"topology: {g.n} nodes, {g.num_edges()} edges, avg degree {average_degree(g):.2f}")

req = sample_request(g, 6, sample_seed(seed, "demo", 0))
print(f"request: source {req.source}, destinations {sorted(req.destinations)}")

for name, builder in (("ShP", build_shp_tree), ("StT", build_stt_tree)):
    tree = builder(g, req)
    print(f"\n{name} tree: {len(tree.nodes)} nodes, {tree.num_arcs} arcs, "
          f"load without diffusers {load(tree, ())}")
    for k in (1, 2, 4):
        p = solve_dnmtp(tree, k)
        print(f"  k={k}: load {p.load}, diffusers {sorted(p.diffusers)}")
    best = solve_dnmtp(tree, 4)
    print(f"  paths with the k=4 placement:")
    for path in materialize_paths(tree, best.diffusers):
        print(f"    {' -> '.join(map(str, path))}")
