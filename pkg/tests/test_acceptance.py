"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s`. The statistical criteria
use the package's default experiment configuration (200-node topology,
5% precision at 95% confidence) and take a couple of minutes in total.
"""

from __future__ import annotations

import json
import random
import subprocess
import sys
import time
from contextlib import contextmanager

import pytest

from conftest import random_diffusers, random_multicast_tree
from dnmtp.experiments import (
    ExperimentConfig,
    _pool,
    estimate_cells,
    find_critical_points,
    gradient_vs_degree,
    sweep_destinations,
    sweep_diffusers,
)
from dnmtp.loads import all_windows, brute_force_optimal, load, saturating_diffusers
from dnmtp.solver import optimal_loads_by_budget, solve_dnmtp
from dnmtp.topology import generate_waxman
from dnmtp.trees import RootedTree
from test_loads import case_equation_window


@contextmanager
def criterion(num: int, name: str):
    try:
        yield
    except BaseException as exc:
        print(f"ACCEPTANCE C{num} ({name}): FAIL - {exc}")
        raise
    print(f"ACCEPTANCE C{num} ({name}): PASS")


@pytest.fixture(scope="module")
def corpus():
    rng = random.Random(20240)
    return [random_multicast_tree(rng) for _ in range(1000)]


@pytest.fixture(scope="module")
def default_cfg():
    return ExperimentConfig()


@pytest.fixture(scope="module")
def default_graph(default_cfg):
    return generate_waxman(
        default_cfg.n_nodes, default_cfg.alpha, default_cfg.beta, default_cfg.m, default_cfg.seed
    )


@pytest.fixture(scope="module")
def dest_table(default_graph, default_cfg):
    return sweep_destinations(default_graph, default_cfg)


@pytest.fixture(scope="module")
def diff_table(default_graph, default_cfg):
    return sweep_diffusers(default_graph, default_cfg, n_dest=20)


def test_c1_oracle_equivalence(corpus):
    with criterion(1, "oracle equivalence on 1000 random trees"):
        rng = random.Random(1)
        start = time.perf_counter()
        for tree in corpus:
            k = rng.randint(0, 3)
            _, expected = brute_force_optimal(tree, k)
            placement = solve_dnmtp(tree, k)
            assert placement.load == expected
            assert load(tree, placement.diffusers) == expected
            assert len(placement.diffusers) <= k
        elapsed = time.perf_counter() - start
        assert elapsed < 30.0, f"took {elapsed:.1f}s"


def test_c2_window_arithmetic(corpus):
    with criterion(2, "per-arc window case equations on 500 placements"):
        rng = random.Random(2)
        start = time.perf_counter()
        for tree in corpus[:500]:
            diff = random_diffusers(rng, tree, 4)
            windows = all_windows(tree, diff)
            for u in tree.nodes:
                if u == tree.root:
                    continue
                assert windows[u] == case_equation_window(tree, diff, u, windows)
        elapsed = time.perf_counter() - start
        assert elapsed < 10.0, f"took {elapsed:.1f}s"


def test_c3_bounds_and_saturation(corpus):
    with criterion(3, "load bounds and saturating placement"):
        rng = random.Random(3)
        for tree in corpus[:500]:
            diff = random_diffusers(rng, tree, 4)
            value = load(tree, diff)
            assert tree.num_arcs <= value <= sum(tree.depth[r] for r in tree.destinations)
            assert load(tree, saturating_diffusers(tree)) == tree.num_arcs


def test_c4_destination_sweep_shp(dest_table):
    with criterion(4, "ShP reduction at 32 destinations, 4 diffusers"):
        reduction = dest_table.reduction("ShP", 32, 4)
        for r in (2, 4, 8, 12, 16, 20, 24, 28, 32):
            assert dest_table.reduction("ShP", r, 4) > 0
        assert dest_table.reduction("ShP", 32, 4) > dest_table.reduction("ShP", 8, 4)
        assert not dest_table.any_capped()
        assert 0.21 <= reduction <= 0.41, f"reduction {reduction:.3f} outside 0.31 +/- 0.10"


def test_c5_destination_sweep_stt(dest_table):
    with criterion(5, "StT reduction at 16 destinations, 4 diffusers"):
        reduction = dest_table.reduction("StT", 16, 4)
        for r in (2, 4, 8, 12, 16, 20, 24, 28, 32):
            assert dest_table.reduction("StT", r, 4) > 0
        assert dest_table.reduction("StT", 32, 4) > dest_table.reduction("StT", 8, 4)
        assert 0.55 <= reduction <= 0.75, f"reduction {reduction:.3f} outside 0.65 +/- 0.10"


def test_c6_diffuser_sweep_reductions(diff_table):
    with criterion(6, "reductions at 20 destinations for k=3 and k=15"):
        measured = {
            ("ShP", 3): diff_table.reduction("ShP", 20, 3),
            ("ShP", 15): diff_table.reduction("ShP", 20, 15),
            ("StT", 3): diff_table.reduction("StT", 20, 3),
            ("StT", 15): diff_table.reduction("StT", 20, 15),
        }
        bands = {
            ("ShP", 3): (0.12, 0.28),
            ("ShP", 15): (0.30, 0.50),
            ("StT", 3): (0.50, 0.70),
            ("StT", 15): (0.67, 0.83),
        }
        report = ", ".join(
            f"{b} k={k}: {measured[(b, k)]:.3f} (band {lo:.2f}-{hi:.2f})"
            for (b, k), (lo, hi) in bands.items()
        )
        print(f"  measured: {report}")
        print(
            "  diagnostic: source-charged accounting gives ShP k=3 reduction "
            f"{_charged_reduction_shp_k3():.3f}"
        )
        failures = [
            f"{b} k={k} reduction {measured[(b, k)]:.3f} outside [{lo:.2f}, {hi:.2f}]"
            for (b, k), (lo, hi) in bands.items()
            if not (lo <= measured[(b, k)] <= hi)
        ]
        assert not failures, "; ".join(failures)


def _charged_reduction_shp_k3(samples: int = 256) -> float:
    # replays the diffuser sweep's request stream and evaluates the variant
    # accounting in which the source consumes one budget unit plus a feed
    # arc; reduction then compares 1 + opt(2) against the no-diffuser load
    from dnmtp.experiments import sample_request, sample_seed
    from dnmtp.trees import build_shp_tree

    cfg = ExperimentConfig()
    g = generate_waxman(cfg.n_nodes, cfg.alpha, cfg.beta, cfg.m, cfg.seed)
    base = charged = 0
    for i in range(samples):
        req = sample_request(g, 20, sample_seed(cfg.seed, "diff:20", i))
        loads = optimal_loads_by_budget(build_shp_tree(g, req), 2)
        base += loads[0]
        charged += 1 + loads[2]
    return 1.0 - charged / base


def test_c7_critical_points(default_graph, default_cfg):
    with criterion(7, "critical points, slope, and degree trend"):
        study = find_critical_points(default_graph, default_cfg)
        # hard fallback: crossings exist and move outward with the budget
        assert study.points, "no ShP/StT crossing found at any budget"
        rs = [r for _, r in study.points]
        assert all(b > a for a, b in zip(rs, rs[1:])), f"r_star not increasing: {study.points}"

        r4 = dict(study.points).get(4)
        r4_primary = r4 is not None and 16 <= r4 <= 20
        slope_primary = study.slope is not None and 3.5 <= study.slope <= 6.5

        degree_rows = gradient_vs_degree(default_cfg, [2, 3, 4])
        slopes = [row.slope for row in degree_rows]
        assert all(s is not None for s in slopes)
        assert all(b <= a for a, b in zip(slopes, slopes[1:])), f"slopes not non-increasing: {slopes}"

        notes = []
        if not r4_primary:
            notes.append(f"r_star(4)={r4} outside 18 +/- 2, trend fallback holds")
        if not slope_primary:
            notes.append(f"slope={study.slope:.2f} outside 5 +/- 1.5, trend fallback holds")
        print(f"  points={study.points} slope={study.slope:.2f} degree_slopes="
              f"{[round(s, 2) for s in slopes]}")
        if notes:
            print("  " + "; ".join(notes))


def test_c8_solver_performance():
    with criterion(8, "solve 200-node trees with 32 destinations, k=15, under 1s"):
        rng = random.Random(88)
        for _ in range(3):
            tree = _grow_tree(rng, n=200, leaves=32)
            assert len(tree.nodes) == 200
            assert len(tree.destinations) == 32
            start = time.perf_counter()
            placement = solve_dnmtp(tree, 15)
            elapsed = time.perf_counter() - start
            assert load(tree, placement.diffusers) == placement.load
            assert elapsed < 1.0, f"solve took {elapsed:.3f}s"


def _grow_tree(rng: random.Random, n: int, leaves: int) -> RootedTree:
    parent: dict[int, int] = {}
    current_leaves = {0}
    for i in range(1, n):
        if len(current_leaves) < leaves and rng.random() < 0.4:
            p = rng.choice(sorted(parent) + [0])
        else:
            p = rng.choice(sorted(current_leaves))
        parent[i] = p
        current_leaves.discard(p)
        current_leaves.add(i)
    dests = set(current_leaves)
    internals = [u for u in range(1, n) if u not in dests]
    for u in internals:
        if len(dests) >= leaves:
            break
        dests.add(u)
    return RootedTree(0, parent, dests)


def _run_cli(*args) -> subprocess.CompletedProcess:
    return subprocess.run(
        [sys.executable, "-m", "dnmtp.cli", *args], capture_output=True, text=True
    )


def test_c9_determinism(tmp_path):
    with criterion(9, "bit-identical reruns with 1 and 8 workers"):
        # commands: generate, build, solve
        outputs = []
        for rep in ("x", "y"):
            gpath = tmp_path / f"g{rep}.json"
            tpath = tmp_path / f"t{rep}.json"
            assert _run_cli("gen-graph", "--nodes", "60", "--seed", "12", "--out", str(gpath)).returncode == 0
            assert _run_cli(
                "build-tree", "--graph", str(gpath), "--method", "stt",
                "--source", "1", "--ndest", "8", "--seed", "5", "--out", str(tpath),
            ).returncode == 0
            solve = _run_cli("solve", "--tree", str(tpath), "--k", "3")
            assert solve.returncode == 0
            outputs.append((gpath.read_bytes(), tpath.read_bytes(), solve.stdout))
        assert outputs[0] == outputs[1]

        # experiments: same CSV bytes for any worker count
        g = generate_waxman(60, 0.15, 0.2, 2, seed=12)
        csvs = []
        for workers in (1, 8, 1):
            cfg = ExperimentConfig(
                n_nodes=60, seed=12, dest_counts=(4, 8), precision=0.1,
                min_samples=2, max_samples=2048, workers=workers,
            )
            csvs.append(sweep_destinations(g, cfg).to_csv())
        assert csvs[0] == csvs[1] == csvs[2]

        # paired estimation reruns are identical end to end
        cfg = ExperimentConfig(n_nodes=60, seed=12, precision=0.1, min_samples=2)
        with _pool(cfg) as executor:
            a = estimate_cells([g], 6, [("ShP", 2), ("StT", 2)], cfg, "c9", executor)
            b = estimate_cells([g], 6, [("ShP", 2), ("StT", 2)], cfg, "c9", executor)
        assert a == b

        # critical-point scan: same products regardless of worker count
        crit_csvs = []
        for workers in (1, 8):
            cfg = ExperimentConfig(
                n_nodes=60, seed=12, precision=0.15, min_samples=2,
                critical_ks=(1, 2), critical_r_max=10, workers=workers,
            )
            study = find_critical_points(g, cfg)
            crit_csvs.append((study.to_csv(), study.slope))
        assert crit_csvs[0] == crit_csvs[1]


def test_c1_extension_extraction_consistency(corpus):
    # companion to C1: the reconstructed set is always within budget and
    # re-evaluates to the reported optimum for larger budgets too
    rng = random.Random(4)
    for tree in corpus[:200]:
        k = rng.randint(0, 6)
        placement = solve_dnmtp(tree, k)
        assert len(placement.diffusers) <= k
        assert load(tree, placement.diffusers) == placement.load
        curve = optimal_loads_by_budget(tree, k)
        assert curve[k] == placement.load
