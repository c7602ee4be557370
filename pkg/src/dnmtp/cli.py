"""Command-line front end: graph generation, tree building, solving,
evaluation, and the experiment sweeps.

Exit codes: 0 success, 1 validation error (bad input files, failed oracle
check), 2 usage error. The DNMTP_SEED environment variable supplies a seed
when neither flag nor config file does.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys

from .experiments import (
    ExperimentConfig,
    read_config_mapping,
    config_from_mapping,
    default_graphs,
    degree_rows_to_csv,
    find_critical_points,
    gradient_vs_degree,
    sweep_destinations,
    sweep_diffusers,
)
from .fileio import atomic_write_text
from .loads import BRUTE_FORCE_NODE_LIMIT, brute_force_optimal, load, materialize_paths
from .solver import dump_tables_csv, solve_dnmtp
from .topology import (
    TopologyError,
    average_degree,
    generate_waxman,
    graph_from_json,
    graph_to_json,
)
from .trees import TreeError, build_shp_tree, build_stt_tree, tree_from_json, tree_to_json, validate_tree
from .topology import MulticastRequest


def _env_seed() -> int | None:
    raw = os.environ.get("DNMTP_SEED")
    return None if raw is None else int(raw)


def _resolve_seed(flag_value: int | None, fallback: int = 0) -> int:
    if flag_value is not None:
        return flag_value
    env = _env_seed()
    return fallback if env is None else env


def _read(path: str) -> str:
    with open(path) as fh:
        return fh.read()


def _load_file(path: str, parse):
    try:
        return parse(_read(path))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def _parse_id_list(text: str) -> list[int]:
    return [int(x) for x in text.replace(" ", "").split(",") if x]


def cmd_gen_graph(args) -> int:
    g = generate_waxman(
        args.nodes, args.alpha, args.beta, args.m, _resolve_seed(args.seed)
    )
    atomic_write_text(args.out, graph_to_json(g))
    print(f"graph: n={g.n} edges={g.num_edges()} avg_degree={average_degree(g):.4g} -> {args.out}")
    return 0


def cmd_build_tree(args) -> int:
    g = _load_file(args.graph, graph_from_json)
    if (args.dest is None) == (args.ndest is None):
        raise UsageError("give exactly one of --dest or --ndest")
    if args.dest is not None:
        dests = frozenset(_parse_id_list(args.dest))
    else:
        rng = random.Random(_resolve_seed(args.seed))
        pool = [u for u in range(g.n) if u != args.source]
        if args.ndest >= g.n:
            raise TopologyError(f"cannot draw {args.ndest} destinations from {g.n - 1} nodes")
        dests = frozenset(rng.sample(pool, args.ndest))
    req = MulticastRequest(args.source, dests)
    builder = build_shp_tree if args.method == "shp" else build_stt_tree
    tree = builder(g, req)
    violation = validate_tree(tree, req, g)
    if violation is not None:
        raise TreeError(f"built tree failed validation: {violation}")
    atomic_write_text(args.out, tree_to_json(tree))
    print(
        f"tree: method={args.method} root={tree.root} nodes={len(tree.nodes)} "
        f"arcs={tree.num_arcs} destinations={len(dests)} "
        f"load_no_diffusers={load(tree, ())} -> {args.out}"
    )
    return 0


def cmd_solve(args) -> int:
    tree = _load_file(args.tree, tree_from_json)
    placement = solve_dnmtp(tree, args.k, keep_tables=args.dump_tables is not None)
    payload = {
        "k": args.k,
        "load": placement.load,
        "diffusers": sorted(placement.diffusers),
    }
    if args.compat_root:
        payload["root_charged_load"] = placement.root_charged_load
    if args.dump_tables is not None:
        atomic_write_text(args.dump_tables, dump_tables_csv(placement.tables))
    text = json.dumps(payload)
    if args.out:
        atomic_write_text(args.out, text)
    print(text)
    if args.oracle:
        if len(tree.nodes) > BRUTE_FORCE_NODE_LIMIT:
            print(
                f"oracle check impossible: {len(tree.nodes)} nodes exceeds "
                f"the brute-force limit of {BRUTE_FORCE_NODE_LIMIT}",
                file=sys.stderr,
            )
            return 1
        _, oracle_load = brute_force_optimal(tree, args.k)
        if oracle_load != placement.load:
            print(
                f"oracle mismatch: solver={placement.load} brute-force={oracle_load}",
                file=sys.stderr,
            )
            return 1
        print(f"oracle check passed: load {oracle_load}", file=sys.stderr)
    return 0


def cmd_eval(args) -> int:
    tree = _load_file(args.tree, tree_from_json)
    diffusers = frozenset(_parse_id_list(args.diffusers)) if args.diffusers else frozenset()
    value = load(tree, diffusers)
    payload = {"load": value, "diffusers": sorted(diffusers)}
    if args.paths:
        payload["paths"] = materialize_paths(tree, diffusers)
    if args.json or args.out:
        text = json.dumps(payload)
        if args.out:
            atomic_write_text(args.out, text)
        if args.json:
            print(text)
    if not args.json:
        print(f"load: {value} (diffusers: {','.join(map(str, sorted(diffusers))) or 'none'})")
    return 0


_CONFIG_FLAGS = [
    ("n_nodes", int),
    ("alpha", float),
    ("beta", float),
    ("m", int),
    ("seed", int),
    ("dest_counts", str),
    ("k_values", str),
    ("dest_sweep_k", int),
    ("precision", float),
    ("confidence", float),
    ("min_samples", int),
    ("max_samples", int),
    ("workers", int),
    ("n_topologies", int),
    ("critical_ks", str),
    ("critical_r_min", int),
    ("critical_r_max", int),
]


def _experiment_config(args) -> ExperimentConfig:
    file_map = read_config_mapping(args.config) if args.config else {}
    cfg = config_from_mapping(file_map)
    overrides = {}
    for name, _ in _CONFIG_FLAGS:
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    if "seed" not in overrides and "seed" not in file_map:
        env = _env_seed()
        if env is not None:
            overrides["seed"] = env
    return config_from_mapping({k: str(v) for k, v in overrides.items()}, cfg)


def _experiment_graphs(args, cfg: ExperimentConfig):
    if args.graph:
        return [_load_file(path, graph_from_json) for path in args.graph]
    return default_graphs(cfg)


def _emit_table(table, out_path: str | None) -> None:
    csv = table.to_csv()
    if out_path:
        atomic_write_text(out_path, csv)
        print(f"wrote {out_path} ({len(table.rows)} rows)")
    else:
        sys.stdout.write(csv)
    if table.any_capped():
        print("warning: some cells hit max_samples before reaching the precision target", file=sys.stderr)


def cmd_experiment(args) -> int:
    cfg = _experiment_config(args)
    if args.subcommand == "degree":
        rows = gradient_vs_degree(cfg, _parse_id_list(args.m_list))
        csv = degree_rows_to_csv(rows)
        if args.out:
            atomic_write_text(args.out, csv)
            print(f"wrote {args.out} ({len(rows)} rows)")
        else:
            sys.stdout.write(csv)
        return 0
    graphs = _experiment_graphs(args, cfg)
    if args.subcommand == "sweep-dest":
        _emit_table(sweep_destinations(graphs, cfg), args.out)
    elif args.subcommand == "sweep-k":
        _emit_table(sweep_diffusers(graphs, cfg, n_dest=args.ndest), args.out)
    elif args.subcommand == "critical":
        study = find_critical_points(graphs, cfg)
        csv = study.to_csv()
        if args.out:
            atomic_write_text(args.out, csv)
            print(f"wrote {args.out} ({len(study.points)} points)")
        else:
            sys.stdout.write(csv)
        if study.slope is None:
            print("slope: undefined (fewer than two crossings found)")
        else:
            print(f"slope: {study.slope:.4f}")
    return 0


class UsageError(Exception):
    pass


def _add_experiment_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--graph", action="append", help="graph JSON file (repeatable)")
    parser.add_argument("--out", help="output CSV path (default: stdout)")
    for name, typ in _CONFIG_FLAGS:
        flag = "--" + name.replace("_", "-")
        parser.add_argument(flag, dest=name, type=typ, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dnmtp",
        description="Multicast trees and optimal diffusing-node placement",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-graph", help="generate a Waxman topology")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.15)
    p.add_argument("--beta", type=float, default=0.2)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_graph)

    p = sub.add_parser("build-tree", help="build a multicast tree from a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--method", choices=("shp", "stt"), required=True)
    p.add_argument("--source", type=int, required=True)
    p.add_argument("--dest", help="comma-separated destination ids")
    p.add_argument("--ndest", type=int, help="number of random destinations")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_tree)

    p = sub.add_parser("solve", help="optimally place diffusing nodes in a tree")
    p.add_argument("--tree", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--oracle", action="store_true", help="verify against brute force")
    p.add_argument("--compat-root", action="store_true",
                   help="also report the load with the source charged as a diffuser")
    p.add_argument("--dump-tables", help="write the DP tables as CSV")
    p.add_argument("--out", help="write the placement JSON to a file too")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("eval", help="evaluate the load of a given diffuser set")
    p.add_argument("--tree", required=True)
    p.add_argument("--diffusers", default="", help="comma-separated node ids")
    p.add_argument("--paths", action="store_true", help="include the explicit path set")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("experiment", help="statistical sweeps")
    esub = p.add_subparsers(dest="subcommand", required=True)
    for name, helptext in (
        ("sweep-dest", "mean loads over destination counts"),
        ("sweep-k", "mean loads over diffuser budgets"),
        ("critical", "crossing points where ShP beats StT"),
        ("degree", "critical-line slope versus average degree"),
    ):
        q = esub.add_parser(name, help=helptext)
        _add_experiment_flags(q)
        if name == "sweep-k":
            q.add_argument("--ndest", type=int, default=20)
        if name == "degree":
            q.add_argument("--m-list", default="2,3,4")
        q.set_defaults(func=cmd_experiment)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "k", None) is not None and args.k < 0:
        parser.error("--k must be non-negative")
    if getattr(args, "nodes", None) is not None and args.nodes < 1:
        parser.error("--nodes must be at least 1")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
        return 2  # unreachable; parser.error exits
    except json.JSONDecodeError as exc:
        print(f"error: line {exc.lineno}, column {exc.colno}: {exc.msg}", file=sys.stderr)
        return 1
    except (TopologyError, TreeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
