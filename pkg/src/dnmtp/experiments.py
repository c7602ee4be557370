"""Statistical comparison of tree builders with and without diffusing nodes.

Each cell of a sweep estimates the mean tree load over random requests
(source uniform, destinations uniform without replacement) until the
confidence-interval half-width drops below ``precision * mean`` or the
sample cap is hit. All variants of a cell group (builder x budget) are
evaluated on the same request stream, which makes reductions and
builder-vs-builder differences paired comparisons.

Sampling is reproducible and independent of the worker count: sample i of a
group draws its request from a seed derived from (config seed, group tag,
i), work proceeds in fixed-size batches, and per-variant sums are integers
accumulated in sample order.
"""

from __future__ import annotations

import hashlib
import math
import random
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, fields, replace

from scipy import stats as _stats

from .loads import load as evaluate_load
from .solver import optimal_loads_by_budget
from .topology import Graph, MulticastRequest, average_degree, generate_waxman, hop_distances
from .trees import build_shp_tree, build_stt_tree

BUILDERS = {"ShP": build_shp_tree, "StT": build_stt_tree}
BATCH_SIZE = 64  # stopping rule is checked at batch boundaries only


@dataclass(frozen=True)
class ExperimentConfig:
    """Knobs of the experiment harness; every field maps to a config-file key."""

    n_nodes: int = 200
    alpha: float = 0.15
    beta: float = 0.2
    m: int = 2
    seed: int = 10
    dest_counts: tuple[int, ...] = (2, 4, 8, 12, 16, 20, 24, 28, 32)
    k_values: tuple[int, ...] = tuple(range(1, 16))
    dest_sweep_k: int = 4
    precision: float = 0.05
    confidence: float = 0.95
    min_samples: int = 20
    max_samples: int = 20000
    workers: int = 1
    n_topologies: int = 1
    critical_ks: tuple[int, ...] = (1, 2, 3, 4)
    critical_r_min: int = 2
    critical_r_max: int = 45

    def validate(self) -> None:
        if not (0.0 < self.precision < 1.0):
            raise ValueError(f"precision must be in (0, 1), got {self.precision}")
        if not (0.5 < self.confidence < 1.0):
            raise ValueError(f"confidence must be in (0.5, 1), got {self.confidence}")
        if self.min_samples < 2:
            raise ValueError(f"min_samples must be >= 2, got {self.min_samples}")
        if self.max_samples < self.min_samples:
            raise ValueError("max_samples must be >= min_samples")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.n_topologies < 1:
            raise ValueError(f"n_topologies must be >= 1, got {self.n_topologies}")


_TUPLE_FIELDS = {"dest_counts", "k_values", "critical_ks"}
_FLOAT_FIELDS = {"alpha", "beta", "precision", "confidence"}


def config_from_mapping(mapping: dict[str, str], base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Build a config from string key=value pairs (file or CLI overrides)."""
    cfg = base or ExperimentConfig()
    known = {f.name for f in fields(ExperimentConfig)}
    updates = {}
    for key, raw in mapping.items():
        if key not in known:
            raise ValueError(f"unknown config key {key!r}")
        if key in _TUPLE_FIELDS:
            updates[key] = tuple(int(x) for x in str(raw).replace(" ", "").split(",") if x)
        elif key in _FLOAT_FIELDS:
            updates[key] = float(raw)
        else:
            updates[key] = int(raw)
    cfg = replace(cfg, **updates)
    cfg.validate()
    return cfg


def read_config_mapping(path: str) -> dict[str, str]:
    mapping: dict[str, str] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line.rstrip()!r}")
            key, value = text.split("=", 1)
            mapping[key.strip()] = value.strip()
    return mapping


def config_from_file(path: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    return config_from_mapping(read_config_mapping(path), base)


@dataclass(frozen=True)
class EstimateRow:
    """One estimated cell; hit_cap marks estimates stopped by max_samples."""

    builder: str
    r: int
    k: int
    mean_load: float
    ci_half: float
    n_samples: int
    hit_cap: bool = False


def sample_seed(seed: int, tag: str, index: int) -> int:
    """Stable per-sample seed; independent of platform and process layout."""
    digest = hashlib.blake2b(f"{seed}:{tag}:{index}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def sample_request(g: Graph, n_dest: int, seed: int) -> MulticastRequest:
    rng = random.Random(seed)
    source = rng.randrange(g.n)
    pool = list(range(g.n))
    pool.pop(source)
    return MulticastRequest(source, frozenset(rng.sample(pool, n_dest)))


_GRAPH_MEMO: dict[tuple, Graph] = {}


def _intern(g: Graph) -> Graph:
    # Workers receive pickled graph copies without BFS memos; reuse one warm
    # instance per distinct structure so the memos survive across chunks.
    return _GRAPH_MEMO.setdefault(g.structure_key(), g)


def _eval_sample(g: Graph, n_dest: int, variants: list[tuple[str, int]], seed: int) -> list[int]:
    req = sample_request(g, n_dest, seed)
    k_max: dict[str, int] = {}
    for builder, k in variants:
        k_max[builder] = max(k, k_max.get(builder, 0))
    per_builder: dict[str, list[int]] = {}
    for builder, km in k_max.items():
        tree = BUILDERS[builder](g, req)
        if km == 0:
            loads = [evaluate_load(tree, ())]
        else:
            loads = optimal_loads_by_budget(tree, km)
        if builder == "ShP":
            dist = hop_distances(g, req.source)
            expect = sum(dist[r] for r in req.destinations)
            if loads[0] != expect:
                raise RuntimeError(
                    f"ShP load {loads[0]} != sum of hop distances {expect} (seed {seed})"
                )
        if loads[0] < tree.num_arcs:
            raise RuntimeError(f"load {loads[0]} below arc count {tree.num_arcs} (seed {seed})")
        for a, b in zip(loads, loads[1:]):
            if b > a:
                raise RuntimeError(f"load increased with budget: {loads} (seed {seed})")
        per_builder[builder] = loads
    return [per_builder[builder][k] for builder, k in variants]


def _eval_chunk(args) -> list[list[int]]:
    graphs, n_dest, variants, seed, tag, lo, hi = args
    graphs = [_intern(g) for g in graphs]
    out = []
    for i in range(lo, hi):
        g = graphs[i % len(graphs)]
        out.append(_eval_sample(g, n_dest, variants, sample_seed(seed, tag, i)))
    return out


def _half_width(n: int, total: int, total_sq: int, confidence: float) -> float:
    if n < 2:
        return math.inf
    mean = total / n
    var = (total_sq - n * mean * mean) / (n - 1)
    if var <= 0.0:
        return 0.0
    if n < 30:
        q = float(_stats.t.ppf(0.5 + confidence / 2.0, n - 1))
    else:
        q = float(_stats.norm.ppf(0.5 + confidence / 2.0))
    return q * math.sqrt(var / n)


@contextmanager
def _pool(cfg: ExperimentConfig):
    if cfg.workers <= 1:
        yield None
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as executor:
            yield executor


def estimate_cells(
    graphs: list[Graph],
    n_dest: int,
    variants: list[tuple[str, int]],
    cfg: ExperimentConfig,
    tag: str,
    executor=None,
) -> list[EstimateRow]:
    """Estimate all variants on one shared request stream until every
    variant meets the precision target (or max_samples). Returns rows in
    variant order."""
    cfg.validate()
    for g in graphs:
        if n_dest >= g.n:
            raise ValueError(f"cannot draw {n_dest} destinations from {g.n - 1} candidates")
    for builder, k in variants:
        if builder not in BUILDERS:
            raise ValueError(f"unknown builder {builder!r}")
        if k < 0:
            raise ValueError(f"budget must be non-negative, got {k}")
    sums = [0] * len(variants)
    sqs = [0] * len(variants)
    n = 0
    hit_cap = False
    while True:
        hi = min(n + BATCH_SIZE, cfg.max_samples)
        if executor is None:
            results = _eval_chunk((graphs, n_dest, variants, cfg.seed, tag, n, hi))
        else:
            bounds = []
            step = max(1, (hi - n + cfg.workers - 1) // cfg.workers)
            lo = n
            while lo < hi:
                bounds.append((lo, min(lo + step, hi)))
                lo = min(lo + step, hi)
            futures = [
                executor.submit(_eval_chunk, (graphs, n_dest, variants, cfg.seed, tag, a, b))
                for a, b in bounds
            ]
            results = [row for fut in futures for row in fut.result()]
        for row in results:
            for idx, value in enumerate(row):
                sums[idx] += value
                sqs[idx] += value * value
        n = hi
        if n >= cfg.min_samples:
            widths = [_half_width(n, sums[i], sqs[i], cfg.confidence) for i in range(len(variants))]
            if all(w <= cfg.precision * (sums[i] / n) for i, w in enumerate(widths)):
                break
        if n >= cfg.max_samples:
            hit_cap = True
            break
    rows = []
    for idx, (builder, k) in enumerate(variants):
        rows.append(
            EstimateRow(
                builder=builder,
                r=n_dest,
                k=k,
                mean_load=sums[idx] / n,
                ci_half=_half_width(n, sums[idx], sqs[idx], cfg.confidence),
                n_samples=n,
                hit_cap=hit_cap,
            )
        )
    return rows


def estimate_mean_load(
    g: Graph, builder: str, n_dest: int, k: int, cfg: ExperimentConfig
) -> EstimateRow:
    """Single-cell estimate; tag is cell:<builder>:<r>:<k> for replayability."""
    tag = f"cell:{builder}:{n_dest}:{k}"
    with _pool(cfg) as executor:
        return estimate_cells([g], n_dest, [(builder, k)], cfg, tag, executor)[0]


class ResultTable:
    """Sweep rows plus the derived paired metrics and the fixed CSV format."""

    def __init__(self, rows: list[EstimateRow]):
        self.rows = list(rows)
        self._by_cell = {(row.builder, row.r, row.k): row for row in self.rows}

    def mean(self, builder: str, r: int, k: int) -> float | None:
        row = self._by_cell.get((builder, r, k))
        return None if row is None else row.mean_load

    def reduction(self, builder: str, r: int, k: int) -> float | None:
        """Relative load reduction of k diffusers against the k=0 baseline."""
        base = self.mean(builder, r, 0)
        mean = self.mean(builder, r, k)
        if base is None or mean is None:
            return None
        return 1.0 - mean / base

    def diff_pct(self, r: int, k: int) -> float | None:
        """ShP-minus-StT weight difference as a percentage of the StT weight."""
        shp = self.mean("ShP", r, k)
        stt = self.mean("StT", r, k)
        if shp is None or stt is None:
            return None
        return 100.0 * (shp - stt) / stt

    def any_capped(self) -> bool:
        return any(row.hit_cap for row in self.rows)

    def to_csv(self) -> str:
        lines = ["builder,r,k,mean_load,ci_half,n_samples,reduction,diff_pct"]
        for row in self.rows:
            reduction = self.reduction(row.builder, row.r, row.k)
            diff = self.diff_pct(row.r, row.k)
            lines.append(
                f"{row.builder},{row.r},{row.k},{row.mean_load:.6f},{row.ci_half:.6f},"
                f"{row.n_samples},"
                f"{'' if reduction is None else format(reduction, '.6f')},"
                f"{'' if diff is None else format(diff, '.6f')}"
            )
        return "\n".join(lines) + "\n"


def _graph_list(g: Graph | list[Graph], cfg: ExperimentConfig) -> list[Graph]:
    # explicit graphs are used as given; n_topologies only drives generation
    graphs = [g] if isinstance(g, Graph) else list(g)
    if not graphs:
        raise ValueError("no topology supplied")
    return graphs


def default_graphs(cfg: ExperimentConfig) -> list[Graph]:
    """The sweep topologies implied by the config's Waxman parameters."""
    return [
        generate_waxman(cfg.n_nodes, cfg.alpha, cfg.beta, cfg.m, cfg.seed + t)
        for t in range(cfg.n_topologies)
    ]


def sweep_destinations(g: Graph | list[Graph], cfg: ExperimentConfig) -> ResultTable:
    """Mean loads per builder over the destination counts, with and without
    dest_sweep_k diffusers."""
    graphs = _graph_list(g, cfg)
    if not cfg.dest_counts:
        raise ValueError("dest_counts is empty")
    variants = [(b, k) for b in ("ShP", "StT") for k in (0, cfg.dest_sweep_k)]
    rows: list[EstimateRow] = []
    with _pool(cfg) as executor:
        for r in cfg.dest_counts:
            rows.extend(estimate_cells(graphs, r, variants, cfg, f"dest:{r}", executor))
    return ResultTable(rows)


def sweep_diffusers(g: Graph | list[Graph], cfg: ExperimentConfig, n_dest: int = 20) -> ResultTable:
    """Mean loads per builder as the diffuser budget grows, at fixed |R|."""
    graphs = _graph_list(g, cfg)
    if not cfg.k_values:
        raise ValueError("k_values is empty")
    ks = [0] + [k for k in cfg.k_values if k != 0]
    variants = [(b, k) for b in ("ShP", "StT") for k in ks]
    with _pool(cfg) as executor:
        rows = estimate_cells(graphs, n_dest, variants, cfg, f"diff:{n_dest}", executor)
    return ResultTable(rows)


@dataclass
class CriticalStudy:
    """Per-budget crossing points where ShP trees become lighter than StT."""

    points: list[tuple[int, int]]  # (k, r_star)
    slope: float | None
    rows: list[EstimateRow]

    def to_csv(self) -> str:
        lines = ["k,r_star"]
        lines.extend(f"{k},{r}" for k, r in self.points)
        return "\n".join(lines) + "\n"


def _fit_slope(points: list[tuple[int, int]]) -> float | None:
    if len(points) < 2:
        return None
    n = len(points)
    mx = sum(p[0] for p in points) / n
    my = sum(p[1] for p in points) / n
    sxx = sum((p[0] - mx) ** 2 for p in points)
    if sxx == 0:
        return None
    return sum((p[0] - mx) * (p[1] - my) for p in points) / sxx


def find_critical_points(
    g: Graph | list[Graph], cfg: ExperimentConfig, tag_prefix: str = "crit"
) -> CriticalStudy:
    """Scan |R| upward per budget until the mean ShP load undercuts StT.

    Budgets with no crossing inside [critical_r_min, critical_r_max] yield
    no point and are excluded from the least-squares slope fit.
    """
    graphs = _graph_list(g, cfg)
    points: list[tuple[int, int]] = []
    all_rows: list[EstimateRow] = []
    with _pool(cfg) as executor:
        for k in cfg.critical_ks:
            for r in range(max(2, cfg.critical_r_min), cfg.critical_r_max + 1):
                cells = estimate_cells(
                    graphs, r, [("ShP", k), ("StT", k)], cfg, f"{tag_prefix}:{k}:{r}", executor
                )
                all_rows.extend(cells)
                if cells[0].mean_load < cells[1].mean_load:
                    points.append((k, r))
                    break
    return CriticalStudy(points=points, slope=_fit_slope(points), rows=all_rows)


@dataclass
class DegreeRow:
    m: int
    avg_degree: float
    slope: float | None


def gradient_vs_degree(cfg: ExperimentConfig, m_values: list[int]) -> list[DegreeRow]:
    """Critical-line slope for one generated topology per links-per-node value."""
    out = []
    for m in m_values:
        g = generate_waxman(cfg.n_nodes, cfg.alpha, cfg.beta, m, cfg.seed)
        study = find_critical_points(g, cfg, tag_prefix=f"deg:{m}")
        out.append(DegreeRow(m=m, avg_degree=average_degree(g), slope=study.slope))
    out.sort(key=lambda row: row.avg_degree)
    return out


def degree_rows_to_csv(rows: list[DegreeRow]) -> str:
    lines = ["m,avg_degree,slope"]
    for row in rows:
        slope = "" if row.slope is None else format(row.slope, ".6f")
        lines.append(f"{row.m},{row.avg_degree:.6f},{slope}")
    return "\n".join(lines) + "\n"
