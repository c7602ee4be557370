"""Optimal diffuser placement on a multicast tree by bottom-up dynamic programming.

Every non-root node u carries two tables describing sub-solutions on the
arc entering u, summarized by the window (path number b, diffuser count d,
load). M[b][d] is the minimal window load with u not diffusing; L[d] is the
minimal window load with u diffusing (its path number is then forced to 1).
Path numbers run 1..|R^u| where R^u are the destinations in u's subtree;
budgets run 0..k. Window loads include the arc entering u, which carries b
paths (or one path for a diffuser).

Tables are built leaf-up: a leaf destination gets the unitary tables, a
node's first child is folded in together with the node's own arc and
destination flag, and every further child is merged by a knapsack over
budget and path-number splits. The root has no incoming arc and never
needs to diffuse (it originates paths for free), so it is finalized by a
budget knapsack over its children's best-per-budget loads instead of
getting tables of its own.

Each finite table entry stores the decision that produced it, so the
optimal diffuser set is reconstructed by walking decisions top-down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .loads import load as evaluate_load
from .trees import RootedTree

INFEASIBLE = math.inf


class ExtractionError(RuntimeError):
    """A decision record needed for placement reconstruction is missing."""


def min_plus(a: float, b: float) -> float:
    """Minimum ignoring the infeasible sentinel unless both carry it."""
    return a if a <= b else b


@dataclass
class NodeTables:
    """Per-node DP state: M matrix, L vector, inline decisions, column minima."""

    rcap: int
    M: list[list[float]]
    Mdec: list[list[tuple | None]]
    L: list[float]
    Ldec: list[tuple | None]
    col_min: list[float] = field(default_factory=list)
    col_arg: list[int] = field(default_factory=list)

    def finish(self) -> "NodeTables":
        k1 = len(self.L)
        self.col_min = [INFEASIBLE] * k1
        self.col_arg = [0] * k1
        for d in range(k1):
            best = INFEASIBLE
            arg = 0
            for b in range(1, self.rcap + 1):
                v = self.M[b][d]
                if v < best:
                    best = v
                    arg = b
            self.col_min[d] = best
            self.col_arg[d] = arg
        return self


def _empty_tables(rcap: int, k: int) -> NodeTables:
    return NodeTables(
        rcap=rcap,
        M=[[INFEASIBLE] * (k + 1) for _ in range(rcap + 1)],
        Mdec=[[None] * (k + 1) for _ in range(rcap + 1)],
        L=[INFEASIBLE] * (k + 1),
        Ldec=[None] * (k + 1),
    )


def leaf_tables(k: int) -> NodeTables:
    """Unitary tables of a leaf destination: M[1][0] = 1, L[1] = 1."""
    t = _empty_tables(1, k)
    t.M[1][0] = 1
    t.Mdec[1][0] = ("leaf",)
    if k >= 1:
        t.L[1] = 1
        t.Ldec[1] = ("leaf",)
    return t.finish()


def extend_single_child(child: NodeTables, u_is_dest: bool, k: int) -> NodeTables:
    """Tables for a node over its first child, charging the node's own arc.

    Diffusing at u resets the path number to one and consumes a budget unit:
    L[d] = 1 + best child value at budget d-1, child diffusing or not. Not
    diffusing, path number j costs j on u's arc on top of the child value at
    path number j' = j - (1 if u is a destination); a diffusing child is
    admitted whenever j' = 1.
    """
    rcap = child.rcap + (1 if u_is_dest else 0)
    t = _empty_tables(rcap, k)
    for d in range(1, k + 1):
        best = child.col_min[d - 1]
        dec = ("extL", "M", child.col_arg[d - 1])
        if d >= 2 and child.L[d - 1] < best:
            best = child.L[d - 1]
            dec = ("extL", "L", 0)
        if best < INFEASIBLE:
            t.L[d] = 1 + best
            t.Ldec[d] = dec
    off = 1 if u_is_dest else 0
    for j in range(1, rcap + 1):
        jp = j - off
        if jp < 1 or jp > child.rcap:
            continue
        row = child.M[jp]
        for d in range(k + 1):
            best = row[d]
            dec = ("extM", "M", jp)
            if jp == 1 and child.L[d] < best:
                best = child.L[d]
                dec = ("extM", "L", 0)
            if best < INFEASIBLE:
                t.M[j][d] = j + best
                t.Mdec[j][d] = dec
    return t.finish()


def merge_child(acc: NodeTables, child: NodeTables, k: int) -> NodeTables:
    """Fold one more child into a node's accumulated tables.

    Budgets and path numbers split between the two sides; the new child's
    paths also cross the node's own arc, hence the extra +j'' (or +1 when
    the child diffuses) on the accumulated load.
    """
    rcap = acc.rcap + child.rcap
    t = _empty_tables(rcap, k)
    L, Ldec = t.L, t.Ldec
    for dp in range(1, k + 1):
        a = acc.L[dp]
        if a == INFEASIBLE:
            continue
        for dq in range(k + 1 - dp):
            d = dp + dq
            cand = a + child.col_min[dq]
            if cand < L[d]:
                L[d] = cand
                Ldec[d] = ("mrgL", dp, "M", child.col_arg[dq])
            if dq >= 1:
                cand = a + child.L[dq]
                if cand < L[d]:
                    L[d] = cand
                    Ldec[d] = ("mrgL", dp, "L", 0)
    M, Mdec = t.M, t.Mdec
    for dp in range(k + 1):
        for jp in range(1, acc.rcap + 1):
            a = acc.M[jp][dp]
            if a == INFEASIBLE:
                continue
            for dq in range(k + 1 - dp):
                d = dp + dq
                crow_limit = child.rcap + 1
                for jq in range(1, crow_limit):
                    c = child.M[jq][dq]
                    if c == INFEASIBLE:
                        continue
                    j = jp + jq
                    cand = a + c + jq
                    if cand < M[j][d]:
                        M[j][d] = cand
                        Mdec[j][d] = ("mrgMM", jp, dp)
    for dp in range(k + 1):
        for jp in range(1, acc.rcap + 1):
            a = acc.M[jp][dp]
            if a == INFEASIBLE:
                continue
            j = jp + 1
            for dq in range(1, k + 1 - dp):
                c = child.L[dq]
                if c == INFEASIBLE:
                    continue
                d = dp + dq
                cand = a + c + 1
                if cand < M[j][d]:
                    M[j][d] = cand
                    Mdec[j][d] = ("mrgML", dp)
    return t.finish()


@dataclass
class SolveTables:
    """Full DP state kept for reconstruction, audit and table dumps."""

    k: int  # effective budget the tables were built with
    stages: dict[int, list[tuple[int | None, NodeTables]]]
    root_children: list[int]
    root_dec: list[list[tuple | None]]
    totals: list[float]  # minimal load at exactly j diffusers, j = 0..k

    def final(self, u: int) -> NodeTables:
        return self.stages[u][-1][1]


@dataclass
class Placement:
    """A chosen diffuser set with its load and optional audit tables."""

    diffusers: frozenset[int]
    load: int
    k: int
    root_charged_load: int | None = None
    tables: SolveTables | None = None


def _check_solvable(tree: RootedTree) -> None:
    for u in tree.leaves():
        if u not in tree.destinations:
            raise ValueError(f"leaf {u} is not a destination; tree is not a multicast tree")
    if tree.root in tree.destinations:
        raise ValueError("the root cannot be a destination")
    if not tree.destinations:
        raise ValueError("tree has no destinations")


def _build_tables(
    tree: RootedTree,
    k: int,
    children_order: dict[int, list[int]] | None = None,
) -> SolveTables:
    _check_solvable(tree)
    k_eff = min(k, len(tree.nodes) - 1)
    dests = tree.destinations
    stages: dict[int, list[tuple[int | None, NodeTables]]] = {}
    # bottom-up: decreasing height, smallest id first within a level
    for u in sorted(tree.nodes, key=lambda v: (-tree.depth[v], v)):
        if u == tree.root:
            continue
        kids = tree.children[u]
        if not kids:
            stages[u] = [(None, leaf_tables(k_eff))]
            continue
        if children_order is not None:
            kids = children_order[u]
        first = kids[0]
        acc = extend_single_child(stages[first][-1][1], u in dests, k_eff)
        stage_list: list[tuple[int | None, NodeTables]] = [(first, acc)]
        for w in kids[1:]:
            acc = merge_child(acc, stages[w][-1][1], k_eff)
            stage_list.append((w, acc))
        stages[u] = stage_list
    root_children = tree.children[tree.root]
    if children_order is not None:
        root_children = children_order[tree.root]
    totals, root_dec = finalize_root([stages[c][-1][1] for c in root_children], k_eff)
    return SolveTables(
        k=k_eff,
        stages=stages,
        root_children=list(root_children),
        root_dec=root_dec,
        totals=totals,
    )


def finalize_root(
    children_tables: list[NodeTables], k: int
) -> tuple[list[float], list[list[tuple | None]]]:
    """Minimal total load per exact budget, splitting the budget over the
    root's children; the root itself is charged neither budget nor load.

    Returns the totals vector and, per child, the decision (acc budget,
    child table kind, child path number) that produced each entry.
    """
    totals: list[float] = [0] + [INFEASIBLE] * k
    decs: list[list[tuple | None]] = []
    for tab in children_tables:
        new: list[float] = [INFEASIBLE] * (k + 1)
        dec: list[tuple | None] = [None] * (k + 1)
        for dp in range(k + 1):
            a = totals[dp]
            if a == INFEASIBLE:
                continue
            for dq in range(k + 1 - dp):
                d = dp + dq
                cand = a + tab.col_min[dq]
                if cand < new[d]:
                    new[d] = cand
                    dec[d] = (dp, "M", tab.col_arg[dq])
                if dq >= 1:
                    cand = a + tab.L[dq]
                    if cand < new[d]:
                        new[d] = cand
                        dec[d] = (dp, "L", 0)
        totals = new
        decs.append(dec)
    return totals, decs


def extract_placement(tree: RootedTree, tables: SolveTables, budget: int) -> frozenset[int]:
    """Reconstruct the diffuser set behind totals[budget] from decision records."""
    if not (0 <= budget <= tables.k) or tables.totals[budget] == INFEASIBLE:
        raise ExtractionError(f"no solution recorded at budget {budget}")
    diffusers: set[int] = set()
    work: list[tuple[int, str, int, int]] = []  # (node, kind, path number, budget)
    j = budget
    for f in range(len(tables.root_children) - 1, -1, -1):
        rec = tables.root_dec[f][j]
        if rec is None:
            raise ExtractionError(f"missing root decision for child index {f} at budget {j}")
        dp, kind, b = rec
        work.append((tables.root_children[f], kind, b, j - dp))
        j = dp
    while work:
        node, kind, b, d = work.pop()
        if kind == "L":
            diffusers.add(node)
        stage_list = tables.stages[node]
        for child_id, tab in reversed(stage_list[1:]):
            rec = tab.Ldec[d] if kind == "L" else tab.Mdec[b][d]
            if rec is None:
                raise ExtractionError(f"missing decision at node {node}")
            if rec[0] == "mrgL":
                _, dp, ckind, cb = rec
                work.append((child_id, ckind, cb, d - dp))
                d = dp
            elif rec[0] == "mrgMM":
                _, jp, dp = rec
                work.append((child_id, "M", b - jp, d - dp))
                b, d = jp, dp
            elif rec[0] == "mrgML":
                _, dp = rec
                work.append((child_id, "L", 0, d - dp))
                b, d = b - 1, dp
            else:
                raise ExtractionError(f"unexpected record {rec!r} at node {node}")
        first_child, tab = stage_list[0]
        rec = tab.Ldec[d] if kind == "L" else tab.Mdec[b][d]
        if rec is None:
            raise ExtractionError(f"missing decision at node {node}")
        if rec[0] == "leaf":
            continue
        if rec[0] == "extL":
            _, ckind, cb = rec
            work.append((first_child, ckind, cb, d - 1))
        elif rec[0] == "extM":
            _, ckind, cb = rec
            work.append((first_child, ckind, cb, d))
        else:
            raise ExtractionError(f"unexpected record {rec!r} at node {node}")
    return frozenset(diffusers)


def solve_dnmtp(
    tree: RootedTree,
    k: int,
    *,
    children_order: dict[int, list[int]] | None = None,
    keep_tables: bool = False,
) -> Placement:
    """Optimal placement of at most k diffusers minimizing the tree load.

    Runs in O(k^2 |R|^2 |V|). The returned placement is re-evaluated against
    the ground-truth load semantics before being handed back. The
    root_charged_load field reports the alternative accounting in which the
    source itself consumes one diffuser and a unit feed arc is counted
    (None when k = 0 leaves that variant infeasible).
    """
    if k < 0:
        raise ValueError(f"budget must be non-negative, got {k}")
    tables = _build_tables(tree, k, children_order)
    totals = tables.totals
    best_j = 0
    best = totals[0]
    for j in range(1, tables.k + 1):
        if totals[j] < best:
            best = totals[j]
            best_j = j
    diffusers = extract_placement(tree, tables, best_j)
    achieved = evaluate_load(tree, diffusers)
    if achieved != best:
        raise ExtractionError(
            f"reconstructed set re-evaluates to {achieved}, solver reported {best}"
        )
    charged = INFEASIBLE
    if tables.k >= 1:
        charged = 1 + min(totals[: tables.k])
    return Placement(
        diffusers=diffusers,
        load=int(best),
        k=k,
        root_charged_load=None if charged == INFEASIBLE else int(charged),
        tables=tables if keep_tables else None,
    )


def optimal_loads_by_budget(tree: RootedTree, k_max: int) -> list[int]:
    """Optimal load for every budget 0..k_max from a single table build."""
    if k_max < 0:
        raise ValueError(f"budget must be non-negative, got {k_max}")
    tables = _build_tables(tree, k_max, None)
    out: list[int] = []
    best = INFEASIBLE
    for j in range(k_max + 1):
        if j <= tables.k and tables.totals[j] < best:
            best = tables.totals[j]
        out.append(int(best))
    return out


def dump_tables_csv(tables: SolveTables) -> str:
    """Final per-node tables as CSV rows: node,kind,row,col,value."""
    lines = ["node,kind,row,col,value"]
    for u in sorted(tables.stages):
        tab = tables.final(u)
        for b in range(1, tab.rcap + 1):
            for d in range(tables.k + 1):
                v = tab.M[b][d]
                lines.append(f"{u},M,{b},{d},{'inf' if v == INFEASIBLE else int(v)}")
        for d in range(1, tables.k + 1):
            v = tab.L[d]
            lines.append(f"{u},L,1,{d},{'inf' if v == INFEASIBLE else int(v)}")
    return "\n".join(lines) + "\n"
