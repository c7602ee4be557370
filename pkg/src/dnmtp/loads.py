"""Bandwidth-load semantics of a diffuser placement on a multicast tree.

A placement D induces a set of paths routed along tree arcs: paths start at
the root or at a diffuser, end at destinations and at diffusers, and never
cross a diffuser. The load is the summed path length, i.e. arc uses counted
with multiplicity. The closed form used throughout is the per-node path
number: pn(u) = 1 if u is a diffuser, otherwise the sum over children plus
one if u is itself a destination; load = sum of pn over non-root nodes.
The explicit path construction is kept alongside as an independent witness
of that closed form.

The root needs no diffuser: it may originate any number of paths for free,
so membership of the root in D is rejected rather than silently ignored.
"""

from __future__ import annotations

from collections import Counter
from itertools import combinations

from .trees import RootedTree

BRUTE_FORCE_NODE_LIMIT = 24


def _as_diffuser_set(tree: RootedTree, diffusers) -> frozenset[int]:
    d = frozenset(diffusers)
    if tree.root in d:
        raise ValueError("the root cannot be a diffusing node")
    unknown = d - set(tree.nodes)
    if unknown:
        raise ValueError(f"diffusers {sorted(unknown)} are not tree nodes")
    return d


def path_numbers(tree: RootedTree, diffusers) -> dict[int, int]:
    """Number of paths crossing or terminating at each node's incoming arc."""
    d = _as_diffuser_set(tree, diffusers)
    dests = tree.destinations
    pn: dict[int, int] = {}
    for u in tree.postorder:
        if u in d:
            pn[u] = 1
        else:
            s = 1 if u in dests else 0
            for c in tree.children[u]:
                s += pn[c]
            pn[u] = s
    return pn


def load(tree: RootedTree, diffusers) -> int:
    """Total arc uses of the minimal path set for this placement."""
    pn = path_numbers(tree, diffusers)
    root = tree.root
    return sum(v for u, v in pn.items() if u != root)


def window(tree: RootedTree, diffusers, u: int) -> tuple[int, int, int]:
    """(path number, diffuser count, load) of the placement on node u's subtree arc."""
    if u == tree.root:
        raise ValueError("the root has no incoming arc")
    return all_windows(tree, diffusers)[u]


def all_windows(tree: RootedTree, diffusers) -> dict[int, tuple[int, int, int]]:
    """Windows on every non-root arc: the load component includes the arc itself."""
    d = _as_diffuser_set(tree, diffusers)
    pn = path_numbers(tree, d)
    sub_d: dict[int, int] = {}
    sub_load: dict[int, int] = {}
    out: dict[int, tuple[int, int, int]] = {}
    for u in tree.postorder:
        dd = 1 if u in d else 0
        ll = pn[u]
        for c in tree.children[u]:
            dd += sub_d[c]
            ll += sub_load[c]
        sub_d[u] = dd
        sub_load[u] = ll
        if u != tree.root:
            out[u] = (pn[u], dd, ll)
    return out


def materialize_paths(tree: RootedTree, diffusers) -> list[list[int]]:
    """Explicit minimal path set: one path per demand point of each origin.

    Origins are the root and every diffuser; an origin's demand points are
    the destinations and next diffusers reachable below it without crossing
    another diffuser. A node that is both destination and diffuser is served
    by the single path terminating there.
    """
    d = _as_diffuser_set(tree, diffusers)
    dests = tree.destinations
    parent = tree.parent
    paths: list[list[int]] = []
    for origin in [tree.root] + sorted(d):
        targets = []
        stack = list(tree.children[origin])
        while stack:
            v = stack.pop()
            if v in d:
                targets.append(v)
                continue
            if v in dests:
                targets.append(v)
            stack.extend(tree.children[v])
        for t in sorted(targets):
            hop = [t]
            v = t
            while v != origin:
                v = parent[v]
                hop.append(v)
            hop.reverse()
            paths.append(hop)
    return paths


def validate_paths(tree: RootedTree, diffusers, paths: list[list[int]]) -> str | None:
    """Audit a path set against the four placement conditions; None if valid."""
    d = _as_diffuser_set(tree, diffusers)
    parent = tree.parent
    for p in paths:
        if len(p) < 2:
            return "degenerate-path"
        for a, b in zip(p, p[1:]):
            if parent.get(b) != a:
                return "not-a-tree-path"
    ends = Counter(p[-1] for p in paths)
    for r in tree.destinations:
        if ends[r] != 1:
            return "destination-termination"
    for u in d:
        if ends[u] > 1:
            return "diffuser-termination"
    for p in paths:
        if p[0] != tree.root and p[0] not in d:
            return "bad-origin"
        if p[0] in d and ends[p[0]] == 0:
            return "unfed-diffuser-origin"
        for v in p[1:-1]:
            if v in d:
                return "diffuser-inside-path"
    return None


def brute_force_optimal(tree: RootedTree, k: int) -> tuple[frozenset[int], int]:
    """Exhaustive optimum over all diffuser sets of size at most k.

    Ties are resolved toward the lexicographically smallest sorted node
    tuple, so the empty set wins whenever diffusers do not strictly help.
    Refuses trees above BRUTE_FORCE_NODE_LIMIT nodes.
    """
    if k < 0:
        raise ValueError(f"budget must be non-negative, got {k}")
    n = len(tree.nodes)
    if n > BRUTE_FORCE_NODE_LIMIT:
        raise ValueError(
            f"tree has {n} nodes; brute force is limited to {BRUTE_FORCE_NODE_LIMIT}"
        )
    candidates = [u for u in tree.nodes if u != tree.root]
    best_set: tuple[int, ...] = ()
    best_load = load(tree, ())
    for size in range(1, min(k, len(candidates)) + 1):
        for combo in combinations(candidates, size):
            val = load(tree, combo)
            if val < best_load or (val == best_load and combo < best_set):
                best_load = val
                best_set = combo
    return frozenset(best_set), best_load


def saturating_diffusers(tree: RootedTree) -> frozenset[int]:
    """Placement at every branching node and internal destination.

    With this set every arc carries exactly one path, so the load equals the
    arc count - the floor no placement can beat.
    """
    out = set()
    for u in tree.nodes:
        if u == tree.root:
            continue
        kids = tree.children[u]
        if len(kids) >= 2 or (kids and u in tree.destinations):
            out.add(u)
    return frozenset(out)
