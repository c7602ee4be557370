"""Multicast tree construction: shortest-path union and Steiner heuristic.

Both builders return a :class:`RootedTree` (arborescence rooted at the
request source, every leaf a destination). Ties are broken by smallest node
id everywhere so that construction is reproducible.
"""

from __future__ import annotations

import json

from .topology import Graph, MulticastRequest, hop_distances, shortest_path_tree


class TreeError(ValueError):
    """Raised for structurally broken tree input."""


class RootedTree:
    """Arborescence over a subset of graph nodes, arcs directed root->leaves.

    ``parent`` maps every non-root node to its parent. Children lists,
    depths and a postorder are derived once; instances are treated as
    immutable afterwards.
    """

    __slots__ = ("root", "parent", "destinations", "nodes", "children", "depth", "postorder")

    def __init__(self, root: int, parent: dict[int, int], destinations) -> None:
        if root in parent:
            raise TreeError("root cannot have a parent")
        nodes = set(parent) | {root}
        for child, par in parent.items():
            if par not in nodes:
                raise TreeError(f"parent {par} of node {child} is not a tree node")
        self.root = root
        self.parent = dict(parent)
        self.destinations = frozenset(destinations)
        if not self.destinations <= nodes:
            raise TreeError("destinations must be tree nodes")
        self.nodes = sorted(nodes)
        children: dict[int, list[int]] = {u: [] for u in nodes}
        for child, par in parent.items():
            children[par].append(child)
        self.children = {u: sorted(cs) for u, cs in children.items()}
        self.depth = {root: 0}
        for u in nodes:
            self._resolve_depth(u)
        # children-before-parent order, deterministic
        order: list[int] = []
        stack = [root]
        while stack:
            u = stack.pop()
            order.append(u)
            stack.extend(self.children[u])
        order.reverse()
        self.postorder = order

    def _resolve_depth(self, u: int) -> None:
        chain = []
        v = u
        while v not in self.depth:
            chain.append(v)
            v = self.parent[v]
            if len(chain) > len(self.nodes):
                raise TreeError("parent pointers contain a cycle")
        d = self.depth[v]
        for w in reversed(chain):
            d += 1
            self.depth[w] = d

    @property
    def num_arcs(self) -> int:
        return len(self.parent)

    def leaves(self) -> list[int]:
        return [u for u in self.nodes if not self.children[u]]

    def subtree_nodes(self, u: int) -> list[int]:
        out = []
        stack = [u]
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(self.children[v])
        return out


def build_shp_tree(g: Graph, req: MulticastRequest) -> RootedTree:
    """Union of hop-shortest source->destination paths.

    All paths are read from one BFS tree per source, so merging the chains
    cannot create a second parent; every destination sits at depth equal to
    its hop distance from the source.
    """
    req.validate(g)
    _, parent_of = shortest_path_tree(g, req.source)
    tparent: dict[int, int] = {}
    for r in sorted(req.destinations):
        v = r
        while v != req.source and v not in tparent:
            p = parent_of[v]
            assert p is not None
            tparent[v] = p
            v = p
    return RootedTree(req.source, tparent, req.destinations)


def build_stt_tree(g: Graph, req: MulticastRequest) -> RootedTree:
    """Nearest-destination Steiner heuristic (2-approximate), rooted at the source.

    Runs on the undirected view: grow the tree from the source, repeatedly
    attaching the destination closest in hops via a shortest connecting
    path, until all destinations are covered. Ties between destinations go
    to the smallest id; among equally short connecting paths the
    lexicographically smallest node sequence (read from the tree side) is
    taken. Arcs are oriented away from the source by construction.
    """
    req.validate(g)
    e = req.source
    tree_nodes = {e}
    tparent: dict[int, int] = {}
    uncovered = set(req.destinations)
    dist_to_tree = {r: hop_distances(g, r)[e] for r in uncovered}
    while uncovered:
        r_star = min(uncovered, key=lambda r: (dist_to_tree[r], r))
        d_star = dist_to_tree[r_star]
        row = hop_distances(g, r_star)  # symmetric graph: row also gives dist to r_star
        t0 = min(t for t in tree_nodes if row[t] == d_star)
        path = [t0]
        w = t0
        while w != r_star:
            w = next(x for x in g.adj[w] if row[x] == row[w] - 1)
            path.append(w)
        for prev, node in zip(path, path[1:]):
            tparent[node] = prev
            tree_nodes.add(node)
        uncovered.discard(r_star)
        for node in path[1:]:
            for r in uncovered:
                d = hop_distances(g, r)[node]
                if d < dist_to_tree[r]:
                    dist_to_tree[r] = d
    tparent = _prune_bare_leaves(e, tparent, req.destinations)
    return RootedTree(e, tparent, req.destinations)


def _prune_bare_leaves(root: int, parent: dict[int, int], dests: frozenset[int] | set[int]) -> dict[int, int]:
    # Drop leaves that serve no destination until none remain. A no-op for
    # the builders here, kept as normalization for hand-built inputs.
    parent = dict(parent)
    while True:
        parents_in_use = set(parent.values())
        bare = [v for v in parent if v not in parents_in_use and v not in dests]
        if not bare:
            return parent
        for v in bare:
            del parent[v]


def validate_tree(
    tree: RootedTree,
    req: MulticastRequest | None = None,
    g: Graph | None = None,
) -> str | None:
    """Audit all tree invariants; return the first violation name, or None.

    Never raises: intended for checking trees read from files or built by
    hand. With ``req`` the root and destination flags are matched against
    the request; with ``g`` every tree arc must exist in the graph.
    """
    node_set = set(tree.nodes)
    if not tree.destinations <= node_set:
        return "destination-not-in-tree"
    if tree.root in tree.destinations:
        return "root-is-destination"
    for u in tree.nodes:
        if u != tree.root and not tree.children[u] and u not in tree.destinations:
            return "leaf-not-destination"
    if g is not None:
        for child, par in tree.parent.items():
            if not (0 <= child < g.n) or not (0 <= par < g.n) or child not in g.adj[par]:
                return "arc-not-in-graph"
    if req is not None:
        if tree.root != req.source:
            return "root-not-source"
        if tree.destinations != req.destinations:
            return "destinations-mismatch"
    return None


def tree_to_json(tree: RootedTree) -> str:
    payload = {
        "root": tree.root,
        "parent": {str(c): p for c, p in sorted(tree.parent.items())},
        "destinations": sorted(tree.destinations),
    }
    return json.dumps(payload)


def tree_from_json(text: str) -> RootedTree:
    data = json.loads(text)
    try:
        root = int(data["root"])
        parent = {int(c): int(p) for c, p in data["parent"].items()}
        destinations = frozenset(int(r) for r in data["destinations"])
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise TreeError(f"malformed tree file: {exc}") from exc
    return RootedTree(root, parent, destinations)
