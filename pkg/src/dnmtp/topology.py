"""Network topology: symmetric directed graphs, Waxman generation, BFS distances.

Arcs are unweighted; every metric downstream counts hops. A graph is stored
as one undirected adjacency structure and interpreted as the symmetric
directed graph (u->v present iff v->u present).
"""

from __future__ import annotations

import json
import math
import random
from collections import deque
from dataclasses import dataclass, field

PLANE_SIDE = 1000.0

# Waxman defaults (BRITE's documented defaults for the Waxman router model).
DEFAULT_ALPHA = 0.15
DEFAULT_BETA = 0.2
DEFAULT_LINKS_PER_NODE = 2


class TopologyError(ValueError):
    """Raised for invalid graph construction or generation parameters."""


@dataclass
class Graph:
    """Connected symmetric directed graph with planar node coordinates.

    ``adj[u]`` is the sorted tuple of neighbors of ``u``; symmetry is
    guaranteed by construction from an undirected edge list. Instances are
    immutable after construction (the private caches memoize BFS results).
    """

    coords: tuple[tuple[float, float], ...]
    adj: tuple[tuple[int, ...], ...]
    _bfs_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n(self) -> int:
        return len(self.adj)

    def edges(self) -> list[tuple[int, int]]:
        """Each symmetric arc pair reported once, as (u, v) with u < v."""
        return [(u, v) for u in range(self.n) for v in self.adj[u] if u < v]

    def num_edges(self) -> int:
        return sum(len(nb) for nb in self.adj) // 2

    def structure_key(self) -> tuple:
        return (self.n, self.adj)

    def __getstate__(self):
        # BFS memos are cheap to rebuild and can be large; never pickle them.
        return (self.coords, self.adj)

    def __setstate__(self, state):
        self.coords, self.adj = state
        self._bfs_cache = {}

    @staticmethod
    def from_edges(
        n: int,
        coords: list[tuple[float, float]] | None,
        edges: list[tuple[int, int]],
        require_connected: bool = True,
    ) -> "Graph":
        if n < 1:
            raise TopologyError(f"graph needs at least one node, got n={n}")
        if coords is None:
            coords = [(0.0, 0.0)] * n
        if len(coords) != n:
            raise TopologyError(f"expected {n} coordinates, got {len(coords)}")
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise TopologyError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise TopologyError(f"self-loop at node {u}")
            if v in nbrs[u]:
                raise TopologyError(f"duplicate edge ({u}, {v})")
            nbrs[u].add(v)
            nbrs[v].add(u)
        g = Graph(
            coords=tuple((float(x), float(y)) for x, y in coords),
            adj=tuple(tuple(sorted(s)) for s in nbrs),
        )
        if require_connected and not g.is_connected():
            raise TopologyError("graph is not connected")
        return g

    def is_connected(self) -> bool:
        if self.n == 0:
            return False
        seen = [False] * self.n
        seen[0] = True
        queue = deque([0])
        count = 1
        while queue:
            u = queue.popleft()
            for v in self.adj[u]:
                if not seen[v]:
                    seen[v] = True
                    count += 1
                    queue.append(v)
        return count == self.n


@dataclass(frozen=True)
class MulticastRequest:
    """A source node and a non-empty destination set."""

    source: int
    destinations: frozenset[int]

    def validate(self, g: Graph) -> None:
        if not (0 <= self.source < g.n):
            raise TopologyError(f"source {self.source} not a node of the graph")
        if not self.destinations:
            raise TopologyError("destination set is empty")
        if self.source in self.destinations:
            raise TopologyError("source cannot be one of the destinations")
        bad = [r for r in self.destinations if not (0 <= r < g.n)]
        if bad:
            raise TopologyError(f"destinations {sorted(bad)} not nodes of the graph")


def generate_waxman(
    n: int,
    alpha: float = DEFAULT_ALPHA,
    beta: float = DEFAULT_BETA,
    m: int = DEFAULT_LINKS_PER_NODE,
    seed: int = 0,
) -> Graph:
    """Incremental Waxman random topology on a square plane of side 1000.

    Nodes are placed uniformly at random; each node after the first attaches
    with min(m, #existing) links to distinct earlier nodes, drawn without
    replacement with probability proportional to alpha * exp(-d / (beta * L)),
    where d is Euclidean distance and L the plane diagonal. The construction
    attaches every node to an earlier one, so the result is connected; a
    defensive reseed loop (seed+1, ...) guards the pathological case anyway.
    """
    if n < 1:
        raise TopologyError(f"need n >= 1, got {n}")
    if m < 1:
        raise TopologyError(f"need m >= 1, got {m}")
    if n > 1 and m >= n:
        raise TopologyError(f"cannot attach m={m} links per node with only n={n} nodes")
    if not (0.0 < alpha <= 1.0) or not (0.0 < beta <= 1.0):
        raise TopologyError(f"alpha and beta must lie in (0, 1], got {alpha}, {beta}")

    for attempt in range(100):
        g = _waxman_once(n, alpha, beta, m, seed + attempt)
        if g.is_connected():
            return g
    raise TopologyError(
        f"could not generate a connected graph after 100 attempts (n={n}, m={m})"
    )


def _waxman_once(n: int, alpha: float, beta: float, m: int, seed: int) -> Graph:
    rng = random.Random(seed)
    coords = [(rng.uniform(0.0, PLANE_SIDE), rng.uniform(0.0, PLANE_SIDE)) for _ in range(n)]
    diag = PLANE_SIDE * math.sqrt(2.0)
    edges: list[tuple[int, int]] = []
    for i in range(1, n):
        xi, yi = coords[i]
        weights = []
        for j in range(i):
            xj, yj = coords[j]
            d = math.hypot(xi - xj, yi - yj)
            weights.append(alpha * math.exp(-d / (beta * diag)))
        chosen: list[int] = []
        candidates = list(range(i))
        for _ in range(min(m, i)):
            total = sum(weights[j] for j in candidates)
            r = rng.random() * total
            acc = 0.0
            pick = candidates[-1]
            for j in candidates:
                acc += weights[j]
                if r < acc:
                    pick = j
                    break
            candidates.remove(pick)
            chosen.append(pick)
        edges.extend((j, i) for j in chosen)
    return Graph.from_edges(n, coords, edges, require_connected=False)


def shortest_path_tree(g: Graph, source: int) -> tuple[list[int], list[int | None]]:
    """Hop distances and deterministic BFS parents from ``source``.

    parent[v] is the smallest-id neighbor of v among those one hop closer to
    the source; parent[source] is None. Results are memoized on the graph.
    """
    cached = g._bfs_cache.get(source)
    if cached is not None:
        return cached
    if not (0 <= source < g.n):
        raise TopologyError(f"source {source} not a node of the graph")
    dist = [-1] * g.n
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        du = dist[u]
        for v in g.adj[u]:
            if dist[v] < 0:
                dist[v] = du + 1
                queue.append(v)
    if any(d < 0 for d in dist):
        raise TopologyError("graph is not connected")
    parent: list[int | None] = [None] * g.n
    for v in range(g.n):
        if v == source:
            continue
        target = dist[v] - 1
        for u in g.adj[v]:  # adj is sorted, first hit is the smallest id
            if dist[u] == target:
                parent[v] = u
                break
    result = (dist, parent)
    g._bfs_cache[source] = result
    return result


def hop_distances(g: Graph, source: int) -> list[int]:
    return shortest_path_tree(g, source)[0]


def average_degree(g: Graph) -> float:
    """Average node degree, counting each symmetric arc pair as one edge."""
    return 2.0 * g.num_edges() / g.n


def graph_to_json(g: Graph) -> str:
    payload = {
        "n": g.n,
        "coords": [[x, y] for x, y in g.coords],
        "edges": [[u, v] for u, v in g.edges()],
    }
    return json.dumps(payload)


def graph_from_json(text: str) -> Graph:
    data = json.loads(text)
    try:
        n = data["n"]
        coords = [(x, y) for x, y in data["coords"]]
        edges = [(u, v) for u, v in data["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise TopologyError(f"malformed graph file: {exc}") from exc
    return Graph.from_edges(n, coords, edges)
