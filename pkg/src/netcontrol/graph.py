"""Directed-graph core: representation, edge-list I/O and random generators.

Node ids in input files may be arbitrary nonnegative integers; internally
nodes are always the dense range [0, n) and the external->internal mapping
is kept on the graph so results can be reported in the caller's ids.
"""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass, field

import numpy as np

Edge = tuple[int, int, float]

# Seed for the structural->numeric bridge: unweighted graphs get edge weights
# drawn uniformly from [0.5, 1.5] so that generic-rank arguments apply.
DEFAULT_WEIGHT_SEED = 1729


class GraphFormatError(ValueError):
    """An edge-list or graph-JSON document could not be parsed."""


@dataclass(frozen=True)
class DirectedGraph:
    """A directed graph with optional nonzero edge weights.

    Attributes:
        n: number of nodes; node indices are 0..n-1.
        edges: sorted tuple of (src, dst, weight) with weight != 0.
        id_map: external id -> internal index (identity for generated graphs).
    """

    n: int
    edges: tuple[Edge, ...]
    id_map: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        edges = tuple(sorted((int(s), int(d), float(w)) for s, d, w in self.edges))
        object.__setattr__(self, "edges", edges)
        if not self.id_map:
            object.__setattr__(self, "id_map", {i: i for i in range(self.n)})
        seen = set()
        for s, d, w in self.edges:
            if not (0 <= s < self.n and 0 <= d < self.n):
                raise ValueError(f"edge ({s},{d}) endpoint out of range [0,{self.n})")
            if w == 0.0:
                raise ValueError(f"edge ({s},{d}) has zero weight")
            if (s, d) in seen:
                raise ValueError(f"duplicate edge ({s},{d})")
            seen.add((s, d))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def internal_to_external(self) -> dict[int, int]:
        return {v: k for k, v in self.id_map.items()}

    def successors(self) -> list[list[int]]:
        """Adjacency lists indexed by source node."""
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for s, d, _ in self.edges:
            adj[s].append(d)
        return adj

    def edge_set(self) -> set[tuple[int, int]]:
        return {(s, d) for s, d, _ in self.edges}

    def adjacency(self, weights: np.ndarray | None = None) -> np.ndarray:
        """Dense adjacency matrix A with A[i, j] != 0 iff edge j -> i exists."""
        a = np.zeros((self.n, self.n))
        for k, (s, d, w) in enumerate(self.edges):
            a[d, s] = w if weights is None else weights[k]
        return a

    def randomized_adjacency(self, seed: int = DEFAULT_WEIGHT_SEED) -> np.ndarray:
        """Adjacency with weights redrawn uniformly from [0.5, 1.5].

        Used for numeric controllability checks on unweighted graphs, where
        unit weights can hit non-generic rank cancellations.
        """
        rng = np.random.default_rng(seed)
        return self.adjacency(weights=rng.uniform(0.5, 1.5, size=len(self.edges)))

    def to_json(self) -> str:
        payload = {
            "n": self.n,
            "edges": [[s, d, w] for s, d, w in self.edges],
            "id_map": {str(k): v for k, v in self.id_map.items()},
        }
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "DirectedGraph":
        try:
            payload = json.loads(text)
            return cls(
                n=int(payload["n"]),
                edges=tuple((int(s), int(d), float(w)) for s, d, w in payload["edges"]),
                id_map={int(k): int(v) for k, v in payload.get("id_map", {}).items()},
            )
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise GraphFormatError(f"bad graph JSON: {exc}") from exc


def parse_edge_list(text: str) -> DirectedGraph:
    """Parse whitespace-separated "src dst [weight]" lines into a graph.

    Lines starting with '#' and blank lines are ignored.  A line with a single
    token declares an isolated node (this is what serialize_edge_list emits for
    nodes without incident edges, so parse/serialize round-trips).  External
    ids are remapped to the dense range [0, n) in sorted order; duplicate
    (src, dst) lines collapse to the last weight seen.
    """
    mentioned: set[int] = set()
    raw_edges: dict[tuple[int, int], float] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = stripped.split()
        if len(tokens) > 3:
            raise GraphFormatError(f"line {lineno}: expected 'src dst [weight]', got {len(tokens)} fields")
        try:
            ids = [int(tok) for tok in tokens[:2]]
        except ValueError as exc:
            raise GraphFormatError(f"line {lineno}: non-integer node id") from exc
        if any(i < 0 for i in ids):
            raise GraphFormatError(f"line {lineno}: node ids must be nonnegative")
        if len(tokens) == 1:
            mentioned.add(ids[0])
            continue
        weight = 1.0
        if len(tokens) == 3:
            try:
                weight = float(tokens[2])
            except ValueError as exc:
                raise GraphFormatError(f"line {lineno}: bad weight {tokens[2]!r}") from exc
        if weight == 0.0:
            raise GraphFormatError(f"line {lineno}: zero edge weight is not allowed")
        mentioned.update(ids)
        raw_edges[(ids[0], ids[1])] = weight

    id_map = {ext: i for i, ext in enumerate(sorted(mentioned))}
    edges = tuple((id_map[s], id_map[d], w) for (s, d), w in raw_edges.items())
    return DirectedGraph(n=len(id_map), edges=edges, id_map=id_map)


def serialize_edge_list(g: DirectedGraph) -> str:
    """Inverse of parse_edge_list, written in the graph's external ids."""
    ext = g.internal_to_external()
    lines = []
    touched = set()
    for s, d, w in g.edges:
        touched.update((s, d))
        if w == 1.0:
            lines.append(f"{ext[s]} {ext[d]}")
        else:
            lines.append(f"{ext[s]} {ext[d]} {w:.17g}")
    for v in range(g.n):
        if v not in touched:
            lines.append(f"{ext[v]}")
    return "\n".join(lines) + ("\n" if lines else "")


def generate_er(n: int, mu: float, seed: int) -> DirectedGraph:
    """Erdos-Renyi style digraph with exactly round(mu*n/2) edges.

    mu is the target mean total (in+out) degree, so the edge count is
    round(mu*n/2).  Edges are distinct directed pairs without self-loops,
    drawn uniformly; deterministic for a given seed.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if mu < 0:
        raise ValueError("mu must be >= 0")
    m = round(mu * n / 2)
    if m > n * (n - 1):
        raise ValueError(f"cannot place {m} directed edges on {n} nodes")
    rng = random.Random(seed)
    codes = rng.sample(range(n * (n - 1)), m)
    edges = []
    for code in codes:
        src, off = divmod(code, n - 1) if n > 1 else (0, 0)
        dst = off + (1 if off >= src else 0)
        edges.append((src, dst, 1.0))
    return DirectedGraph(n=n, edges=tuple(edges))


def generate_ba(n: int, m: int, seed: int) -> DirectedGraph:
    """Barabasi-Albert style digraph: (n-m)*m edges via preferential attachment.

    Each new node attaches to m distinct existing nodes chosen proportionally
    to current total degree; every edge is oriented by a fair coin flip on the
    same seed stream.  Deterministic for a given seed.
    """
    if not (n > m >= 1):
        raise ValueError("need n > m >= 1")
    rng = random.Random(seed)
    edges = []
    repeated: list[int] = []  # one entry per endpoint, drives preferential choice
    for new in range(m, n):
        targets: list[int] = []
        while len(targets) < m:
            if repeated:
                cand = rng.choice(repeated)
            else:
                cand = rng.randrange(new)
            if cand not in targets:
                targets.append(cand)
        for t in targets:
            if rng.random() < 0.5:
                edges.append((new, t, 1.0))
            else:
                edges.append((t, new, 1.0))
            repeated.extend((new, t))
    return DirectedGraph(n=n, edges=tuple(edges))


def _hopcroft_karp(n: int, adj: list[list[int]]) -> tuple[int, list[int]]:
    """Maximum matching on the bipartite out-copy/in-copy split.

    adj[u] lists the in-copies reachable from out-copy u.  Returns the
    matching size and match_out, where match_out[u] is the matched in-copy
    of u or -1.
    """
    inf = float("inf")
    match_out = [-1] * n
    match_in = [-1] * n
    dist = [inf] * n
    size = 0

    def bfs() -> bool:
        queue = deque()
        for u in range(n):
            if match_out[u] == -1:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = inf
        found = False
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                w = match_in[v]
                if w == -1:
                    found = True
                elif dist[w] == inf:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return found

    def dfs(root: int) -> bool:
        # Iterative DFS along the BFS layering; recursion would overflow on
        # long augmenting chains.  chosen[i] is the in-copy that stack[i]
        # descended through, so len(chosen) == len(stack) - 1.
        stack = [(root, iter(adj[root]))]
        chosen: list[int] = []
        while stack:
            u, it = stack[-1]
            moved = False
            for v in it:
                w = match_in[v]
                if w == -1:
                    match_out[u] = v
                    match_in[v] = u
                    for i in range(len(chosen)):
                        pu, pv = stack[i][0], chosen[i]
                        match_out[pu] = pv
                        match_in[pv] = pu
                    return True
                if dist[w] == dist[u] + 1:
                    chosen.append(v)
                    stack.append((w, iter(adj[w])))
                    moved = True
                    break
            if not moved:
                dist[u] = inf
                stack.pop()
                if stack:
                    chosen.pop()
        return False

    while bfs():
        for u in range(n):
            if match_out[u] == -1 and dfs(u):
                size += 1
    return size, match_out


def maximum_matching(g: DirectedGraph) -> int:
    """Size of the maximum matching of the bipartite out/in representation."""
    return _hopcroft_karp(g.n, g.successors())[0]


def classical_driver_count(g: DirectedGraph) -> int:
    """Minimum driver count for full structural control: max(n - matching, 1)."""
    if g.n == 0:
        return 0
    return max(g.n - maximum_matching(g), 1)


def matching_path_cover(g: DirectedGraph) -> list[list[int]]:
    """Vertex-disjoint paths covering every node, built from a maximum matching.

    Matched edges define a successor function; its cycles are broken at their
    lowest-index node so the result is paths only.  Used as a cycle-free
    fallback cover for placement heuristics.
    """
    _, match_out = _hopcroft_karp(g.n, g.successors())
    succ = dict(enumerate(match_out))
    has_pred = {v for v in match_out if v != -1}

    paths = []
    visited = set()
    for start in range(g.n):
        if start in visited or start in has_pred:
            continue
        path = [start]
        visited.add(start)
        while succ[path[-1]] != -1 and succ[path[-1]] not in visited:
            path.append(succ[path[-1]])
            visited.add(path[-1])
        paths.append(path)
    # Remaining nodes sit on matching cycles; break each at its lowest node.
    for start in range(g.n):
        if start in visited:
            continue
        path = [start]
        visited.add(start)
        while succ[path[-1]] != -1 and succ[path[-1]] not in visited:
            path.append(succ[path[-1]])
            visited.add(path[-1])
        paths.append(path)
    return paths
