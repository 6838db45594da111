"""Directed approval graphs, the edge-list text format, and instance generators.

Agents are the integers ``1..n``.  An edge ``(u, v)`` means agent ``u``
approves (nominates) agent ``v``.  Graphs are immutable once built.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DirectedGraph",
    "GraphError",
    "GraphParseError",
    "GraphValidationError",
    "parse_graph",
    "serialize_graph",
    "indegree",
    "indegree_from",
    "gen_star",
    "gen_cycle",
    "gen_single_edge",
    "gen_sliding_counterexample",
    "gen_random",
    "gen_named",
    "all_graphs",
]


class GraphError(ValueError):
    """Base class for graph construction problems."""


class GraphParseError(GraphError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class GraphValidationError(GraphError):
    pass


@dataclass(frozen=True)
class DirectedGraph:
    """A reported approval graph on agents ``1..n``."""

    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise GraphValidationError(f"agent count must be a positive integer, got {self.n!r}")
        edges = frozenset((int(u), int(v)) for u, v in self.edges)
        for u, v in edges:
            if u == v:
                raise GraphValidationError(f"self-loop on agent {u}")
            if not (1 <= u <= self.n and 1 <= v <= self.n):
                raise GraphValidationError(f"edge ({u}, {v}) has an endpoint outside 1..{self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "DirectedGraph":
        """Build a graph, rejecting duplicates (``DirectedGraph(n, edges)`` silently merges them)."""
        edges = list(edges)
        if len(set(edges)) != len(edges):
            raise GraphValidationError("duplicate edge")
        return cls(n, frozenset(edges))

    @property
    def agents(self) -> range:
        return range(1, self.n + 1)

    @cached_property
    def sorted_edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.edges))

    @cached_property
    def indegrees(self) -> tuple[int, ...]:
        """Indegree of every agent, indexed ``0..n`` (slot 0 unused)."""
        deg = [0] * (self.n + 1)
        for _, v in self.edges:
            deg[v] += 1
        return tuple(deg)

    @cached_property
    def out_neighbors(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.n + 1)]
        for u, v in self.sorted_edges:
            out[u].append(v)
        return tuple(tuple(x) for x in out)

    @cached_property
    def in_neighbors(self) -> tuple[tuple[int, ...], ...]:
        inn: list[list[int]] = [[] for _ in range(self.n + 1)]
        for u, v in self.sorted_edges:
            inn[v].append(u)
        return tuple(tuple(x) for x in inn)

    @cached_property
    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Zero-based ``(sources, targets)`` arrays for vectorised code."""
        if not self.edges:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty
        arr = np.array(self.sorted_edges, dtype=np.int64) - 1
        return arr[:, 0].copy(), arr[:, 1].copy()

    def with_out_edges(self, agent: int, targets: Iterable[int]) -> "DirectedGraph":
        """Copy of the graph with ``agent``'s outgoing edges replaced by ``targets``."""
        kept = {(u, v) for u, v in self.edges if u != agent}
        kept.update((agent, v) for v in targets)
        return DirectedGraph(self.n, frozenset(kept))

    def __str__(self) -> str:
        return serialize_graph(self)


def parse_graph(text: str) -> DirectedGraph:
    """Parse the line-oriented edge-list format.

    >>> parse_graph("n 3\\nedge 1 3\\n").edges
    frozenset({(1, 3)})
    """
    n = None
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != "n":
                raise GraphParseError(lineno, f"expected 'n <int>', got {line!r}")
            try:
                n = int(parts[1])
            except ValueError:
                raise GraphParseError(lineno, f"bad agent count {parts[1]!r}") from None
            if n < 1:
                raise GraphValidationError(f"agent count must be positive, got {n}")
            continue
        if len(parts) != 3 or parts[0] != "edge":
            raise GraphParseError(lineno, f"expected 'edge <u> <v>', got {line!r}")
        try:
            u, v = int(parts[1]), int(parts[2])
        except ValueError:
            raise GraphParseError(lineno, f"bad endpoint in {line!r}") from None
        if u == v:
            raise GraphValidationError(f"line {lineno}: self-loop on agent {u}")
        if not (1 <= u <= n and 1 <= v <= n):
            raise GraphValidationError(f"line {lineno}: endpoint outside 1..{n}")
        if (u, v) in seen:
            raise GraphValidationError(f"line {lineno}: duplicate edge ({u}, {v})")
        seen.add((u, v))
        edges.append((u, v))
    if n is None:
        raise GraphParseError(0, "missing 'n <int>' header")
    return DirectedGraph(n, frozenset(edges))


def serialize_graph(g: DirectedGraph) -> str:
    lines = [f"n {g.n}"]
    lines.extend(f"edge {u} {v}" for u, v in g.sorted_edges)
    return "\n".join(lines) + "\n"


def _check_agent(g: DirectedGraph, i: int) -> None:
    if not 1 <= i <= g.n:
        raise GraphValidationError(f"agent {i} outside 1..{g.n}")


def indegree(g: DirectedGraph, i: int) -> int:
    _check_agent(g, i)
    return g.indegrees[i]


def indegree_from(g: DirectedGraph, i: int, sources: Iterable[int]) -> int:
    """Number of edges into ``i`` whose source lies in ``sources``."""
    _check_agent(g, i)
    sources = set(sources)
    for j in sources:
        _check_agent(g, j)
    return sum(1 for j in g.in_neighbors[i] if j in sources)


def gen_star(bits: Sequence[int]) -> DirectedGraph:
    """Star on ``len(bits) + 1`` agents: ``i -> n`` iff ``bits[i-1]`` is set."""
    if len(bits) < 1:
        raise GraphValidationError("star needs at least one leaf bit")
    n = len(bits) + 1
    return DirectedGraph(n, frozenset((i + 1, n) for i, b in enumerate(bits) if b))


def gen_cycle(k: int, n: int) -> DirectedGraph:
    """Directed cycle ``1 -> 2 -> ... -> k+1 -> 1``; agents ``k+2..n`` isolated."""
    if not 1 <= k <= n - 1:
        raise GraphValidationError(f"cycle needs 1 <= k <= n-1, got k={k}, n={n}")
    edges = {(i, i + 1) for i in range(1, k + 1)}
    edges.add((k + 1, 1))
    return DirectedGraph(n, frozenset(edges))


def gen_single_edge(n: int) -> DirectedGraph:
    if n < 2:
        raise GraphValidationError(f"single-edge graph needs n >= 2, got {n}")
    return DirectedGraph(n, frozenset({(1, n)}))


def gen_sliding_counterexample(t: int, d: int) -> DirectedGraph:
    """Two-level in-tree: ``t`` spokes point at root 1, each spoke has ``d`` private leaves.

    Spokes are agents ``2..t+1``; the leaves of spoke ``s`` (0-based ``s``) are
    ``t + 2 + s*d .. t + 1 + (s+1)*d``.
    """
    if t < 1 or d < 1:
        raise GraphValidationError(f"t and d must be positive, got t={t}, d={d}")
    n = 1 + t + t * d
    edges = set()
    for s in range(t):
        spoke = 2 + s
        edges.add((spoke, 1))
        first_leaf = t + 2 + s * d
        edges.update((leaf, spoke) for leaf in range(first_leaf, first_leaf + d))
    return DirectedGraph(n, frozenset(edges))


def gen_random(n: int, p: float, seed: int = 0) -> DirectedGraph:
    """Each ordered pair ``(i, j)``, ``i != j``, is an edge independently with probability ``p``."""
    if not 0 <= p <= 1:
        raise GraphValidationError(f"edge probability must lie in [0, 1], got {p}")
    if n < 1:
        raise GraphValidationError(f"agent count must be positive, got {n}")
    rng = np.random.default_rng(seed)
    coins = rng.random((n, n)) < p
    np.fill_diagonal(coins, False)
    src, dst = np.nonzero(coins)
    return DirectedGraph(n, frozenset(zip((src + 1).tolist(), (dst + 1).tolist())))


_NAMED = {
    "figure2": (6, ((1, 2), (3, 1), (4, 1), (4, 2), (4, 3), (4, 5), (4, 6), (6, 2), (6, 5))),
    "figure4": (6, ((4, 5), (2, 4), (3, 1), (3, 6), (4, 3))),
}


def gen_named(name: str) -> DirectedGraph:
    try:
        n, edges = _NAMED[name]
    except KeyError:
        raise GraphValidationError(
            f"unknown named graph {name!r}; choose from {sorted(_NAMED)}"
        ) from None
    return DirectedGraph(n, frozenset(edges))


def all_graphs(n: int):
    """Every directed graph on ``n`` agents, in order of the edge bitmask.

    Bit ``b`` of the mask corresponds to the ``b``-th ordered pair in
    ``(u, v)`` lexicographic order, so mask 0 is the empty graph.
    """
    pairs = [(u, v) for u in range(1, n + 1) for v in range(1, n + 1) if u != v]
    for mask in range(1 << len(pairs)):
        yield DirectedGraph(n, frozenset(p for b, p in enumerate(pairs) if mask >> b & 1))
