"""Exact outcome distributions by enumerating a mechanism's randomness.

Everything on this path is integer or ``Fraction`` arithmetic: the
strategyproofness audits compare probabilities for exact equality.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Mapping

from .graph import DirectedGraph
from .mechanisms import (
    MechanismError,
    MechanismSpec,
    Selection,
    edge_scan,
    optimal_select,
)

__all__ = [
    "DEFAULT_GUARD",
    "EnumerationTooLarge",
    "SelectionDistribution",
    "exact_distribution",
    "selection_probabilities",
    "expected_total_indegree",
    "format_fraction",
    "parse_fraction",
    "mrp_path_count",
]

DEFAULT_GUARD = 10**8


class EnumerationTooLarge(RuntimeError):
    """The randomness space is too big to enumerate."""

    def __init__(self, what: str, size: int, bound: int):
        super().__init__(f"too large for exact engine: {what} needs {size} paths, bound is {bound}")
        self.size = size
        self.bound = bound


def format_fraction(p: Fraction) -> str:
    p = Fraction(p)
    return f"{p.numerator}/{p.denominator}"


def parse_fraction(text: str) -> Fraction:
    return Fraction(text)


@dataclass(frozen=True)
class SelectionDistribution:
    """Exact distribution over selections of a mechanism run on a graph of ``n`` agents.

    ``k`` is the selection size, or ``None`` when outcome sizes vary (edge-scan).
    """

    outcomes: Mapping[Selection, Fraction]
    n: int
    k: int | None

    def __post_init__(self):
        total = sum(self.outcomes.values(), Fraction(0))
        if total != 1:
            raise ValueError(f"probabilities sum to {total}, not 1")
        for sel, p in self.outcomes.items():
            if p <= 0:
                raise ValueError(f"non-positive probability {p} on {sel.members}")
            if self.k is not None and sel.k != self.k:
                raise ValueError(f"outcome {sel.members} does not have {self.k} members")
            if any(not 1 <= i <= self.n for i in sel):
                raise ValueError(f"outcome {sel.members} has agents outside 1..{self.n}")

    @classmethod
    def point_mass(cls, sel: Selection, n: int, k: int | None = None) -> "SelectionDistribution":
        return cls({sel: Fraction(1)}, n, sel.k if k is None else k)

    def items(self):
        return sorted(self.outcomes.items())

    def probability(self, sel) -> Fraction:
        if not isinstance(sel, Selection):
            sel = Selection(tuple(sel))
        return self.outcomes.get(sel, Fraction(0))

    def to_json(self) -> dict:
        probs = selection_probabilities(self)
        return {
            "n": self.n,
            "k": self.k,
            "outcomes": [
                {"members": list(sel.members), "p": format_fraction(p)} for sel, p in self.items()
            ],
            "agent_probabilities": {str(i): format_fraction(probs[i]) for i in range(1, self.n + 1)},
        }

    @classmethod
    def from_json(cls, data: dict) -> "SelectionDistribution":
        outcomes = {
            Selection(tuple(o["members"])): parse_fraction(o["p"]) for o in data["outcomes"]
        }
        return cls(outcomes, data["n"], data["k"])


def selection_probabilities(dist: SelectionDistribution) -> dict[int, Fraction]:
    """``Pr[i selected]`` for every agent ``1..n``."""
    probs = {i: Fraction(0) for i in range(1, dist.n + 1)}
    for sel, p in dist.outcomes.items():
        for i in sel:
            probs[i] += p
    return probs


def expected_total_indegree(g: DirectedGraph, dist: SelectionDistribution) -> Fraction:
    """Expected total indegree of the selected set, computed two ways and cross-checked."""
    if dist.n != g.n:
        raise ValueError(f"distribution is over {dist.n} agents, graph has {g.n}")
    deg = g.indegrees
    by_outcome = sum((p * sel.total_indegree(g) for sel, p in dist.outcomes.items()), Fraction(0))
    probs = selection_probabilities(dist)
    by_agent = sum((probs[i] * deg[i] for i in range(1, g.n + 1)), Fraction(0))
    if by_outcome != by_agent:
        raise AssertionError(f"linearity check failed: {by_outcome} != {by_agent}")
    return by_outcome


def mrp_path_count(n: int, k: int, m: int) -> int:
    """Upper bound on the number of randomness paths m-RP enumerates."""
    t_size = k - m * (k // m)
    worst_fill = max(math.comb(n - kp, k - kp) for kp in range(k + 1))
    return m**n * math.comb(m, t_size) * worst_fill


def exact_distribution(spec: MechanismSpec, g: DirectedGraph, guard: int = DEFAULT_GUARD,
                       ) -> SelectionDistribution:
    kind = spec.kind
    if kind == "edge-scan":
        return SelectionDistribution.point_mass(edge_scan(g), g.n, None)
    if kind == "sliding-partition":
        return _sliding_distribution(g, guard)
    k = spec.k
    if k is None or not 1 <= k <= g.n:
        raise MechanismError(f"k must satisfy 1 <= k <= n={g.n}, got {k}")
    if kind == "optimal":
        return SelectionDistribution.point_mass(optimal_select(g, k), g.n)
    if kind == "random-subset":
        size = math.comb(g.n, k)
        if size > guard:
            raise EnumerationTooLarge(f"random-subset C({g.n},{k})", size, guard)
        p = Fraction(1, size)
        return SelectionDistribution(
            {Selection(c): p for c in combinations(range(1, g.n + 1), k)}, g.n, k
        )
    return _mrp_distribution(g, k, spec.m, guard)


def _mrp_distribution(g: DirectedGraph, k: int, m: int, guard: int) -> SelectionDistribution:
    n = g.n
    paths = mrp_path_count(n, k, m)
    if paths > guard:
        raise EnumerationTooLarge(f"mrp:m={m} with n={n}, k={k}", paths, guard)
    small = k // m
    t_size = k - m * small
    big = small + (1 if t_size else 0)
    t_choices = list(combinations(range(1, m + 1), t_size))
    # common denominator: assignments * T-choices * every possible completion count
    fill_lcm = math.lcm(*(math.comb(n - kp, k - kp) for kp in range(k + 1)))
    denom = m**n * len(t_choices) * fill_lcm
    inn = g.in_neighbors
    agents = range(1, n + 1)
    weights: dict[tuple[int, ...], int] = defaultdict(int)

    for assignment in product(range(1, m + 1), repeat=n):
        ranked: list[list[int]] = [[] for _ in range(m + 1)]
        for i in agents:
            ranked[assignment[i - 1]].append(i)
        for t in range(1, m + 1):
            members = ranked[t]
            if len(members) > small:
                cross = {i: sum(1 for j in inn[i] if assignment[j - 1] != t) for i in members}
                members.sort(key=lambda i: (-cross[i], i))
        for big_parts in t_choices:
            chosen: list[int] = []
            for t in range(1, m + 1):
                chosen.extend(ranked[t][: big if t in big_parts else small])
            shortfall = k - len(chosen)
            if not shortfall:
                weights[tuple(sorted(chosen))] += fill_lcm
                continue
            taken = set(chosen)
            pool = [i for i in agents if i not in taken]
            share = fill_lcm // math.comb(len(pool), shortfall)
            for extra in combinations(pool, shortfall):
                weights[tuple(sorted(chosen + list(extra)))] += share

    return SelectionDistribution(
        {Selection(sel): Fraction(w, denom) for sel, w in weights.items()}, n, k
    )


def _sliding_distribution(g: DirectedGraph, guard: int) -> SelectionDistribution:
    n = g.n
    if n == 1:
        return SelectionDistribution.point_mass(Selection((1,)), 1)
    states = 2**n * n
    if states > guard:
        raise EnumerationTooLarge(f"sliding-partition state space with n={n}", states, guard)
    inn = g.in_neighbors
    full = (1 << n) - 1
    layer: dict[int, Fraction] = {0: Fraction(1)}
    for _ in range(n - 1):
        nxt: dict[int, Fraction] = defaultdict(Fraction)
        for eliminated, p in layer.items():
            scores = {}
            for i in range(1, n + 1):
                if not eliminated >> (i - 1) & 1:
                    scores[i] = sum(1 for j in inn[i] if eliminated >> (j - 1) & 1)
            low = min(scores.values())
            ties = [i for i, s in scores.items() if s == low]
            share = p / len(ties)
            for i in ties:
                nxt[eliminated | 1 << (i - 1)] += share
        layer = nxt
    outcomes = {}
    for eliminated, p in layer.items():
        survivor = (full ^ eliminated).bit_length()
        outcomes[Selection((survivor,))] = p
    return SelectionDistribution(outcomes, n, 1)
