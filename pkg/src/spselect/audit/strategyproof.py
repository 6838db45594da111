"""Exhaustive strategyproofness and group-strategyproofness audits.

A check quantifies over true graphs (the *scope*), deviating agents or
coalitions, and every alternative report of the deviators' outgoing edges.
Probabilities come from the exact engine and are compared for exact equality.
"""
from __future__ import annotations

import time
from fractions import Fraction
from itertools import combinations, product
from typing import Iterable, Sequence

import numpy as np

from ..exact import DEFAULT_GUARD, exact_distribution, format_fraction, selection_probabilities
from ..graph import DirectedGraph, gen_random, parse_graph, serialize_graph
from ..mechanisms import MechanismSpec
from .report import HOLDS, INCONCLUSIVE, VIOLATED, AuditReport

__all__ = ["ScopeTooLarge", "check_sp", "check_gsp", "replay", "sample_scope"]

MAX_EXHAUSTIVE_AGENTS = 4


class ScopeTooLarge(RuntimeError):
    pass


class _Universe:
    """Graphs on ``n`` agents indexed by edge bitmask, with cached probabilities."""

    def __init__(self, spec: MechanismSpec, n: int, guard: int):
        self.spec = spec
        self.n = n
        self.guard = guard
        self.pairs = [(u, v) for u in range(1, n + 1) for v in range(1, n + 1) if u != v]
        self.bit = {p: b for b, p in enumerate(self.pairs)}
        self.out_mask = [0] * (n + 1)
        for (u, _), b in self.bit.items():
            self.out_mask[u] |= 1 << b
        self._cache: dict[int, tuple[Fraction, ...]] = {}

    def graph(self, mask: int) -> DirectedGraph:
        return DirectedGraph(self.n, frozenset(p for b, p in enumerate(self.pairs) if mask >> b & 1))

    def mask(self, g: DirectedGraph) -> int:
        return sum(1 << self.bit[e] for e in g.edges)

    def probs(self, mask: int) -> tuple[Fraction, ...]:
        """``Pr[i selected]`` for agents ``1..n`` (slot 0 unused)."""
        cached = self._cache.get(mask)
        if cached is None:
            dist = exact_distribution(self.spec, self.graph(mask), self.guard)
            p = selection_probabilities(dist)
            cached = (Fraction(0),) + tuple(p[i] for i in range(1, self.n + 1))
            self._cache[mask] = cached
        return cached

    def reports(self, agent: int) -> list[int]:
        """Every possible outgoing-edge bitmask of ``agent``, ascending."""
        bits = [self.bit[(agent, v)] for v in range(1, self.n + 1) if v != agent]
        out = []
        for choice in range(1 << len(bits)):
            out.append(sum(1 << b for j, b in enumerate(bits) if choice >> j & 1))
        return sorted(out)


def _resolve_scope(universe: _Universe, scope, max_agents: int) -> tuple[list[int], str]:
    if isinstance(scope, str):
        if scope != "all":
            raise ValueError(f"scope must be 'all' or a list of graphs, got {scope!r}")
        if universe.n > max_agents:
            raise ScopeTooLarge(
                f"exhaustive scope over all graphs needs n <= {max_agents}, got n={universe.n}"
            )
        return list(range(1 << len(universe.pairs))), "all"
    masks = []
    for g in scope:
        if g.n != universe.n:
            raise ValueError(f"scope graph has {g.n} agents, audit is for n={universe.n}")
        masks.append(universe.mask(g))
    return masks, "list"


def _agent_label(u: _Universe, mask: int, agents: Sequence[int]):
    return {str(i): format_fraction(u.probs(mask)[i]) for i in agents}


def _counterexample(u: _Universe, true_mask: int, fake_mask: int, coalition: Sequence[int]) -> dict:
    return {
        "graph": serialize_graph(u.graph(true_mask)),
        "coalition": list(coalition),
        "reported_graph": serialize_graph(u.graph(fake_mask)),
        "before": _agent_label(u, true_mask, coalition),
        "after": _agent_label(u, fake_mask, coalition),
    }


def check_sp(spec: MechanismSpec, n: int, k: int | None = None, scope="all",
             guard: int = DEFAULT_GUARD, max_agents: int = MAX_EXHAUSTIVE_AGENTS,
             sampled: bool = False) -> AuditReport:
    """Does any agent change its own selection probability by misreporting?

    ``scope`` is ``"all"`` (every graph on ``n`` agents) or an iterable of
    graphs.  Graphs, agents and reports are scanned in ascending order, so
    the returned counterexample is the first one in that order.  Pass
    ``sampled=True`` for randomly drawn scopes: a clean run is then reported
    as ``inconclusive``.
    """
    start = time.perf_counter()
    spec = spec.with_k(k)
    u = _Universe(spec, n, guard)
    masks, scope_kind = _resolve_scope(u, scope, max_agents)
    reports = {i: u.reports(i) for i in range(1, n + 1)}
    found = None
    for mask in masks:
        base = u.probs(mask)
        for i in range(1, n + 1):
            stripped = mask & ~u.out_mask[i]
            for rep in reports[i]:
                fake = stripped | rep
                if fake != mask and u.probs(fake)[i] != base[i]:
                    found = _counterexample(u, mask, fake, [i])
                    break
            if found:
                break
        if found:
            break
    verdict = VIOLATED if found else (INCONCLUSIVE if sampled else HOLDS)
    return AuditReport("sp", str(spec), n, spec.k, verdict, len(masks), found,
                       time.perf_counter() - start, {"scope": scope_kind})


def check_gsp(spec: MechanismSpec, n: int, k: int | None = None, coalition_size: int = 2,
              scope="all", guard: int = DEFAULT_GUARD, max_agents: int = MAX_EXHAUSTIVE_AGENTS,
              sampled: bool = False) -> AuditReport:
    """Can a coalition of at most ``coalition_size`` agents all strictly gain by a joint misreport?"""
    if coalition_size < 1:
        raise ValueError("coalition_size must be at least 1")
    if coalition_size > 2 and scope == "all":
        raise ScopeTooLarge("exhaustive GSP audits support coalitions of at most two agents")
    start = time.perf_counter()
    spec = spec.with_k(k)
    u = _Universe(spec, n, guard)
    masks, scope_kind = _resolve_scope(u, scope, max_agents)
    reports = {i: u.reports(i) for i in range(1, n + 1)}
    coalitions = [c for size in range(1, min(coalition_size, n) + 1)
                  for c in combinations(range(1, n + 1), size)]
    found = None
    for mask in masks:
        base = u.probs(mask)
        for coalition in coalitions:
            stripped = mask
            for i in coalition:
                stripped &= ~u.out_mask[i]
            for joint in product(*(reports[i] for i in coalition)):
                fake = stripped
                for rep in joint:
                    fake |= rep
                if fake == mask:
                    continue
                after = u.probs(fake)
                if all(after[i] > base[i] for i in coalition):
                    found = _counterexample(u, mask, fake, coalition)
                    break
            if found:
                break
        if found:
            break
    verdict = VIOLATED if found else (INCONCLUSIVE if sampled else HOLDS)
    return AuditReport("gsp", str(spec), n, spec.k, verdict, len(masks), found,
                       time.perf_counter() - start,
                       {"scope": scope_kind, "coalition_size": coalition_size})


def replay(report: AuditReport, spec: MechanismSpec, guard: int = DEFAULT_GUARD) -> bool:
    """Recompute a counterexample; True if the violation reproduces."""
    if report.counterexample is None:
        return False
    ce = report.counterexample
    spec = spec.with_k(report.k)
    true_g = parse_graph(ce["graph"])
    fake_g = parse_graph(ce["reported_graph"])
    coalition = ce["coalition"]
    outsiders = [i for i in range(1, true_g.n + 1) if i not in coalition]
    for i in outsiders:
        if true_g.out_neighbors[i] != fake_g.out_neighbors[i]:
            return False
    before = selection_probabilities(exact_distribution(spec, true_g, guard))
    after = selection_probabilities(exact_distribution(spec, fake_g, guard))
    if report.check == "sp":
        return before[coalition[0]] != after[coalition[0]]
    return all(after[i] > before[i] for i in coalition)


def sample_scope(n: int, count: int, seed: int = 0) -> list[DirectedGraph]:
    """``count`` random graphs on ``n`` agents with edge density drawn uniformly per graph."""
    rng = np.random.default_rng(seed)
    return [gen_random(n, float(rng.random()), int(rng.integers(2**31))) for _ in range(count)]
