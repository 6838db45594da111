"""Exhaustive search for deterministic SP selection rules on star graphs.

Star graphs whose edges all point at the hub ``n`` are encoded by vectors
``x`` in ``{0,1}^(n-1)``; vector index ``mask`` has ``x_i = (mask >> (i-1)) & 1``.
A rule is a table mapping each of the ``2^(n-1)`` vectors to a k-subset.
A table is *feasible* when

1. the hub is not selected on the empty star,
2. the hub is selected on every non-empty star, and
3. for every leaf ``i``, ``i``'s membership does not change when ``x_i`` flips.

A feasible table would be an SP rule with finite ratio on stars; the search
confirms none exists.  Every table satisfying (1) and (2) is also passed to
:func:`parity_audit`, which rederives the counting contradiction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Sequence

import numpy as np

from ..exact import EnumerationTooLarge

__all__ = [
    "ImpossibilityResult",
    "IncompleteTableError",
    "ParityReport",
    "count_feasible_backtrack",
    "count_feasible_brute",
    "impossibility_search",
    "parity_audit",
]

BRUTE_LIMIT = 4_000_000


class IncompleteTableError(ValueError):
    pass


@dataclass
class ParityReport:
    n: int
    k: int
    counts: dict[int, int]
    total: int
    constraints_1_2: bool
    strategyproof: bool

    @property
    def parities(self) -> dict[int, int]:
        return {i: c % 2 for i, c in self.counts.items()}

    @property
    def hub_count(self) -> int:
        return self.counts[self.n]

    @property
    def hub_odd(self) -> bool:
        return self.hub_count % 2 == 1

    @property
    def total_even(self) -> bool:
        return self.total % 2 == 0

    @property
    def odd_leaves(self) -> list[int]:
        return [i for i in range(1, self.n) if self.counts[i] % 2]

    @property
    def contradiction(self) -> bool:
        """Constraints 1-2 hold, so the hub count is odd and the total even, leaving an odd leaf."""
        return self.constraints_1_2 and self.hub_odd and self.total_even and bool(self.odd_leaves)

    def to_json(self) -> dict:
        return {
            "counts": {str(i): c for i, c in self.counts.items()},
            "parities": {str(i): p for i, p in self.parities.items()},
            "total": self.total,
            "hub_count": self.hub_count,
            "constraints_1_2": self.constraints_1_2,
            "strategyproof": self.strategyproof,
            "odd_leaves": self.odd_leaves,
            "contradiction": self.contradiction,
        }


def parity_audit(table: Sequence) -> ParityReport:
    """Membership counts and parities of a complete star-domain table.

    ``table[mask]`` is the selected set on the star encoded by ``mask``.
    """
    size = len(table)
    if size < 2 or size & (size - 1):
        raise IncompleteTableError(f"table must have 2^(n-1) entries, got {size}")
    if any(entry is None for entry in table):
        raise IncompleteTableError("table has missing entries")
    n = size.bit_length()
    sets = [frozenset(entry) for entry in table]
    sizes = {len(s) for s in sets}
    if len(sizes) != 1:
        raise IncompleteTableError(f"entries have differing sizes {sorted(sizes)}")
    k = sizes.pop()
    for s in sets:
        if not all(1 <= i <= n for i in s):
            raise IncompleteTableError(f"entry {sorted(s)} has agents outside 1..{n}")
    counts = {i: sum(1 for s in sets if i in s) for i in range(1, n + 1)}
    total = sum(len(s) for s in sets)
    c12 = n not in sets[0] and all(n in s for s in sets[1:])
    sp = all(
        (i in sets[x]) == (i in sets[x ^ (1 << (i - 1))])
        for i in range(1, n) for x in range(size)
    )
    return ParityReport(n, k, counts, total, c12, sp)


def _subsets(n: int, k: int) -> list[tuple[int, ...]]:
    return list(combinations(range(1, n + 1), k))


def count_feasible_brute(n: int, k: int, guard: int = BRUTE_LIMIT, chunk: int = 1 << 16) -> int:
    """Count feasible tables by checking every table (vectorised in chunks)."""
    subsets = _subsets(n, k)
    base = len(subsets)
    points = 1 << (n - 1)
    total = base**points
    if total > guard:
        raise EnumerationTooLarge(f"brute-force star tables for n={n}, k={k}", total, guard)
    member = np.zeros((base, n + 1), dtype=bool)
    for idx, s in enumerate(subsets):
        member[idx, list(s)] = True
    powers = base ** np.arange(points, dtype=np.int64)
    feasible = 0
    for start in range(0, total, chunk):
        ids = np.arange(start, min(start + chunk, total), dtype=np.int64)
        digits = (ids[:, None] // powers[None, :]) % base  # (tables, points)
        mem = member[digits]  # (tables, points, n+1)
        ok = ~mem[:, 0, n]
        ok &= mem[:, 1:, n].all(axis=1)
        for i in range(1, n):
            flip = np.arange(points) ^ (1 << (i - 1))
            ok &= (mem[:, :, i] == mem[:, flip, i]).all(axis=1)
        feasible += int(ok.sum())
    return feasible


def count_feasible_backtrack(n: int, k: int) -> int:
    """Count feasible tables by depth-first assignment with constraint pruning."""
    subsets = [frozenset(s) for s in _subsets(n, k)]
    points = 1 << (n - 1)
    table: list[frozenset | None] = [None] * points
    with_hub = [s for s in subsets if n in s]
    without_hub = [s for s in subsets if n not in s]

    def extend(x: int) -> int:
        if x == points:
            return 1
        count = 0
        for s in (without_hub if x == 0 else with_hub):
            consistent = True
            for i in range(1, n):
                y = x ^ (1 << (i - 1))
                if y < x and (i in s) != (i in table[y]):
                    consistent = False
                    break
            if consistent:
                table[x] = s
                count += extend(x + 1)
        table[x] = None
        return count

    return extend(0)


@dataclass
class ImpossibilityResult:
    n: int
    k: int
    tables_total: int
    feasible_count: int
    method: str
    candidates_total: int
    candidates_audited: int
    candidates_sampled: bool
    parity_reports: list[ParityReport] = field(default_factory=list)

    @property
    def all_contradictions(self) -> bool:
        return all(r.contradiction and not r.strategyproof for r in self.parity_reports)

    def to_json(self, include_candidates: bool = False) -> dict:
        out = {
            "n": self.n,
            "k": self.k,
            "tables_total": self.tables_total,
            "feasible_count": self.feasible_count,
            "method": self.method,
            "candidates_total": self.candidates_total,
            "candidates_audited": self.candidates_audited,
            "candidates_sampled": self.candidates_sampled,
            "parity_contradiction_on_all_audited": self.all_contradictions,
        }
        if include_candidates:
            out["candidates"] = [r.to_json() for r in self.parity_reports]
        else:
            out["candidate_parity_vectors"] = [
                [r.parities[i] for i in range(1, self.n + 1)] for r in self.parity_reports
            ]
        return out


def _candidates(n: int, k: int, limit: int, samples: int, seed: int):
    """Tables meeting constraints 1-2: all of them if few enough, else a seeded sample."""
    subsets = _subsets(n, k)
    first = [s for s in subsets if n not in s]
    rest = [s for s in subsets if n in s]
    points = 1 << (n - 1)
    total = len(first) * len(rest) ** (points - 1)
    if total <= limit:
        tables = ([a, *others] for a in first for others in product(rest, repeat=points - 1))
        return total, False, tables
    rng = np.random.default_rng(seed)
    tables = (
        [first[rng.integers(len(first))], *(rest[j] for j in rng.integers(len(rest), size=points - 1))]
        for _ in range(samples)
    )
    return total, True, tables


def impossibility_search(n: int, k: int, method: str = "auto", guard: int = BRUTE_LIMIT,
                         candidate_limit: int = 100_000, candidate_samples: int = 2_000,
                         seed: int = 0) -> ImpossibilityResult:
    """Count feasible star-domain tables for ``(n, k)`` and parity-audit the near misses."""
    if n < 2 or not 1 <= k <= n - 1:
        raise ValueError(f"need n >= 2 and 1 <= k <= n-1, got n={n}, k={k}")
    points = 1 << (n - 1)
    tables_total = math.comb(n, k) ** points
    if method == "auto":
        method = "brute" if tables_total <= guard else "backtrack"
    if method == "brute":
        feasible = count_feasible_brute(n, k, guard)
    elif method == "backtrack":
        feasible = count_feasible_backtrack(n, k)
    else:
        raise ValueError(f"unknown method {method!r}")
    cand_total, sampled, tables = _candidates(n, k, candidate_limit, candidate_samples, seed)
    reports = [parity_audit(t) for t in tables]
    return ImpossibilityResult(n, k, tables_total, feasible, method, cand_total, len(reports),
                               sampled, reports)
