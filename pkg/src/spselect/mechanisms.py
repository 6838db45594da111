"""k-selection mechanisms on approval graphs.

Every randomized mechanism here is a deterministic *core* applied to an
explicit randomness record, plus a thin sampler that draws the record from a
seeded generator.  The exact engine enumerates the records; the samplers are
used for single runs and Monte Carlo.

Seed expansion: every sampler builds ``numpy.random.default_rng(seed)``
(PCG64 seeded through ``SeedSequence``), which produces the same stream on
every platform.  The order of draws is documented on each sampler and is part
of the reproducibility contract.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .graph import DirectedGraph

__all__ = [
    "MechanismError",
    "MechanismSpec",
    "Selection",
    "MRPRandomness",
    "parse_mechanism",
    "optimal_select",
    "random_subset",
    "mrp_step3",
    "m_rp_core",
    "m_rp",
    "edge_scan",
    "sliding_partition_core",
    "sliding_partition",
    "run_mechanism",
    "sample_membership",
    "unrank_combination",
]

KINDS = ("optimal", "random-subset", "mrp", "edge-scan", "sliding-partition")
RANDOMIZED = frozenset({"random-subset", "mrp", "sliding-partition"})


class MechanismError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Selection:
    """A set of selected agents, stored as a sorted tuple."""

    members: tuple[int, ...]

    def __post_init__(self):
        members = tuple(sorted(int(i) for i in self.members))
        if len(set(members)) != len(members):
            raise MechanismError(f"selection has repeated agents: {members}")
        object.__setattr__(self, "members", members)

    @property
    def k(self) -> int:
        return len(self.members)

    def __contains__(self, agent) -> bool:
        return agent in self.members

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def total_indegree(self, g: DirectedGraph) -> int:
        deg = g.indegrees
        return sum(deg[i] for i in self.members)


@dataclass(frozen=True)
class MechanismSpec:
    """Closed description of one mechanism instance.

    ``k`` may be left unset and supplied at call time via :meth:`with_k`.
    ``m`` is only meaningful for ``mrp``.
    """

    kind: str
    k: int | None = None
    m: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise MechanismError(f"unknown mechanism kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "mrp":
            if self.m is None or self.m < 1:
                raise MechanismError(f"mrp requires m >= 1, got m={self.m}")
        elif self.m is not None:
            raise MechanismError(f"{self.kind} takes no m parameter")
        if self.kind == "sliding-partition" and self.k not in (None, 1):
            raise MechanismError("sliding-partition selects exactly one agent (k=1)")
        if self.k is not None and self.k < 1:
            raise MechanismError(f"k must be positive, got {self.k}")

    def with_k(self, k: int | None) -> "MechanismSpec":
        if k is None or k == self.k:
            return self
        return MechanismSpec(self.kind, k, self.m)

    @property
    def randomized(self) -> bool:
        return self.kind in RANDOMIZED

    @property
    def exact_k(self) -> bool:
        """True when every outcome has exactly ``k`` members."""
        return self.kind != "edge-scan"

    def __str__(self) -> str:
        return f"mrp:m={self.m}" if self.kind == "mrp" else self.kind


_MRP_RE = re.compile(r"^mrp:m=(\d+)$")


def parse_mechanism(text: str, k: int | None = None) -> MechanismSpec:
    """Parse ``optimal``, ``random-subset``, ``mrp:m=<int>``, ``edge-scan`` or ``sliding-partition``."""
    text = text.strip()
    match = _MRP_RE.match(text)
    if match:
        return MechanismSpec("mrp", k, int(match.group(1)))
    if text in KINDS and text != "mrp":
        if text == "sliding-partition":
            return MechanismSpec(text, 1 if k is None else k)
        if text == "edge-scan":
            return MechanismSpec(text, None)
        return MechanismSpec(text, k)
    raise MechanismError(f"cannot parse mechanism {text!r}")


def _check_k(g: DirectedGraph, k: int) -> None:
    if not 1 <= k <= g.n:
        raise MechanismError(f"k must satisfy 1 <= k <= n={g.n}, got {k}")


def optimal_select(g: DirectedGraph, k: int, prefer: str = "high") -> Selection:
    """The ``k`` agents of largest indegree.

    Equal indegrees are ordered by agent index: ``prefer="high"`` (default)
    favours the larger index, ``prefer="low"`` the smaller one.  The default
    reproduces the figure-2 optimum ``{2, 5}`` (agents 1 and 5 tie there).

    >>> from spselect.graph import gen_named
    >>> optimal_select(gen_named("figure2"), 2).members
    (2, 5)
    """
    _check_k(g, k)
    if prefer not in ("high", "low"):
        raise MechanismError(f"prefer must be 'high' or 'low', got {prefer!r}")
    sign = -1 if prefer == "high" else 1
    deg = g.indegrees
    order = sorted(g.agents, key=lambda i: (-deg[i], sign * i))
    return Selection(tuple(order[:k]))


def random_subset(g: DirectedGraph, k: int, seed: int = 0) -> Selection:
    """Uniform k-subset, ignoring the edges.

    Draws: one ``rng.permutation(n)``; the first ``k`` entries are selected.
    """
    _check_k(g, k)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(g.n)[:k] + 1
    return Selection(tuple(perm.tolist()))


def unrank_combination(pool: Sequence[int], r: int, index: int) -> tuple[int, ...]:
    """The ``index``-th ``r``-subset of ``pool`` in ``itertools.combinations`` order."""
    size = len(pool)
    total = math.comb(size, r)
    if not 0 <= index < total:
        raise MechanismError(f"combination index {index} outside 0..{total - 1}")
    out = []
    start = 0
    for remaining in range(r, 0, -1):
        for pos in range(start, size):
            # subsets that pick pool[pos] next
            block = math.comb(size - pos - 1, remaining - 1)
            if index < block:
                out.append(pool[pos])
                start = pos + 1
                break
            index -= block
    return tuple(out)


@dataclass(frozen=True)
class MRPRandomness:
    """All random choices of one m-RP run.

    ``assignment[i-1]`` is the part (1..m) of agent ``i``.  ``big_set_indices``
    are the parts that contribute ``ceil(k/m)`` agents.  ``fill_choice`` indexes
    the completion set among the lexicographically ordered ``(k-k')``-subsets
    of the agents not selected from the parts; it must be ``None`` exactly
    when no completion is needed.
    """

    assignment: tuple[int, ...]
    big_set_indices: frozenset = field(default_factory=frozenset)
    fill_choice: int | None = None


def _mrp_quotas(k: int, m: int) -> tuple[int, int, int]:
    small = k // m
    return small, small + (1 if k % m else 0), k - m * small


def mrp_step3(g: DirectedGraph, k: int, m: int, assignment: Sequence[int],
              big_set_indices) -> list[int]:
    """Agents picked from the parts (before any uniform completion)."""
    n = g.n
    if len(assignment) != n:
        raise MechanismError(f"assignment has length {len(assignment)}, expected {n}")
    small, big, t_size = _mrp_quotas(k, m)
    big_set_indices = frozenset(big_set_indices)
    if len(big_set_indices) != t_size or not all(1 <= t <= m for t in big_set_indices):
        raise MechanismError(
            f"big_set_indices must be a {t_size}-subset of 1..{m}, got {sorted(big_set_indices)}"
        )
    parts: list[list[int]] = [[] for _ in range(m + 1)]
    for i, part in enumerate(assignment, start=1):
        if not 1 <= part <= m:
            raise MechanismError(f"agent {i} assigned to part {part} outside 1..{m}")
        parts[part].append(i)
    inn = g.in_neighbors
    chosen: list[int] = []
    for t in range(1, m + 1):
        members = parts[t]
        if not members:
            continue
        quota = big if t in big_set_indices else small
        if quota == 0:
            continue
        if len(members) <= quota:
            chosen.extend(members)
            continue
        cross = {i: sum(1 for j in inn[i] if assignment[j - 1] != t) for i in members}
        members = sorted(members, key=lambda i: (-cross[i], i))
        chosen.extend(members[:quota])
    return chosen


def m_rp_core(g: DirectedGraph, k: int, m: int, r: MRPRandomness) -> Selection:
    """Random m-Partition applied to fixed randomness ``r``."""
    _check_k(g, k)
    chosen = mrp_step3(g, k, m, r.assignment, r.big_set_indices)
    shortfall = k - len(chosen)
    if shortfall == 0:
        if r.fill_choice is not None:
            raise MechanismError("fill_choice given but no completion is needed")
        return Selection(tuple(chosen))
    if r.fill_choice is None:
        raise MechanismError(f"completion of {shortfall} agents needed but fill_choice is None")
    taken = set(chosen)
    pool = [i for i in g.agents if i not in taken]
    return Selection(tuple(chosen) + unrank_combination(pool, shortfall, r.fill_choice))


def m_rp(g: DirectedGraph, k: int, m: int, seed: int = 0) -> Selection:
    """Sample m-RP.

    Draws, in order: ``rng.integers(1, m+1, size=n)`` for the assignment;
    ``rng.choice(m, size=k mod m, replace=False)`` for the big parts; and,
    only when a completion is needed, ``rng.integers(C(u, r))`` for the
    completion index.
    """
    _check_k(g, k)
    if m < 1:
        raise MechanismError(f"m must be >= 1, got {m}")
    rng = np.random.default_rng(seed)
    r = _draw_mrp_randomness(g, k, m, rng)
    return m_rp_core(g, k, m, r)


def _draw_mrp_randomness(g: DirectedGraph, k: int, m: int, rng) -> MRPRandomness:
    n = g.n
    assignment = tuple(rng.integers(1, m + 1, size=n).tolist())
    t_size = k - m * (k // m)
    big = frozenset((rng.choice(m, size=t_size, replace=False) + 1).tolist())
    shortfall = k - len(mrp_step3(g, k, m, assignment, big))
    fill = None
    if shortfall:
        fill = int(rng.integers(math.comb(n - (k - shortfall), shortfall)))
    return MRPRandomness(assignment, big, fill)


def edge_scan(g: DirectedGraph) -> Selection:
    """Deterministic scan selecting one or two agents."""
    if g.n < 2:
        raise MechanismError("edge-scan needs at least two agents")
    forward = [(u, v) for u, v in g.edges if u < v]
    backward = [(u, v) for u, v in g.edges if u > v]
    if forward:
        first = min(u for u, _ in forward)
        left_pick = min(v for u, v in forward if u == first)
    else:
        left_pick = g.n
    if backward:
        last = max(u for u, _ in backward)
        right_pick = max(v for u, v in backward if u == last)
    else:
        right_pick = 1
    return Selection(tuple({left_pick, right_pick}))


def sliding_partition_core(g: DirectedGraph, uniforms: Sequence[float]) -> Selection:
    """Sliding Partition with tie-breaks driven by ``uniforms`` (``n-1`` values in [0, 1)).

    At step ``s`` the eliminated agent is the ``floor(uniforms[s] * |B|)``-th
    entry of the minimum-score bucket ``B``.  Buckets are kept with swap-remove,
    so the entry order is implementation-defined but deterministic.
    """
    n = g.n
    if n == 1:
        return Selection((1,))
    if len(uniforms) < n - 1:
        raise MechanismError(f"need {n - 1} tie-break uniforms, got {len(uniforms)}")
    out = g.out_neighbors
    score = [0] * (n + 1)
    where = [0] * (n + 1)
    buckets: list[list[int]] = [[] for _ in range(n)]
    buckets[0] = list(range(1, n + 1))
    for i in range(1, n + 1):
        where[i] = i - 1
    alive = [True] * (n + 1)
    low = 0

    def take(bucket: list[int], pos: int) -> int:
        agent = bucket[pos]
        last = bucket.pop()
        if last != agent:
            bucket[pos] = last
            where[last] = pos
        return agent

    for step in range(n - 1):
        while not buckets[low]:
            low += 1
        bucket = buckets[low]
        pick = take(bucket, min(int(uniforms[step] * len(bucket)), len(bucket) - 1))
        alive[pick] = False
        for j in out[pick]:
            if alive[j]:
                take(buckets[score[j]], where[j])
                score[j] += 1
                dest = buckets[score[j]]
                where[j] = len(dest)
                dest.append(j)
    survivor = next(i for i in range(1, n + 1) if alive[i])
    return Selection((survivor,))


def sliding_partition(g: DirectedGraph, seed: int = 0) -> Selection:
    """Sample Sliding Partition.  Draws: one ``rng.random(n-1)`` vector of tie-break uniforms."""
    rng = np.random.default_rng(seed)
    return sliding_partition_core(g, rng.random(max(g.n - 1, 0)).tolist())


def run_mechanism(spec: MechanismSpec, g: DirectedGraph, seed: int = 0) -> Selection:
    """One run of ``spec`` on ``g``."""
    kind = spec.kind
    if kind == "edge-scan":
        return edge_scan(g)
    if kind == "sliding-partition":
        return sliding_partition(g, seed)
    if spec.k is None:
        raise MechanismError(f"{kind} needs k")
    if kind == "optimal":
        return optimal_select(g, spec.k)
    if kind == "random-subset":
        return random_subset(g, spec.k, seed)
    return m_rp(g, spec.k, spec.m, seed)


# --- batched sampling for Monte Carlo ------------------------------------

def sample_membership(spec: MechanismSpec, g: DirectedGraph, trials: int, rng,
                      chunk: int = 4096) -> np.ndarray:
    """Boolean ``(trials, n)`` matrix; row ``t`` marks the agents selected in trial ``t``.

    Draws are batched and do not replay single-run samplers seed-for-seed;
    the outcome distribution is the same (checked against the exact engine).
    """
    n = g.n
    out = np.zeros((trials, n), dtype=bool)
    kind = spec.kind
    if kind in ("optimal", "edge-scan"):
        sel = run_mechanism(spec, g)
        out[:, [i - 1 for i in sel]] = True
        return out
    for start in range(0, trials, chunk):
        size = min(chunk, trials - start)
        if kind == "random-subset":
            _check_k(g, spec.k)
            keys = rng.random((size, n))
            picked = np.argpartition(keys, spec.k - 1, axis=1)[:, :spec.k]
            np.put_along_axis(out[start:start + size], picked, True, axis=1)
        elif kind == "mrp":
            out[start:start + size] = _sample_mrp_block(g, spec.k, spec.m, size, rng)
        else:
            uniforms = rng.random((size, max(n - 1, 0)))
            for row in range(size):
                sel = sliding_partition_core(g, uniforms[row])
                out[start + row, sel.members[0] - 1] = True
    return out


def _sample_mrp_block(g: DirectedGraph, k: int, m: int, size: int, rng) -> np.ndarray:
    _check_k(g, k)
    n = g.n
    small, big, t_size = _mrp_quotas(k, m)
    parts = rng.integers(0, m, size=(size, n))
    src, dst = g.edge_arrays
    cross = np.zeros((size, n), dtype=np.int64)
    if len(src):
        is_cross = parts[:, src] != parts[:, dst]
        flat = (np.arange(size)[:, None] * n + dst[None, :])[is_cross]
        cross = np.bincount(flat, minlength=size * n).reshape(size, n)
    if t_size:
        big_parts = np.argpartition(rng.random((size, m)), t_size - 1, axis=1)[:, :t_size]
        quota = np.full((size, m), small, dtype=np.int64)
        np.put_along_axis(quota, big_parts, big, axis=1)
    else:
        quota = np.full((size, m), small, dtype=np.int64)
    agent = np.broadcast_to(np.arange(n), (size, n))
    # sort within each row by (part, -cross, index)
    order = np.lexsort((agent, -cross, parts), axis=1)
    sorted_parts = np.take_along_axis(parts, order, axis=1)
    # rank of each sorted entry inside its part
    counts = np.stack([(parts == t).sum(axis=1) for t in range(m)], axis=1)
    starts = np.cumsum(counts, axis=1) - counts
    rank = np.arange(n)[None, :] - np.take_along_axis(starts, sorted_parts, axis=1)
    keep_sorted = rank < np.take_along_axis(quota, sorted_parts, axis=1)
    chosen = np.zeros((size, n), dtype=bool)
    np.put_along_axis(chosen, order, keep_sorted, axis=1)
    shortfall = k - chosen.sum(axis=1)
    if shortfall.any():
        keys = rng.random((size, n))
        keys[chosen] = np.inf
        ranks = np.argsort(np.argsort(keys, axis=1), axis=1)
        chosen |= ranks < shortfall[:, None]
    return chosen
