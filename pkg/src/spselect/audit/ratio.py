"""Optimum value and approximation ratios, exact and Monte Carlo."""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from ..exact import DEFAULT_GUARD, exact_distribution, expected_total_indegree
from ..graph import DirectedGraph
from ..mechanisms import MechanismError, MechanismSpec, sample_membership
from .report import INFINITE, RatioEstimate

__all__ = ["opt_value", "approx_ratio_exact", "approx_ratio_mc", "Z99"]

# two-sided 99% normal quantile
Z99 = 2.5758293035489004


def opt_value(g: DirectedGraph, k: int) -> int:
    """Largest total indegree of any ``k`` agents."""
    if not 1 <= k <= g.n:
        raise MechanismError(f"k must satisfy 1 <= k <= n={g.n}, got {k}")
    return sum(sorted(g.indegrees[1:], reverse=True)[:k])


def _ratio(opt, expected):
    if opt == 0:
        return Fraction(1)
    if expected == 0:
        return INFINITE
    return Fraction(opt) / expected


def approx_ratio_exact(spec: MechanismSpec, g: DirectedGraph, k: int | None = None,
                       guard: int = DEFAULT_GUARD) -> RatioEstimate:
    """Exact ratio; ``1`` when the optimum is zero, :data:`INFINITE` when only the mechanism scores zero."""
    spec = spec.with_k(k)
    k = spec.k if spec.k is not None else k
    if k is None:
        raise MechanismError("approximation ratio needs k")
    opt = opt_value(g, k)
    expected = expected_total_indegree(g, exact_distribution(spec, g, guard))
    return RatioEstimate(_ratio(opt, expected), "exact", opt, expected)


def approx_ratio_mc(spec: MechanismSpec, g: DirectedGraph, k: int | None = None,
                    trials: int = 10_000, seed: int = 0) -> RatioEstimate:
    """Monte Carlo ratio with a 99% interval from the normal approximation to the mean."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    spec = spec.with_k(k)
    k = spec.k if spec.k is not None else k
    if k is None:
        raise MechanismError("approximation ratio needs k")
    opt = opt_value(g, k)
    rng = np.random.default_rng(seed)
    members = sample_membership(spec, g, trials, rng)
    deg = np.asarray(g.indegrees[1:], dtype=np.int64)
    totals = members.astype(np.int64) @ deg
    mean = float(totals.mean())
    se = float(totals.std(ddof=1)) / math.sqrt(trials) if trials > 1 else 0.0
    lo_mean, hi_mean = mean - Z99 * se, mean + Z99 * se
    if opt == 0:
        return RatioEstimate(1.0, "monte_carlo", 0, mean, trials, 1.0, 1.0)
    ratio = opt / mean if mean > 0 else INFINITE
    ci_low = opt / hi_mean if hi_mean > 0 else INFINITE
    ci_high = opt / lo_mean if lo_mean > 0 else INFINITE
    if se == 0 and mean > 0:
        ci_low = ci_high = ratio
    return RatioEstimate(ratio, "monte_carlo", opt, mean, trials, ci_low, ci_high)
