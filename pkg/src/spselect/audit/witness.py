"""Lower-bound constructions executed against a concrete mechanism.

The bounds hold for every SP (resp. GSP) mechanism.  Here the construction is
carried out step by step on one mechanism with exact probabilities, so a
pass is evidence for the bound on that mechanism and a failure points at a
broken premise.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..exact import DEFAULT_GUARD, exact_distribution, selection_probabilities
from ..graph import DirectedGraph, gen_cycle, serialize_graph
from ..mechanisms import MechanismSpec
from .ratio import approx_ratio_exact
from .report import encode_value

__all__ = ["WitnessReport", "cycle_lower_bound_witness", "gsp_lower_bound_witness"]


@dataclass
class WitnessReport:
    construction: str
    mechanism: str
    n: int
    k: int
    bound: Fraction
    witness_ratio: object
    holds: bool
    premise_ok: bool
    graphs: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "construction": self.construction,
            "mechanism": self.mechanism,
            "n": self.n,
            "k": self.k,
            "bound": encode_value(self.bound),
            "witness_ratio": encode_value(self.witness_ratio),
            "holds": self.holds,
            "premise_ok": self.premise_ok,
            "graphs": {name: serialize_graph(g) for name, g in self.graphs.items()},
            "details": encode_value(self.details),
        }


def _probs(spec: MechanismSpec, g: DirectedGraph, guard: int) -> dict[int, Fraction]:
    return selection_probabilities(exact_distribution(spec, g, guard))


def cycle_lower_bound_witness(spec: MechanismSpec, n: int, k: int | None = None,
                              guard: int = DEFAULT_GUARD) -> WitnessReport:
    """Cycle on agents ``1..k+1``; the least-likely cycle agent drops its edge.

    On the reduced graph any SP mechanism has ratio at least ``1 + 1/(k^2+k-1)``.
    """
    spec = spec.with_k(k)
    k = spec.k
    g = gen_cycle(k, n)
    probs = _probs(spec, g, guard)
    cycle = range(1, k + 2)
    threshold = Fraction(k, k + 1)
    agent = min(cycle, key=lambda i: (probs[i], i))
    bound = 1 + Fraction(1, k * k + k - 1)
    if probs[agent] > threshold:
        return WitnessReport("cycle", str(spec), n, k, bound, None, False, False, {"G": g},
                             {"reason": "no cycle agent has probability <= k/(k+1)",
                              "probabilities": probs})
    reduced = g.with_out_edges(agent, [])
    probs_reduced = _probs(spec, reduced, guard)
    ratio_g = approx_ratio_exact(spec, g, guard=guard).ratio
    ratio_reduced = approx_ratio_exact(spec, reduced, guard=guard).ratio
    premise = probs_reduced[agent] == probs[agent]
    return WitnessReport(
        "cycle", str(spec), n, k, bound, ratio_reduced, ratio_reduced >= bound, premise,
        {"G": g, "G_prime": reduced},
        {
            "deviating_agent": agent,
            "probability_G": probs[agent],
            "probability_G_prime": probs_reduced[agent],
            "threshold": threshold,
            "ratio_G": ratio_g,
            "ratio_G_prime": ratio_reduced,
        },
    )


def gsp_lower_bound_witness(spec: MechanismSpec, n: int, k: int | None = None,
                            guard: int = DEFAULT_GUARD) -> WitnessReport:
    """Two least-likely agents on the empty graph; mutual edges, then a single edge.

    Any GSP mechanism has ratio at least ``(n-1)/k`` on the final single-edge graph.
    """
    if n < 2:
        raise ValueError("the construction needs at least two agents")
    spec = spec.with_k(k)
    k = spec.k
    empty = DirectedGraph(n, frozenset())
    probs = _probs(spec, empty, guard)
    a, b = sorted(range(1, n + 1), key=lambda i: (probs[i], i))[:2]
    cap = Fraction(k, n - 1)
    mutual = DirectedGraph(n, frozenset({(a, b), (b, a)}))
    probs_mutual = _probs(spec, mutual, guard)
    # GSP: the pair cannot both strictly gain, so one of them did not gain
    gainers = [i for i in (a, b) if probs_mutual[i] > probs[i]]
    coalition_gain = len(gainers) == 2
    i = a if a not in gainers else b
    j = b if i == a else a
    single = DirectedGraph(n, frozenset({(j, i)}))
    probs_single = _probs(spec, single, guard)
    ratio = approx_ratio_exact(spec, single, guard=guard).ratio
    bound = Fraction(n - 1, k)
    premise = probs[a] <= cap and probs[b] <= cap and not coalition_gain
    return WitnessReport(
        "gsp", str(spec), n, k, bound, ratio, ratio >= bound, premise,
        {"empty": empty, "G_prime": mutual, "G_double_prime": single},
        {
            "pair": [a, b],
            "target": i,
            "voter": j,
            "cap": cap,
            "probability_empty": {a: probs[a], b: probs[b]},
            "probability_G_prime": {a: probs_mutual[a], b: probs_mutual[b]},
            "probability_G_double_prime": probs_single[i],
            "coalition_strictly_gains": coalition_gain,
        },
    )
