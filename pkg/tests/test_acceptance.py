"""Acceptance gate: one test per exit criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` (or execute this file);
the collected lines are repeated in the terminal summary.
"""
import random
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import binom

from oracles import brute_mrp, mrp_single_edge_probability
from spselect.audit import (
    approx_ratio_exact,
    approx_ratio_mc,
    check_gsp,
    check_sp,
    cycle_lower_bound_witness,
    gsp_lower_bound_witness,
    impossibility_search,
    replay,
)
from spselect.cli import mrp_parts_for
from spselect.exact import exact_distribution, selection_probabilities
from spselect.graph import (
    DirectedGraph,
    gen_named,
    gen_random,
    gen_single_edge,
    gen_sliding_counterexample,
    gen_star,
    parse_graph,
)
from spselect.mechanisms import MechanismSpec, edge_scan, optimal_select, sample_membership

LINES = []


def record(label, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {label}: {detail}"
    LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_01_golden_instances():
    f2, f4 = gen_named("figure2"), gen_named("figure4")
    t0 = time.perf_counter()
    opt = optimal_select(f2, 2)
    t1 = time.perf_counter()
    scan = edge_scan(f4)
    t2 = time.perf_counter()
    ok = (opt.members == (2, 5) and opt.total_indegree(f2) == 5 and scan.members == (3, 4)
          and t1 - t0 < 1e-3 and t2 - t1 < 1e-3)
    record("1", ok, f"optimal(figure2,k=2)={set(opt.members)} value {opt.total_indegree(f2)} "
                    f"[{(t1 - t0) * 1e3:.3f} ms]; edge-scan(figure4)={set(scan.members)} "
                    f"[{(t2 - t1) * 1e3:.3f} ms]")


def test_criterion_02_impossibility():
    details = []
    ok = True
    for n, k in [(2, 1), (3, 1), (3, 2), (4, 1), (4, 3), (4, 2)]:
        t0 = time.perf_counter()
        result = impossibility_search(n, k)
        elapsed = time.perf_counter() - t0
        parity_ok = all(
            r.hub_count == 2 ** (n - 1) - 1 and r.hub_odd and r.total_even and r.contradiction
            and not r.strategyproof
            for r in result.parity_reports
        )
        ok &= result.feasible_count == 0 and parity_ok and result.candidates_audited > 0
        if (n, k) == (4, 2):
            ok &= elapsed < 60
        details.append(f"({n},{k}): {result.feasible_count}/{result.tables_total} feasible, "
                       f"{result.candidates_audited} candidates contradict [{elapsed:.1f}s]")
    record("2", ok, "; ".join(details))


def test_criterion_03_sp_audits():
    t0 = time.perf_counter()
    failures = []
    checked = 0
    for m in (2, 3):
        for n in (2, 3, 4):
            for k in range(1, n):
                report = check_sp(MechanismSpec("mrp", m=m), n, k)
                checked += 1
                if not report.holds or report.instances != 2 ** (n * (n - 1)):
                    failures.append(f"mrp:m={m} n={n} k={k}")
    for n in (2, 3, 4):
        for spec, k in ((MechanismSpec("edge-scan"), None), (MechanismSpec("sliding-partition"), 1)):
            report = check_sp(spec, n, k)
            checked += 1
            if not report.holds:
                failures.append(f"{spec} n={n}")
    mutual = DirectedGraph(2, frozenset({(1, 2), (2, 1)}))
    bad = check_sp(MechanismSpec("optimal"), 2, 1, [mutual])
    ce = bad.counterexample or {}
    deviator = ce.get("coalition", [None])[0]
    counter_ok = (
        bad.verdict == "violated"
        and parse_graph(ce["graph"]) == mutual
        and parse_graph(ce["reported_graph"]) == mutual.with_out_edges(deviator, [])
        and ce["before"][str(deviator)] == "0/1" and ce["after"][str(deviator)] == "1/1"
        and replay(bad, MechanismSpec("optimal"))
    )
    elapsed = time.perf_counter() - t0
    ok = not failures and counter_ok and elapsed < 600
    record("3", ok, f"{checked} SP audits hold (mrp m=2,3; edge-scan; sliding-partition; n<=4), "
                    f"failures={failures}; optimal violated: agent {deviator} drops its edge on "
                    f"the mutual pair [{elapsed:.1f}s]")


def test_criterion_04_two_rp_tightness():
    ratios = []
    ok = True
    for n in range(4, 11):
        g = gen_single_edge(n)
        probs = selection_probabilities(exact_distribution(MechanismSpec("mrp", 1, 2), g))
        oracle = sum(p for s, p in brute_mrp(n, g.edges, 1, 2).items() if n in s)
        ok &= probs[n] == oracle == mrp_single_edge_probability(n)
        ratio = approx_ratio_exact(MechanismSpec("mrp", 1, 2), g).ratio
        ok &= Fraction(7, 2) < ratio < 4
        ratios.append(ratio)
    ok &= all(a < b for a, b in zip(ratios, ratios[1:]))
    record("4", ok, "2-RP single-edge ratios n=4..10: "
                    + ", ".join(f"{float(r):.4f}" for r in ratios) + " (exact = oracle, increasing, < 4)")


def test_criterion_05_random_subset_ratio():
    ok = True
    count = 0
    for n in range(2, 7):
        g = gen_star((1,) * (n - 1))
        for k in range(1, n + 1):
            ok &= approx_ratio_exact(MechanismSpec("random-subset"), g, k).ratio == Fraction(n, k)
            count += 1
    record("5", ok, f"random-subset ratio on all-ones stars equals n/k exactly ({count} cases, n<=6)")


def test_criterion_06_cycle_witness():
    a = cycle_lower_bound_witness(MechanismSpec("mrp", m=2), 4, 1)
    b = cycle_lower_bound_witness(MechanismSpec("mrp", m=2), 5, 2)
    ok = a.holds and a.witness_ratio >= 2 and b.holds and b.witness_ratio >= Fraction(6, 5)
    record("6", ok, f"cycle witness mrp:m=2 (n=4,k=1) ratio {a.witness_ratio} >= 2; "
                    f"(n=5,k=2) ratio {b.witness_ratio} >= 6/5")


def test_criterion_07_asymptotics():
    t0 = time.perf_counter()
    g = gen_random(300, 0.1, seed=0)
    estimates = {}
    for k in (8, 27, 64):
        m = mrp_parts_for(k)
        estimates[k] = approx_ratio_mc(MechanismSpec("mrp", k, m), g, k, trials=20_000, seed=0)
    elapsed = time.perf_counter() - t0
    below_four = all(e.ci_low <= 4 for e in estimates.values())
    gap = estimates[8].ratio - estimates[64].ratio
    margin = estimates[8].half_width + estimates[64].half_width
    ok = below_four and gap > margin and elapsed < 300
    record("7", ok, ", ".join(f"k={k} m={mrp_parts_for(k)} ratio {e.ratio:.4f} "
                              f"[{e.ci_low:.4f}, {e.ci_high:.4f}]" for k, e in estimates.items())
           + f"; drop {gap:.4f} > CI sum {margin:.4f} [{elapsed:.1f}s]")


def test_criterion_08a_sliding_single_edge():
    ok = True
    for n in range(2, 7):
        for edge in [(1, n), (n, 1)] + ([(2, 3)] if n >= 3 else []):
            g = DirectedGraph(n, frozenset({edge}))
            spec = MechanismSpec("sliding-partition", 1)
            probs = selection_probabilities(exact_distribution(spec, g))
            ratio = approx_ratio_exact(spec, g).ratio
            ok &= probs[edge[1]] == Fraction(1, 2) and ratio == 2
    record("8a", ok, "sliding-partition selects the endorsed agent with probability exactly 1/2 "
                     "(ratio 2) on single-edge graphs, n=2..6")


def test_criterion_08b_sliding_growth():
    ratios = []
    for t, d in [(4, 4), (8, 8), (16, 16)]:
        g = gen_sliding_counterexample(t, d)
        ratios.append(approx_ratio_mc(MechanismSpec("sliding-partition"), g, 1, 50_000, seed=0))
    ok = all(a.ratio < b.ratio for a, b in zip(ratios, ratios[1:]))
    record("8b", ok, "sliding-partition MC ratios on (t,d)=(4,4),(8,8),(16,16): "
                     + ", ".join(f"{float(e.ratio):.5f}" for e in ratios)
                     + " (must increase strictly)")


def _pairs(count, seed):
    rng = random.Random(seed)
    kinds = ["optimal", "random-subset", "mrp", "edge-scan", "sliding-partition"]
    out = []
    while len(out) < count:
        n = rng.randint(2, 5)
        g = gen_random(n, rng.random(), rng.randrange(2**31))
        kind = rng.choice(kinds)
        k = rng.randint(1, n)
        if kind == "mrp":
            spec = MechanismSpec("mrp", k, rng.randint(1, 3))
        elif kind == "sliding-partition":
            spec = MechanismSpec(kind, 1)
        elif kind == "edge-scan":
            spec = MechanismSpec(kind)
        else:
            spec = MechanismSpec(kind, k)
        out.append((spec, g))
    return out


def test_criterion_09_engine_self_consistency():
    trials = 100_000
    misses = []
    tested = 0
    for idx, (spec, g) in enumerate(_pairs(50, seed=9)):
        dist = exact_distribution(spec, g)
        assert sum(dist.outcomes.values()) == 1
        rows = sample_membership(spec, g, trials, np.random.default_rng(idx))
        codes = rows.astype(np.int64) @ (1 << np.arange(g.n, dtype=np.int64))
        values, counts = np.unique(codes, return_counts=True)
        observed = dict(zip(values.tolist(), counts.tolist()))
        for sel, p in dist.outcomes.items():
            code = sum(1 << (i - 1) for i in sel)
            lo, hi = binom.interval(0.999, trials, float(p))
            c = observed.pop(code, 0)
            tested += 1
            if not lo <= c <= hi:
                misses.append(f"{spec} n={g.n} {sel.members}: {c} not in [{lo:.0f}, {hi:.0f}]")
        if observed:
            misses.append(f"{spec} n={g.n}: sampled outcomes outside the exact support")
    record("9", not misses, f"{tested} outcome frequencies over 50 (mechanism, graph) pairs inside "
                            f"99.9% binomial intervals; misses={misses}")


def test_criterion_10_gsp_baseline():
    ok = True
    for n in (2, 3, 4):
        for k in range(1, n):
            ok &= check_gsp(MechanismSpec("random-subset"), n, k, coalition_size=2).holds
    w = gsp_lower_bound_witness(MechanismSpec("random-subset"), 5, 1)
    ok &= w.witness_ratio == 5 and w.bound == 4 and w.holds
    record("10", ok, f"random-subset GSP holds for n<=4, coalitions <= 2; GSP witness ratio "
                     f"{w.witness_ratio} >= {w.bound}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
