"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 exact-engine guard exceeded,
3 an audit found a violation (or a witness/impossibility check failed).
Output is a pure function of the arguments and input files.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from collections import Counter
from fractions import Fraction
from pathlib import Path

from . import graph as graphs
from .audit import (
    approx_ratio_exact,
    approx_ratio_mc,
    check_gsp,
    check_sp,
    cycle_lower_bound_witness,
    gsp_lower_bound_witness,
    impossibility_search,
    opt_value,
)
from .audit.report import encode_value
from .audit.strategyproof import ScopeTooLarge
from .exact import DEFAULT_GUARD, EnumerationTooLarge, exact_distribution
from .graph import GraphError, parse_graph, serialize_graph
from .mechanisms import MechanismError, parse_mechanism, run_mechanism

EXIT_OK, EXIT_USAGE, EXIT_GUARD, EXIT_VIOLATION = 0, 1, 2, 3
INSTANCES = ("star", "cycle", "single-edge", "sliding-tree", "random", "figure2", "figure4")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", type=Path)
    p.add_argument("--guard", type=int, default=DEFAULT_GUARD,
                   help="maximum randomness paths the exact engine may enumerate")


def _instance_args(p: argparse.ArgumentParser, required: bool = False) -> None:
    p.add_argument("--instance", choices=INSTANCES, required=required)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--t", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--bits", help="comma-separated 0/1 vector for star instances")
    p.add_argument("--cycle-k", type=int, help="cycle length minus one (defaults to --k)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spselect", description="Strategyproof k-selection toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a graph instance")
    _instance_args(p, required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("run", help="run a mechanism on a graph")
    p.add_argument("--mechanism", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--graph", type=Path, required=True)
    p.add_argument("--mode", choices=("exact", "mc"), default="mc")
    p.add_argument("--trials", type=int)
    _common(p)

    p = sub.add_parser("ratio", help="approximation ratio on one graph")
    p.add_argument("--mechanism", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--graph", type=Path)
    _instance_args(p)
    p.add_argument("--mode", choices=("exact", "mc"), default="exact")
    p.add_argument("--trials", type=int)
    _common(p)

    for name in ("audit-sp", "audit-gsp"):
        p = sub.add_parser(name, help="exhaustive SP audit" if name == "audit-sp" else "GSP audit")
        p.add_argument("--mechanism", required=True)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--k", type=int)
        p.add_argument("--scope", default="all", help="'all' or a file of graphs")
        if name == "audit-gsp":
            p.add_argument("--coalition-size", type=int, default=2)
        _common(p)

    p = sub.add_parser("impossibility", help="search star-domain tables for an SP rule")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--method", choices=("auto", "brute", "backtrack"), default="auto")
    _common(p)

    p = sub.add_parser("witness", help="run a lower-bound construction")
    p.add_argument("--kind", choices=("cycle", "gsp"), default="cycle")
    p.add_argument("--mechanism", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    _common(p)

    p = sub.add_parser("sweep", help="m-RP ratios with m = ceil(k^(1/3)) over a grid of k")
    _instance_args(p, required=True)
    p.add_argument("--kmax", type=int, default=64)
    p.add_argument("--ks", help="comma-separated k values (default: cubes up to --kmax)")
    p.add_argument("--graph-seed", type=int, default=0)
    p.add_argument("--mode", choices=("exact", "mc"), default="mc")
    p.add_argument("--trials", type=int, default=20_000)
    _common(p)
    return parser


def _need(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError(f"{args.instance} instance requires {', '.join(missing)}")


def make_instance(args, seed: int | None = None) -> graphs.DirectedGraph:
    name = args.instance
    if name in ("figure2", "figure4"):
        return graphs.gen_named(name)
    if name == "star":
        _need(args, "bits")
        try:
            bits = [int(b) for b in args.bits.split(",")]
        except ValueError:
            raise UsageError(f"bad --bits {args.bits!r}") from None
        return graphs.gen_star(bits)
    if name == "cycle":
        k = args.cycle_k if args.cycle_k is not None else getattr(args, "k", None)
        if k is None:
            raise UsageError("cycle instance requires --k or --cycle-k")
        _need(args, "n")
        return graphs.gen_cycle(k, args.n)
    if name == "single-edge":
        _need(args, "n")
        return graphs.gen_single_edge(args.n)
    if name == "sliding-tree":
        _need(args, "t", "d")
        return graphs.gen_sliding_counterexample(args.t, args.d)
    _need(args, "n", "p")
    return graphs.gen_random(args.n, args.p, args.seed if seed is None else seed)


def _read_graph(path: Path) -> graphs.DirectedGraph:
    try:
        return parse_graph(path.read_text())
    except OSError as exc:
        raise UsageError(f"cannot read graph file: {exc}") from None


def parse_graph_list(text: str) -> list[graphs.DirectedGraph]:
    """Several edge-list graphs in one file, each starting at its ``n`` line."""
    chunks: list[list[str]] = []
    for line in text.splitlines():
        if line.strip().startswith("n "):
            chunks.append([])
        if chunks:
            chunks[-1].append(line)
    return [parse_graph("\n".join(c)) for c in chunks]


def _mechanism(args, k=None):
    return parse_mechanism(args.mechanism, args.k if k is None else k)


def cmd_gen(args) -> dict:
    g = make_instance(args)
    return {"_text": serialize_graph(g)}


def cmd_run(args) -> dict:
    spec = _mechanism(args)
    g = _read_graph(args.graph)
    if args.mode == "exact":
        if args.trials is not None:
            raise UsageError("--trials is not allowed with --mode exact")
        dist = exact_distribution(spec, g, args.guard)
        out = {"mechanism": str(spec), "mode": "exact"}
        out.update(dist.to_json())
        out["rows"] = [{"members": " ".join(map(str, o["members"])), "p": o["p"]}
                       for o in out["outcomes"]]
        return out
    trials = 1 if args.trials is None else args.trials
    if trials < 1:
        raise UsageError("--trials must be >= 1")
    # trial t runs the single-run sampler with seed + t
    samples = [run_mechanism(spec, g, args.seed + t).members for t in range(trials)]
    freq = Counter(samples)
    rows = [
        {"members": " ".join(map(str, sel)), "count": c, "frequency": c / trials}
        for sel, c in sorted(freq.items())
    ]
    return {
        "mechanism": str(spec),
        "mode": "mc",
        "n": g.n,
        "k": spec.k,
        "seed": args.seed,
        "trials": trials,
        "selections": [list(s) for s in samples],
        "rows": rows,
    }


def _ratio_payload(est, **extra) -> dict:
    out = dict(extra)
    out.update(est.to_json())
    return out


def cmd_ratio(args) -> dict:
    spec = _mechanism(args)
    if args.graph is not None:
        g = _read_graph(args.graph)
    elif args.instance is not None:
        g = make_instance(args)
    else:
        raise UsageError("ratio needs --graph or --instance")
    if args.mode == "exact":
        if args.trials is not None:
            raise UsageError("--trials is not allowed with --mode exact")
        est = approx_ratio_exact(spec, g, args.k, args.guard)
    else:
        if args.trials is None or args.trials < 1:
            raise UsageError("--mode mc requires --trials >= 1")
        est = approx_ratio_mc(spec, g, args.k, args.trials, args.seed)
    return _ratio_payload(est, mechanism=str(spec), k=args.k, n=g.n)


def _scope(args):
    if args.scope == "all":
        return "all"
    try:
        return parse_graph_list(Path(args.scope).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read scope file: {exc}") from None


def cmd_audit_sp(args) -> dict:
    report = check_sp(_mechanism(args), args.n, args.k, _scope(args), args.guard)
    out = report.to_json()
    out["_exit"] = EXIT_VIOLATION if report.verdict == "violated" else EXIT_OK
    return out


def cmd_audit_gsp(args) -> dict:
    report = check_gsp(_mechanism(args), args.n, args.k, args.coalition_size, _scope(args),
                       args.guard)
    out = report.to_json()
    out["_exit"] = EXIT_VIOLATION if report.verdict == "violated" else EXIT_OK
    return out


def cmd_impossibility(args) -> dict:
    if args.n < 2 or not 1 <= args.k <= args.n - 1:
        raise UsageError("need n >= 2 and 1 <= k <= n-1")
    result = impossibility_search(args.n, args.k, args.method, seed=args.seed)
    out = result.to_json()
    out["_exit"] = EXIT_OK if result.feasible_count == 0 and result.all_contradictions else EXIT_VIOLATION
    return out


def cmd_witness(args) -> dict:
    spec = _mechanism(args)
    fn = cycle_lower_bound_witness if args.kind == "cycle" else gsp_lower_bound_witness
    report = fn(spec, args.n, args.k, args.guard)
    out = report.to_json()
    out["_exit"] = EXIT_OK if report.holds else EXIT_VIOLATION
    return out


def cmd_sweep(args) -> dict:
    if args.ks:
        try:
            ks = [int(x) for x in args.ks.split(",")]
        except ValueError:
            raise UsageError(f"bad --ks {args.ks!r}") from None
    else:
        ks = [j**3 for j in range(1, args.kmax + 1) if j**3 <= args.kmax]
    g = make_instance(args, seed=args.graph_seed)
    rows = []
    for k in ks:
        m = mrp_parts_for(k)
        spec = parse_mechanism(f"mrp:m={m}", k)
        if args.mode == "exact":
            est = approx_ratio_exact(spec, g, k, args.guard)
        else:
            est = approx_ratio_mc(spec, g, k, args.trials, args.seed)
        rows.append({
            "k": k,
            "m": m,
            "instance": args.instance,
            "opt": opt_value(g, k),
            "ratio": encode_value(est.ratio),
            "ci_low": encode_value(est.ci_low if est.mode == "monte_carlo" else est.ratio),
            "ci_high": encode_value(est.ci_high if est.mode == "monte_carlo" else est.ratio),
        })
    return {"instance": args.instance, "n": g.n, "mode": args.mode,
            "trials": args.trials if args.mode == "mc" else None, "rows": rows}


def mrp_parts_for(k: int) -> int:
    """``ceil(k^(1/3))`` computed in integers."""
    m = max(1, round(k ** (1 / 3)))
    while m**3 < k:
        m += 1
    while m > 1 and (m - 1) ** 3 >= k:
        m -= 1
    return m


COMMANDS = {
    "gen": cmd_gen,
    "run": cmd_run,
    "ratio": cmd_ratio,
    "audit-sp": cmd_audit_sp,
    "audit-gsp": cmd_audit_gsp,
    "impossibility": cmd_impossibility,
    "witness": cmd_witness,
    "sweep": cmd_sweep,
}


def _flatten(payload: dict, prefix: str = "") -> dict:
    flat = {}
    for key, value in payload.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, name + "."))
        elif isinstance(value, list):
            flat[name] = json.dumps(value, sort_keys=True)
        else:
            flat[name] = value
    return flat


def to_csv(payload: dict) -> str:
    buf = io.StringIO()
    rows = payload.get("rows")
    if rows is None:
        rows = [_flatten(payload)]
    fields: list[str] = []
    for row in rows:
        fields.extend(f for f in row if f not in fields)
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def render(payload: dict, fmt: str) -> str:
    if "_text" in payload:
        return payload["_text"]
    if fmt == "csv":
        return to_csv(payload)
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        payload = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EnumerationTooLarge, ScopeTooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (GraphError, MechanismError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    code = payload.pop("_exit", EXIT_OK)
    text = render(payload, getattr(args, "format", "json"))
    if args.out is not None:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
