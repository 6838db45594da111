"""Report objects returned by the audits, and their JSON encoding."""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from ..exact import format_fraction

__all__ = ["INFINITE", "Infinite", "AuditReport", "RatioEstimate", "encode_value"]

HOLDS = "holds"
VIOLATED = "violated"
INCONCLUSIVE = "inconclusive"


@functools.total_ordering
class Infinite:
    """Unbounded ratio: positive optimum, zero expected value."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITE"

    def __str__(self):
        return "infinite"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("infinite")

    def __lt__(self, other):
        return False

    def __gt__(self, other):
        return other is not self


INFINITE = Infinite()


def encode_value(value: Any) -> Any:
    """JSON-ready form: exact rationals as ``"num/den"``, floats as-is."""
    if value is INFINITE:
        return "infinite"
    if isinstance(value, Fraction):
        return format_fraction(value)
    if isinstance(value, dict):
        return {str(k): encode_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [encode_value(v) for v in value]
    return value


@dataclass
class AuditReport:
    """Verdict of an SP/GSP audit.

    ``counterexample`` (present iff the verdict is ``violated``) holds the true
    graph and reported graph in edge-list text, the deviating coalition, and
    each member's selection probability before and after.
    """

    check: str
    mechanism: str
    n: int
    k: int | None
    verdict: str
    instances: int
    counterexample: dict | None = None
    runtime: float = 0.0
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.verdict == VIOLATED) != (self.counterexample is not None):
            raise ValueError("a counterexample must be present exactly when the verdict is violated")

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS

    def to_json(self, include_runtime: bool = False) -> dict:
        out = {
            "check": self.check,
            "mechanism": self.mechanism,
            "n": self.n,
            "k": self.k,
            "verdict": self.verdict,
            "instances_checked": self.instances,
            "counterexample": encode_value(self.counterexample),
        }
        if self.details:
            out["details"] = encode_value(self.details)
        if include_runtime:
            out["runtime_seconds"] = self.runtime
        return out


@dataclass
class RatioEstimate:
    """Approximation ratio ``opt / E[total indegree]`` of one mechanism on one graph."""

    ratio: Any
    mode: str
    opt: int
    expected: Any
    trials: int | None = None
    ci_low: Any = None
    ci_high: Any = None

    def __post_init__(self):
        if self.mode not in ("exact", "monte_carlo"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "monte_carlo" and not self.ci_low <= self.ratio <= self.ci_high:
            raise ValueError(f"ratio {self.ratio} outside its interval [{self.ci_low}, {self.ci_high}]")

    @property
    def infinite(self) -> bool:
        return self.ratio is INFINITE

    @property
    def half_width(self) -> float:
        if self.mode == "exact":
            return 0.0
        if self.ci_high is INFINITE:
            return float("inf")
        return (float(self.ci_high) - float(self.ci_low)) / 2

    def to_json(self) -> dict:
        out = {
            "mode": self.mode,
            "opt": self.opt,
            "expected": encode_value(self.expected),
            "ratio": encode_value(self.ratio),
        }
        if self.mode == "monte_carlo":
            out.update(trials=self.trials, ci_low=encode_value(self.ci_low),
                       ci_high=encode_value(self.ci_high))
        return out
