"""Strategyproof k-selection on directed approval graphs."""
from .exact import SelectionDistribution, exact_distribution, expected_total_indegree, selection_probabilities
from .graph import DirectedGraph, parse_graph, serialize_graph
from .mechanisms import MechanismSpec, Selection, parse_mechanism, run_mechanism

__version__ = "0.1.0"

__all__ = [
    "DirectedGraph",
    "MechanismSpec",
    "Selection",
    "SelectionDistribution",
    "exact_distribution",
    "expected_total_indegree",
    "parse_graph",
    "parse_mechanism",
    "run_mechanism",
    "selection_probabilities",
    "serialize_graph",
]
