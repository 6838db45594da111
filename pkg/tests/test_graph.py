import pytest
from hypothesis import given, settings, strategies as st

from spselect.graph import (
    DirectedGraph,
    GraphParseError,
    GraphValidationError,
    gen_cycle,
    gen_named,
    gen_random,
    gen_single_edge,
    gen_sliding_counterexample,
    gen_star,
    indegree,
    indegree_from,
    parse_graph,
    serialize_graph,
)


@st.composite
def graphs(draw, max_n=7):
    n = draw(st.integers(1, max_n))
    pairs = [(u, v) for u in range(1, n + 1) for v in range(1, n + 1) if u != v]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return DirectedGraph(n, frozenset(chosen))


def test_parse_simple():
    g = parse_graph("n 3\nedge 1 3\n")
    assert g.n == 3
    assert g.edges == {(1, 3)}


def test_parse_mutual_pair():
    g = parse_graph("n 2\nedge 1 2\nedge 2 1\n")
    assert g.edges == {(1, 2), (2, 1)}


def test_parse_comments_and_blank_lines():
    g = parse_graph("# header\n\nn 4\n# note\nedge 2 4\n\n")
    assert (g.n, g.edges) == (4, {(2, 4)})


@pytest.mark.parametrize("text, exc", [
    ("n 2\nedge 1 1\n", GraphValidationError),
    ("n 2\nedge 1 3\n", GraphValidationError),
    ("n 2\nedge 1 2\nedge 1 2\n", GraphValidationError),
    ("n 2\nedge 1\n", GraphParseError),
    ("edge 1 2\n", GraphParseError),
    ("n two\n", GraphParseError),
    ("", GraphParseError),
])
def test_parse_rejects(text, exc):
    with pytest.raises(exc):
        parse_graph(text)


def test_parse_error_carries_line_number():
    with pytest.raises(GraphParseError) as info:
        parse_graph("n 3\nedge 1 2\nbogus\n")
    assert info.value.lineno == 3
    assert "line 3" in str(info.value)


def test_serialize_sorted():
    g = DirectedGraph(2, frozenset({(2, 1), (1, 2)}))
    assert serialize_graph(g) == "n 2\nedge 1 2\nedge 2 1\n"


def test_serialize_empty():
    assert serialize_graph(DirectedGraph(3)) == "n 3\n"


@settings(max_examples=100)
@given(graphs())
def test_roundtrip(g):
    assert parse_graph(serialize_graph(g)) == g


def test_constructor_invariants():
    with pytest.raises(GraphValidationError):
        DirectedGraph(3, frozenset({(2, 2)}))
    with pytest.raises(GraphValidationError):
        DirectedGraph(3, frozenset({(0, 2)}))
    with pytest.raises(GraphValidationError):
        DirectedGraph(0)
    with pytest.raises(GraphValidationError):
        DirectedGraph.from_edges(3, [(1, 2), (1, 2)])


def test_indegree_examples(figure2):
    assert indegree(figure2, 2) == 3
    assert indegree(DirectedGraph(4), 3) == 0
    assert indegree(gen_single_edge(5), 5) == 1
    with pytest.raises(GraphValidationError):
        indegree(figure2, 7)


def test_indegree_from_examples(figure2):
    assert indegree_from(figure2, 1, {3, 4, 5}) == 2
    assert indegree_from(figure2, 1, set()) == 0
    with pytest.raises(GraphValidationError):
        indegree_from(figure2, 1, {9})


@settings(max_examples=100)
@given(graphs(), st.data())
def test_indegree_from_everyone_is_indegree(g, data):
    i = data.draw(st.integers(1, g.n))
    assert indegree_from(g, i, g.agents) == indegree(g, i)


@given(graphs())
def test_indegrees_sum_to_edge_count(g):
    assert sum(indegree(g, i) for i in g.agents) == len(g.edges)


@given(graphs(), st.data())
def test_indegree_from_is_additive(g, data):
    i = data.draw(st.integers(1, g.n))
    labels = data.draw(st.lists(st.integers(0, 2), min_size=g.n, max_size=g.n))
    a = {j for j, lab in zip(g.agents, labels) if lab == 0}
    b = {j for j, lab in zip(g.agents, labels) if lab == 1}
    assert indegree_from(g, i, a) + indegree_from(g, i, b) == indegree_from(g, i, a | b)


def test_star_examples():
    assert gen_star((1, 0, 1, 1, 0, 0)).edges == {(1, 7), (3, 7), (4, 7)}
    assert gen_star((1, 1, 0, 0, 0, 1)).edges == {(1, 7), (2, 7), (6, 7)}
    assert gen_star((0,) * 6).edges == frozenset()
    assert gen_star((0,) * 6).n == 7


@given(st.lists(st.integers(0, 1), min_size=1, max_size=9))
def test_star_has_popcount_edges_into_hub(bits):
    g = gen_star(bits)
    assert len(g.edges) == sum(bits)
    assert all(v == g.n for _, v in g.edges)


def test_cycle_examples():
    assert gen_cycle(1, 2).edges == {(1, 2), (2, 1)}
    g = gen_cycle(2, 4)
    assert g.edges == {(1, 2), (2, 3), (3, 1)}
    assert indegree(g, 4) == 0
    g = gen_cycle(3, 4)
    assert [indegree(g, i) for i in g.agents] == [1, 1, 1, 1]
    with pytest.raises(GraphValidationError):
        gen_cycle(4, 4)
    with pytest.raises(GraphValidationError):
        gen_cycle(0, 4)


def test_single_edge():
    assert gen_single_edge(2).edges == {(1, 2)}
    g = gen_single_edge(6)
    assert [i for i in g.agents if indegree(g, i) > 0] == [6]
    with pytest.raises(GraphValidationError):
        gen_single_edge(1)


def test_sliding_counterexample_small():
    g = gen_sliding_counterexample(1, 1)
    assert g.n == 3
    assert g.edges == {(2, 1), (3, 2)}


def test_sliding_counterexample_4_4():
    g = gen_sliding_counterexample(4, 4)
    assert g.n == 21
    assert indegree(g, 1) == 4
    assert all(indegree(g, s) == 4 for s in range(2, 6))
    assert all(indegree(g, leaf) == 0 for leaf in range(6, 22))
    with pytest.raises(GraphValidationError):
        gen_sliding_counterexample(0, 3)


@given(st.integers(1, 20), st.integers(1, 20))
def test_sliding_counterexample_edge_count(t, d):
    g = gen_sliding_counterexample(t, d)
    assert len(g.edges) == t + t * d
    assert g.n == 1 + t + t * d


def test_random_extremes():
    assert gen_random(5, 0.0, 3).edges == frozenset()
    assert len(gen_random(5, 1.0, 3).edges) == 20
    assert gen_random(12, 0.3, 42) == gen_random(12, 0.3, 42)
    with pytest.raises(GraphValidationError):
        gen_random(4, 1.5)


def test_named():
    f2 = gen_named("figure2")
    assert len(f2.edges) == 9
    assert indegree(f2, 2) == 3 and indegree(f2, 5) == 2
    assert len(gen_named("figure4").edges) == 5
    with pytest.raises(GraphValidationError):
        gen_named("nosuch")


def test_with_out_edges(figure2):
    g = figure2.with_out_edges(4, [1])
    assert g.out_neighbors[4] == (1,)
    assert g.out_neighbors[6] == figure2.out_neighbors[6]
