import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from budgetgraph.errors import ParameterError
from budgetgraph.graph import (
    EdgeSequence,
    Graph,
    GraphBuilder,
    complete_edge_count,
    edge_from_index,
    edge_index,
    edges_from_indices,
    power_of_cycle_edges,
    power_of_path_edges,
    sample_edge_indices,
    sample_gnm,
    sample_gnp,
    sample_process_prefix,
)
from tests.helpers import graphs, nested_graphs


@pytest.mark.parametrize("n, expected", [(1, 0), (3, 3), (100, 4950)])
def test_complete_edge_count(n, expected):
    assert complete_edge_count(n) == expected


def test_edge_index_is_colex_and_inverts():
    assert [edge_index(u, v) for u, v in [(0, 1), (0, 2), (1, 2), (0, 3)]] == [0, 1, 2, 3]
    assert edge_index(2, 1) == edge_index(1, 2)
    indices = list(range(complete_edge_count(60)))
    pairs = edges_from_indices(indices)
    assert pairs == [edge_from_index(i) for i in indices]
    assert all(edge_index(u, v) == i for i, (u, v) in zip(indices, pairs))


def test_edge_index_rejects_loops():
    with pytest.raises(ParameterError):
        edge_index(3, 3)


@given(graphs())
def test_graph_is_symmetric_and_loop_free(G):
    for u in range(G.n):
        assert not G.has_edge(u, u)
        for v in G.neighbors(u):
            assert G.has_edge(v, u)
    assert 2 * G.edge_count == sum(G.degrees())


@given(nested_graphs())
def test_union_and_subgraph(pair):
    H, G = pair
    assert H.is_subgraph_of(G)
    assert H.union(G) == G
    assert G.union(H).edge_count == G.edge_count


def test_graph_dedupes_and_validates_edges():
    G = Graph(3, [(0, 1), (1, 0), (1, 2)])
    assert G.edge_count == 2
    with pytest.raises(ParameterError):
        Graph(3, [(0, 3)])
    with pytest.raises(ParameterError):
        Graph(3, [(1, 1)])


def test_induced_and_relabel(k4):
    induced = k4.induced([0, 2, 3])
    assert induced.n == 4
    assert induced.edge_set() == {(0, 2), (0, 3), (2, 3)}
    relabelled = k4.relabel([3, 1])
    assert relabelled == Graph(2, [(0, 1)])


def test_edge_list_text_format():
    G = Graph.cycle(4)
    text = G.to_edge_list_text()
    assert text.splitlines()[0] == "4 4"
    assert text.splitlines()[1:] == ["0 1", "0 3", "1 2", "2 3"]
    assert Graph.from_edge_list_text(text) == G


@pytest.mark.parametrize(
    "text",
    ["", "3\n", "3 2\n0 1\n", "3 1\n0 x\n", "3 2\n0 1\n1 0\n"],
)
def test_edge_list_text_rejects_malformed(text):
    with pytest.raises(ParameterError):
        Graph.from_edge_list_text(text)


def test_builder_freeze_matches_graph():
    builder = GraphBuilder(5)
    assert builder.add_edge(0, 1)
    assert not builder.add_edge(1, 0)
    builder.add_edge(3, 4)
    assert builder.degree(1) == 1
    assert builder.freeze() == Graph(5, [(0, 1), (3, 4)])


def test_edge_sequence_rejects_repeats():
    with pytest.raises(ParameterError):
        EdgeSequence(4, ((0, 1), (2, 3), (1, 0)))
    sequence = EdgeSequence(4, ((0, 1), (2, 3)))
    assert sequence.prefix(1).as_graph() == Graph(4, [(0, 1)])


def test_powers_of_paths_and_cycles():
    assert power_of_path_edges([0, 1, 2, 3], 2) == {(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)}
    assert len(power_of_cycle_edges(list(range(7)), 2)) == 14


@pytest.mark.parametrize("total, t", [(100, 5), (100, 90), (10, 10), (10, 0)])
def test_sample_edge_indices_distinct(total, t, rng):
    drawn = sample_edge_indices(total, t, rng)
    assert len(drawn) == t
    assert len(set(drawn)) == t
    assert all(0 <= x < total for x in drawn)


def test_process_prefix_orderings_are_uniform():
    rng = np.random.default_rng(7)
    samples = 60_000
    counts = Counter(sample_process_prefix(3, 3, rng).edges for _ in range(samples))
    orderings = list(itertools.permutations([(0, 1), (0, 2), (1, 2)]))
    assert set(counts) == set(orderings)
    result = chisquare([counts[o] for o in orderings])
    assert result.pvalue > 0.001


def test_process_prefix_edge_cases(rng):
    assert len(sample_process_prefix(5, 0, rng)) == 0
    assert sample_process_prefix(4, 6, rng).as_graph() == Graph.complete(4)
    with pytest.raises(ParameterError):
        sample_process_prefix(4, 7, rng)


def test_gnp_extremes_and_errors(rng):
    assert sample_gnp(6, 0.0, rng).edge_count == 0
    assert sample_gnp(6, 1.0, rng) == Graph.complete(6)
    with pytest.raises(ParameterError):
        sample_gnp(6, 1.5, rng)
    with pytest.raises(ParameterError):
        sample_gnp(6, -0.1, rng)


def test_gnp_mean_edge_count():
    rng = np.random.default_rng(11)
    samples = 40_000
    mean = sum(sample_gnp(4, 0.5, rng).edge_count for _ in range(samples)) / samples
    sigma = (6 * 0.25 / samples) ** 0.5
    assert abs(mean - 3.0) < 4 * sigma


def test_gnm_extremes_and_errors(rng):
    assert sample_gnm(5, 0, rng).edge_count == 0
    assert sample_gnm(5, 10, rng) == Graph.complete(5)
    with pytest.raises(ParameterError):
        sample_gnm(5, 11, rng)


def test_gnm_is_uniform_over_graphs():
    rng = np.random.default_rng(3)
    samples = 20_000
    counts = Counter(sample_gnm(4, 3, rng) for _ in range(samples))
    assert len(counts) == 20
    assert chisquare(list(counts.values())).pvalue > 0.001


@settings(max_examples=30)
@given(st.integers(2, 9), st.data())
def test_gnm_has_requested_size(n, data):
    m = data.draw(st.integers(0, complete_edge_count(n)))
    seed = data.draw(st.integers(0, 2**32 - 1))
    assert sample_gnm(n, m, seed).edge_count == m
