from fractions import Fraction

import pytest
from hypothesis import given, settings

from budgetgraph.errors import CapacityError, ParameterError
from budgetgraph.graph import Graph
from budgetgraph.patterns import (
    f_equipartition,
    is_strictly_one_balanced,
    is_vertex_balanced,
    max_one_density,
    max_one_density_flow,
    one_density,
    parse_pattern,
    path_power,
    path_power_one_density,
    pattern_stats,
)
from tests.helpers import graphs


def test_triangle_stats(triangle):
    stats = pattern_stats(triangle, "K3")
    assert stats.one_density == Fraction(3, 2)
    assert stats.max_one_density == Fraction(3, 2)
    assert stats.strictly_one_balanced
    assert stats.vertex_balanced
    assert (stats.order, stats.size) == (3, 3)


def test_pendant_triangle_is_unbalanced(pendant_triangle):
    assert one_density(pendant_triangle) == Fraction(4, 3)
    assert max_one_density(pendant_triangle) == Fraction(3, 2)
    assert not is_strictly_one_balanced(pendant_triangle)
    assert not is_vertex_balanced(pendant_triangle)


def test_cycle_is_strictly_balanced():
    C4 = Graph.cycle(4)
    assert one_density(C4) == Fraction(4, 3)
    assert is_strictly_one_balanced(C4)


@pytest.mark.parametrize("q, k", [(3, 1), (5, 2), (7, 3), (9, 2)])
def test_path_power_closed_form(q, k):
    P = path_power(q, k)
    assert one_density(P) == path_power_one_density(q, k)
    assert max_one_density(P) == path_power_one_density(q, k)
    assert is_strictly_one_balanced(P)


def test_path_power_rejects_degenerate_arguments():
    with pytest.raises(ParameterError):
        path_power(1, 1)
    with pytest.raises(ParameterError):
        path_power_one_density(3, 3)


@settings(max_examples=40, deadline=None)
@given(graphs(min_n=2, max_n=6))
def test_flow_density_matches_enumeration(F):
    assert max_one_density_flow(F) == max_one_density(F)


def test_flow_density_handles_large_patterns():
    P = path_power(20, 3)
    assert max_one_density_flow(P) == path_power_one_density(20, 3)
    with pytest.raises(CapacityError):
        max_one_density(P)


def test_single_vertex_pattern_is_rejected():
    with pytest.raises(ParameterError):
        one_density(Graph(1))


def test_f_equipartition_sizes():
    parts = f_equipartition(list(range(10)), 3, 2)
    assert [len(p) for p in parts] == [4, 4, 2]
    assert sum(parts, []) == list(range(10))


@pytest.mark.parametrize("total, parts, block", [(9, 2, 2), (4, 3, 2), (6, 0, 3)])
def test_f_equipartition_rejects_impossible_splits(total, parts, block):
    with pytest.raises(ParameterError):
        f_equipartition(list(range(total)), parts, block)


def test_parse_pattern_names_and_files(tmp_path):
    assert parse_pattern("K3") == Graph.complete(3)
    assert parse_pattern(" Pq^k:q=5,k=2 ") == path_power(5, 2)
    path = tmp_path / "c4.txt"
    path.write_text(Graph.cycle(4).to_edge_list_text(), encoding="utf-8")
    assert parse_pattern(str(path)) == Graph.cycle(4)


@pytest.mark.parametrize("spec", ["K9", "Pq^k:q=5", "Pq^k:q=a,k=2", "no/such/file.txt"])
def test_parse_pattern_rejects_unknown(spec):
    with pytest.raises(ParameterError):
        parse_pattern(spec)
