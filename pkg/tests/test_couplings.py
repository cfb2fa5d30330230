from fractions import Fraction

import numpy as np
import pytest

from budgetgraph.checkers import GRAPH_PROPERTIES
from budgetgraph.couplings import (
    FKG_PAIRS,
    check_fkg_exact,
    default_probabilities,
    failure_rate,
    fkg_catalogue,
    graphs_by_mask,
    increasing_table,
    sample_multistage,
    sample_sandwich,
    validate_gnm,
    validate_multistage,
    validate_sandwich,
)
from budgetgraph.errors import CapacityError, ParameterError


def test_default_probabilities():
    p_list, pbar_list = default_probabilities(10, [16, 0])
    assert p_list == pytest.approx([16 / 45 * 0.5, 0.0])
    assert pbar_list == pytest.approx([16 / 45 * 0.5, 0.0])


def test_multistage_sample_shapes(rng):
    sample = sample_multistage(12, [10, 10, 10], rng=rng)
    assert [G.edge_count for G in sample.H_hat] == [10, 10, 10]
    union = sample.H_hat[0].union(sample.H_hat[1]).union(sample.H_hat[2])
    assert union.edge_count == 30
    if sample.failure_step is None:
        for i, stage in enumerate(sample.H_hat):
            assert stage.is_subgraph_of(sample.H[i].union(sample.H_bar[i]))


def test_multistage_records_failures():
    sample = sample_multistage(6, [5], p_list=[1.0], pbar_list=[0.0], rng=1)
    assert sample.failure_step == 0
    assert sample.H_hat[0].edge_count == 5


@pytest.mark.parametrize("lengths, p_list, pbar_list", [
    ([10, 10], [0.1, 0.1], [0.1, 0.1]),
    ([2], [0.1, 0.1], [0.1]),
    ([2], [1.2], [0.1]),
])
def test_multistage_rejects_bad_arguments(lengths, p_list, pbar_list):
    with pytest.raises(ParameterError):
        sample_multistage(5, lengths, p_list, pbar_list)


def test_multistage_law_matches_the_process():
    report = validate_multistage(samples=30_000, rng=np.random.default_rng(5))
    assert report.dof == 89
    assert report.containment_violations == 0
    assert report.failures < report.samples
    assert report.p_value > 0.001


def test_multistage_law_is_capped():
    with pytest.raises(CapacityError):
        validate_multistage(n=6, stage_lengths=(3, 3), samples=10)


def test_failure_rate_falls_as_p_grows():
    rng = np.random.default_rng(9)
    rates = [failure_rate(30, (100,), (p,), (0.08,), 2000, rng) for p in (0.1, 0.15, 0.2)]
    assert rates[0] > rates[1] > rates[2]
    assert rates[0] > 0.95
    assert rates[2] < 0.3


def test_sandwich_sample(rng):
    for _ in range(200):
        sample = sample_sandwich(5, 4, 0.2, 0.8, rng)
        assert sample.G_hat.edge_count == 4
        assert sample.H.is_subgraph_of(sample.H_prime)
        if sample.ok:
            assert sample.H.is_subgraph_of(sample.G_hat)
            assert sample.G_hat.is_subgraph_of(sample.H_prime)


def test_sandwich_top_graph_has_the_binomial_law():
    rng = np.random.default_rng(13)
    samples = 20_000
    mean = sum(sample_sandwich(4, 3, 0.2, 0.8, rng).H_prime.edge_count for _ in range(samples)) / samples
    assert abs(mean - 4.8) < 4 * (0.96 / samples) ** 0.5


def test_sandwich_rejects_misplaced_m():
    with pytest.raises(ParameterError):
        sample_sandwich(4, 5, 0.2, 0.5)
    with pytest.raises(ParameterError):
        sample_sandwich(4, 3, 0.2, 0.8, pbar=0.9)


def test_sandwich_marginal_is_uniform():
    report = validate_sandwich(samples=20_000, rng=np.random.default_rng(21))
    assert report.dof == 19
    assert report.p_value > 0.001


def test_gnm_validator():
    report = validate_gnm(samples=20_000, rng=np.random.default_rng(8))
    assert report.test == "gnm"
    assert report.p_value > 0.001


def test_fkg_triangle_and_min_degree():
    report = check_fkg_exact(3, "1/2", GRAPH_PROPERTIES["triangle"], GRAPH_PROPERTIES["min_degree_1"])
    assert (report.e_f, report.e_g, report.e_fg) == ("1/8", "1/2", "1/8")
    assert report.holds


def test_fkg_argument_checks():
    with pytest.raises(ParameterError):
        check_fkg_exact(3, "1/2", GRAPH_PROPERTIES["acyclic"], GRAPH_PROPERTIES["nonempty"])
    with pytest.raises(ParameterError):
        check_fkg_exact(3, Fraction(3, 2), GRAPH_PROPERTIES["nonempty"], GRAPH_PROPERTIES["nonempty"])
    with pytest.raises(CapacityError):
        check_fkg_exact(5, "1/2", GRAPH_PROPERTIES["nonempty"], GRAPH_PROPERTIES["nonempty"])


@pytest.mark.parametrize("p", ["1/3", "1/2", "3/4"])
def test_fkg_catalogue_holds_on_four_vertices(p):
    reports = fkg_catalogue(4, p)
    assert len(reports) == len(FKG_PAIRS)
    assert all(report.holds for report in reports)


def test_increasing_table():
    graphs = graphs_by_mask(3)
    table = increasing_table(graphs, GRAPH_PROPERTIES["two_edges"], "two_edges", 3)
    assert sum(table.values()) == 4
    assert len(graphs) == 8
