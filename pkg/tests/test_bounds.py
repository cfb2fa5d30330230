import math
from fractions import Fraction

import pytest

from budgetgraph.bounds import (
    CSV_HEADER,
    BoundSpec,
    budget_exponent,
    copy_count_statistic,
    copy_threshold,
    curve_table,
    exponent_grid,
    polylog_correction,
)
from budgetgraph.engine import run_trial
from budgetgraph.errors import ParameterError
from budgetgraph.graph import Graph
from budgetgraph.strategies import make_buy_all

K3 = Graph.complete(3)


@pytest.mark.parametrize("r", range(3, 8))
def test_clique_curve_endpoints(r):
    spec = BoundSpec("clique_factor", r)
    start = Fraction(2) - Fraction(2, r)
    assert spec.x_min == start
    assert budget_exponent(spec, start) == start
    assert budget_exponent(spec, Fraction(2)) == 1


@pytest.mark.parametrize("k", range(2, 6))
def test_ham_power_curve_endpoints(k):
    spec = BoundSpec("ham_power", k)
    start = Fraction(2) - Fraction(1, k)
    assert budget_exponent(spec, start) == start
    assert budget_exponent(spec, Fraction(2)) == 1


@pytest.mark.parametrize("r", range(2, 8))
def test_clique_formula_is_the_general_one_at_half_r(r):
    clique = BoundSpec("clique_factor", r)
    general = BoundSpec("f_factor", Fraction(r, 2))
    for x in exponent_grid([clique], points=50):
        assert budget_exponent(clique, x) == budget_exponent(general, x)


def test_out_of_range_exponent():
    with pytest.raises(ParameterError):
        budget_exponent(BoundSpec("clique_factor", 3), Fraction(1))
    with pytest.raises(ParameterError):
        budget_exponent(BoundSpec("ham_power", 2), 2.5)


@pytest.mark.parametrize("family, param", [("clique_factor", 1), ("ham_power", 0), ("f_factor", Fraction(1, 2))])
def test_bound_spec_validation(family, param):
    with pytest.raises(ParameterError):
        BoundSpec(family, param)


def test_polylog_power():
    assert BoundSpec("clique_factor", 3, "strategy_budget_full").polylog_power() == Fraction(1, 2)
    assert BoundSpec("f_factor", Fraction(3, 2), "strategy_budget_full", pattern_order=4).polylog_power() == Fraction(1, 3)
    assert BoundSpec("clique_factor", 3).polylog_power() == 0
    assert BoundSpec("ham_power", 2, "strategy_budget_full").polylog_power() == 0


def test_curve_table_rows():
    table = curve_table([BoundSpec("clique_factor", 3)], [1.0, 1.5, 2.0])
    assert table.splitlines() == [
        CSV_HEADER,
        "clique_factor,3,1.500000,1.250000,lower_bound",
        "clique_factor,3,2.000000,1.000000,lower_bound",
    ]


def test_curve_table_adds_polylog_correction():
    spec = BoundSpec("clique_factor", 2, "strategy_budget_full")
    row = curve_table([spec], [2.0], n=100).splitlines()[1]
    expected = 1 + math.log(math.log(100)) / math.log(100)
    assert row == f"clique_factor,2,2.000000,{expected:.6f},strategy_budget_full"
    assert polylog_correction(BoundSpec("clique_factor", 2), 100) == 0.0
    with pytest.raises(ParameterError):
        polylog_correction(spec, 2)


def test_exponent_grid():
    grid = exponent_grid([BoundSpec("clique_factor", 3), BoundSpec("clique_factor", 2)], points=5)
    assert grid == [Fraction(1), Fraction(5, 4), Fraction(3, 2), Fraction(7, 4), Fraction(2)]
    with pytest.raises(ParameterError):
        exponent_grid([], points=1)


def test_copy_threshold():
    assert copy_threshold(8, 10, 10, K3, 1.0) == pytest.approx(1000 / 8 ** 4)


def _k4_with_isolated():
    return Graph(8, [(a, b) for a in range(4) for b in range(a + 1, 4)])


def test_copy_count_removes_the_worst_vertices():
    report = copy_count_statistic(_k4_with_isolated(), K3, 10, 10, 1.0, 0.5)
    assert report.surviving == [2, 3, 4, 5, 6, 7]
    assert report.max_count == 0
    assert report.fraction_below == 0.75
    assert report.lambda_needed == pytest.approx(3 / (1000 / 8 ** 4))


def test_copy_count_respects_the_removal_cap():
    report = copy_count_statistic(_k4_with_isolated(), K3, 10, 10, 1.0, 0.1)
    # 0.8 vertices allowed: the first removal already exceeds it
    assert report.surviving == list(range(1, 8))
    assert report.max_count == 1


def test_copy_count_stops_just_past_an_integral_cap():
    report = copy_count_statistic(_k4_with_isolated(), K3, 10, 10, 1.0, 0.125)
    assert report.surviving == list(range(2, 8))
    assert report.max_count == 0
    zero = copy_count_statistic(_k4_with_isolated(), K3, 10, 10, 1.0, 0.0)
    assert zero.surviving == list(range(1, 8))


def test_copy_count_with_a_generous_constant():
    report = copy_count_statistic(_k4_with_isolated(), K3, 10, 10, 100.0, 0.5)
    assert report.fraction_below == 1.0
    with pytest.raises(ParameterError):
        copy_count_statistic(_k4_with_isolated(), K3, 0, 10, 1.0, 0.5)


@pytest.mark.slow
def test_buy_all_copy_counts_stay_below_threshold():
    n, t = 200, math.ceil(200 ** 1.5)
    outcome = run_trial(n, t, make_buy_all(t), lambda G, w: True, seed=2024)
    report = copy_count_statistic(outcome.final_bought, K3, t, t, 100.0, 0.05)
    assert report.fraction_below >= 0.95
