import os
from fractions import Fraction

import pytest

from budgetgraph.checkers import is_path_power, verify_ham_power
from budgetgraph.config import load_config
from budgetgraph.engine import run_batch, run_trial
from budgetgraph.errors import ConstructionError, ParameterError
from budgetgraph.graph import Graph, complete_edge_count, power_of_cycle_edges
from budgetgraph.hampower import (
    EndsequencePair,
    absorb,
    build_absorber_template,
    derive_params,
    estimate_sparseness,
    find_linkage,
    find_linkage_family,
    make_ham_power_strategy,
    smallest_admissible_ell,
    sparse_partition_match,
)
from budgetgraph.hampower.absorbers import absorber_max_density, spine_length, validate_absorber
from budgetgraph.hampower.linkages import interval_partition, linkage_edges, pair_edges_inside
from budgetgraph.hampower.params import choose_eta, is_prime, linkage_room_fits, split_stages
from budgetgraph.hampower.strategy import absorber_pool_parts
from budgetgraph.strategies.registry import build_checker, build_strategy
from tests.helpers import CONFIGS

GOLDEN = os.path.join(CONFIGS, "ham_power_generous.ini")


# absorbers

def test_template_shape():
    absorber = build_absorber_template(3, 4, 2)
    assert absorber.s == spine_length(3, 4) == 40
    assert absorber.graph().n == 41
    assert absorber.initial_endsequence == (0, 1)
    assert absorber.final_endsequence == (38, 39)
    assert absorber.augmented[:2] == absorber.spine[:2]


@pytest.mark.parametrize("j, ell, k", [(2, 4, 2), (3, 3, 2), (3, 6, 1)])
def test_template_rejects_bad_parameters(j, ell, k):
    with pytest.raises(ParameterError):
        build_absorber_template(j, ell, k)


def test_template_density_is_just_above_k():
    density = absorber_max_density(3, 4, 2)
    assert Fraction(2) < density <= Fraction(5, 2)
    assert smallest_admissible_ell(3, 2, Fraction(1, 2), max_ell=6) == 4
    assert smallest_admissible_ell(3, 2, Fraction(1, 10), max_ell=5) is None


def test_embedded_absorber_swaps_into_a_cycle():
    template = build_absorber_template(3, 4, 2)
    phi = [v + 100 for v in range(template.graph().n)]
    absorber = template.embed(phi)
    validate_absorber(absorber)
    fillers = list(range(200, 205))
    cycle = list(absorber.spine) + fillers
    host = Graph(205, power_of_cycle_edges(cycle, 2) | set(absorber.edges))
    order = absorb(cycle, [absorber], [absorber.absorption_vertex])
    assert len(order) == len(cycle) + 1
    assert verify_ham_power(host.relabel(sorted(order)), [sorted(order).index(v) for v in order], 2)


def test_absorb_rejects_unknown_vertices_and_broken_spines():
    absorber = build_absorber_template(3, 4, 2)
    cycle = list(absorber.spine) + [41, 42, 43, 44, 45]
    with pytest.raises(ConstructionError):
        absorb(cycle, [absorber], [99])
    shuffled = [cycle[1], cycle[0]] + cycle[2:]
    with pytest.raises(ConstructionError):
        absorb(shuffled, [absorber], [absorber.absorption_vertex])


# linkages

def test_linkage_is_found_exactly():
    pair = EndsequencePair((0, 1), (2, 3))
    G = Graph(8, linkage_edges(pair, (4, 5), 2))
    linkage = find_linkage(G, pair, 2, [4, 5, 6, 7])
    assert linkage.internal == (4, 5)
    assert linkage.path == (0, 1, 4, 5, 2, 3)
    assert not linkage.edges & pair_edges_inside(pair)
    missing = Graph(8, linkage_edges(pair, (4, 5), 2) - {(1, 5)})
    assert find_linkage(missing, pair, 2, [4, 5, 6, 7]) is None


def test_zero_length_linkage_uses_direct_edges():
    pair = EndsequencePair((0, 1), (2, 3))
    assert find_linkage(Graph(4, [(0, 2), (1, 2), (1, 3)]), pair, 0, []).internal == ()
    assert find_linkage(Graph(4, [(0, 2), (1, 2)]), pair, 0, []) is None


def test_linkage_argument_checks():
    pair = EndsequencePair((0, 1), (2, 3))
    with pytest.raises(ParameterError):
        find_linkage(Graph.complete(6), pair, -1, [4, 5])
    with pytest.raises(ParameterError):
        find_linkage(Graph.complete(6), pair, 1, [1, 4])
    with pytest.raises(ParameterError):
        EndsequencePair((0, 1), (1, 2))


def test_linkage_family_backtracks():
    first = EndsequencePair((0, 1), (2, 3))
    second = EndsequencePair((4, 5), (6, 7))
    edges = linkage_edges(first, (8,), 2) | linkage_edges(first, (9,), 2) | linkage_edges(second, (8,), 2)
    G = Graph(16, edges)
    found = find_linkage_family(G, [first, second], 1, list(range(8, 16)))
    assert [link.internal for link in found] == [(9,), (8,)]


def test_linkage_family_needs_room():
    pairs = [EndsequencePair((0, 1), (2, 3)), EndsequencePair((4, 5), (6, 7))]
    with pytest.raises(ParameterError):
        find_linkage_family(Graph.complete(12), pairs, 1, [8, 9, 10, 11])


def test_interval_partition():
    assert interval_partition(5, 2) == [[0, 1, 2], [3, 4]]
    assert interval_partition(0, 1) == [[]]
    with pytest.raises(ParameterError):
        interval_partition(3, 0)


def test_sparse_partition_match():
    X = [[0], [1]]
    Y = [[10], [11]]
    assert sparse_partition_match(Graph.empty(12), X, Y, 0) == [[0], [1]]
    assert sparse_partition_match(Graph(12, [(0, 10)]), X, Y, 0) == [[1], [0]]
    assert sparse_partition_match(Graph(12, [(0, 10), (0, 11)]), X, Y, 0) is None
    assert sparse_partition_match(Graph(12, [(0, 10), (0, 11)]), X, Y, 1) == [[0], [1]]
    with pytest.raises(ParameterError):
        sparse_partition_match(Graph.empty(12), X, [[10], [10]], 0)
    with pytest.raises(ParameterError):
        sparse_partition_match(Graph.empty(12), X, [[10], [11, 9]], 0)


def test_sparseness_estimate(rng):
    empty = estimate_sparseness(Graph.empty(20), list(range(10)), [15], 2, 4, 0.1, rng, subsets=5, draws=30)
    assert empty.passed and empty.worst_ratio > 0
    full = estimate_sparseness(Graph.complete(20), list(range(10)), [15], 2, 4, 0.1, rng, subsets=5, draws=30)
    assert not full.passed and full.worst_ratio == 0
    with pytest.raises(ParameterError):
        estimate_sparseness(Graph.empty(20), list(range(10)), [], 5, 4, 0.1, rng)


# parameters

def test_is_prime():
    assert [q for q in range(20) if is_prime(q)] == [2, 3, 5, 7, 11, 13, 17, 19]


@pytest.mark.parametrize("n, eta, nu", [(127, 1, 2), (254, 2, 4)])
def test_derived_counts_fill_the_vertex_set(n, eta, nu):
    params = derive_params(n, complete_edge_count(n))
    assert (params.eta, params.nu, params.s) == (eta, nu, 40)
    assert params.eta * (params.s + 1) + params.nu * params.q == n
    assert sum(params.stage_lengths) == params.t
    assert 1 <= params.xi <= min(params.eta, params.nu + 1)
    assert 1 <= params.pi <= params.eta
    assert 1 <= params.sigma <= params.nu


def test_choose_eta_residue():
    eta = choose_eta(1000, 40, 43, 2)
    assert (1000 - eta * 41 - (eta - 1) * 2) % 43 == 0
    assert eta <= 1000 // 123


@pytest.mark.parametrize("kwargs", [
    {"n": 127, "t": 8001, "q": 41},
    {"n": 127, "t": 8001, "q": 45},
    {"n": 127, "t": 8001, "k": 1},
    {"n": 127, "t": 0},
    {"n": 50, "t": 100},
    {"n": 1264, "t": 798216, "q": 211, "r": 3, "eta": 23},
    {"n": 1264, "t": 798216, "q": 211, "r": 3, "eta": 24, "pool_slack": 281},
    {"n": 134, "t": 8911, "q": 47, "r": 5, "eta": 2},
    {"n": 127, "t": 8001, "stage_weights": (1, 1, 1)},
])
def test_derive_params_rejects(kwargs):
    with pytest.raises(ParameterError):
        derive_params(**kwargs)


# assembly

@pytest.mark.parametrize("n", [127, 254])
def test_stages_assemble_on_a_complete_host(n):
    strategy = make_ham_power_strategy(derive_params(n, complete_edge_count(n)))
    host = Graph.complete(n)
    assert strategy.close_stage_one(host)
    assert len(strategy.absorbers) == strategy.params.eta
    assert strategy.close_stage_two(host)
    assert strategy.close_stage_three(host, Graph.empty(n))
    assert len(strategy.closing_pairs) == strategy.params.nu + 1
    assert strategy.close_stage_four(host)
    order = strategy.witness()
    assert sorted(order) == list(range(n))
    assert verify_ham_power(host, order, 2)
    assert [entry.stage for entry in strategy.stage_log] == ["stage1", "stage2", "stage3", "stage4", "absorption"]


def test_stage_one_fails_without_absorbers():
    n = 127
    strategy = make_ham_power_strategy(derive_params(n, complete_edge_count(n)))
    assert not strategy.close_stage_one(Graph.empty(n))
    assert strategy.stage_log[-1].stage == "stage1"
    assert not strategy.stage_log[-1].success


def test_strategy_is_bound_to_its_vertex_count():
    strategy = make_ham_power_strategy(derive_params(127, 8001))
    with pytest.raises(ParameterError):
        strategy.start(128, 100)


def _closing_setup():
    # r=1 and eta=8 leave four absorption vertices per group, so xi=2 has room
    n = 378
    strategy = make_ham_power_strategy(derive_params(n, complete_edge_count(n), r=1, eta=8))
    host = Graph.complete(n)
    assert strategy.close_stage_one(host)
    assert strategy.close_stage_two(host)
    assert strategy.close_stage_three(host, Graph.empty(n))
    return strategy, host


def test_closing_threshold_moves_a_crowded_pair():
    strategy, host = _closing_setup()
    assert (strategy.params.xi, strategy.threshold) == (2, 1)
    assert [len(Y) for Y in strategy.Y_parts] == [4, 4]
    assert strategy.J_groups == [[0], [1]]
    Y0, Y1 = strategy.Y_parts
    first, second = (pair.vertices[0] for pair in strategy.closing_pairs)
    crowded = Graph(host.n, [(first, y) for y in Y0[:2]] + [(second, y) for y in Y1[:2]])
    assert strategy.assign_closing_groups(crowded)
    assert strategy.J_groups == [[1], [0]]
    assert strategy.close_stage_four(host)
    order = strategy.witness()
    assert verify_ham_power(host, order, 2)
    assert set(strategy.closing_linkages[0].internal) <= set(Y1)


def test_closing_threshold_can_leave_no_assignment():
    strategy, host = _closing_setup()
    assert not strategy.assign_closing_groups(host)
    assert strategy.stage_log[-1].stage == "stage4"
    assert not strategy.stage_log[-1].success


def test_split_stages():
    assert split_stages(100, (1, 1, 1, 1)) == [25, 25, 25, 25]
    assert split_stages(10, (1, 1, 1, 1)) == [2, 2, 2, 4]
    assert split_stages(798216, (5, 2, 3, 10)) == [199554, 79821, 119732, 399109]
    with pytest.raises(ParameterError):
        split_stages(100, (1, 0, 1, 1))


def test_linkage_room():
    assert linkage_room_fits(280, 24, 1, 3, 1)
    assert not linkage_room_fits(280, 24, 1, 3, 2)
    assert linkage_room_fits(50, 8, 1, 1, 2)
    assert linkage_room_fits(0, 5, 3, 0, 3)


def test_absorber_pool_parts_deal_the_slack():
    parts = absorber_pool_parts(list(range(10)), 2, 3, 2)
    assert parts == [[0, 1, 2, 6, 8], [3, 4, 5, 7, 9]]
    assert absorber_pool_parts(list(range(6)), 1, 3, 2) == [[0, 1, 2, 3, 4, 5]]


def test_golden_parameters():
    config, _ = load_config(GOLDEN)
    params = build_strategy(config).params
    assert (params.n, params.t) == (1264, 798216)
    assert (params.eta, params.nu, params.q, params.r) == (24, 1, 211, 3)
    assert (params.xi_formula, params.xi) == (149, 1)
    assert (params.pi, params.sigma) == (1, 1)
    assert params.pool_slack == 1264 - 24 * 41
    assert params.stage_lengths == [199554, 79821, 119732, 399109]
    assert params.budget > params.stage_lengths[0] + 20_000


@pytest.mark.slow
def test_golden_process_run_builds_the_cycle():
    config, _ = load_config(GOLDEN)
    n, t = config.process.n, config.process.resolved_t
    checker = build_checker(config)
    for seed in (2024, 2025, 2026):
        strategy = build_strategy(config)
        outcome = run_trial(n, t, strategy, checker, seed=seed)
        assert outcome.budget_used <= strategy.budget
        if outcome.success:
            break
    assert outcome.success and not outcome.errored
    assert [(entry.stage, entry.success) for entry in outcome.stage_log] == [
        ("stage1", True), ("stage2", True), ("stage3", True), ("stage4", True), ("absorption", True),
    ]
    assert verify_ham_power(outcome.final_bought, outcome.witness, 2)

    p = strategy.params
    history = outcome.history
    ends = [sum(p.stage_lengths[:i]) for i in range(1, 4)]

    bought_one = history.bought_graph(ends[0])
    seen = set()
    for absorber in strategy.absorbers:
        validate_absorber(absorber)
        assert not seen.intersection(absorber.vertices)
        seen.update(absorber.vertices)
        assert all(bought_one.has_edge(u, v) for u, v in absorber.edges)
    assert len(strategy.absorbers) == p.eta

    bought_two = history.bought_graph(ends[1])
    allowed_two = set(strategy.W) | {v for link in strategy.linkages for v in link.pair.vertices}
    for link in strategy.linkages:
        assert set(link.internal) <= set(strategy.W_parts[0])
        assert all(bought_two.has_edge(u, v) for u, v in link.edges)
    for u, v in history.bought_edges(ends[1])[len(history.bought_edges(ends[0])):]:
        assert u in allowed_two and v in allowed_two

    bought_three = history.bought_graph(ends[2])
    assert all(is_path_power(bought_three, path, 2) for path in strategy.paths)
    U3 = set(strategy.U3)
    for u, v in history.bought_edges(ends[2])[len(history.bought_edges(ends[1])):]:
        assert u in U3 and v in U3

    presented = history.presented_graph(ends[2])
    assert strategy.threshold == 26
    for a, indices in enumerate(strategy.J_groups):
        Y = set(strategy.Y_parts[a])
        for i in indices:
            reach = {w for x in strategy.closing_pairs[i].vertices for w in range(n) if presented.has_edge(x, w)}
            assert len(reach & Y) <= strategy.threshold


@pytest.mark.slow
def test_golden_success_rate():
    config, _ = load_config(GOLDEN)
    outcomes = run_batch(config, 2024, jobs=4)
    assert len(outcomes) == 20
    assert not any(outcome.errored for outcome in outcomes)
    assert all(verify_ham_power(o.final_bought, o.witness, 2) for o in outcomes if o.success)
    assert sum(outcome.success for outcome in outcomes) >= 10
