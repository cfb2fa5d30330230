"""
Exact optimal success probabilities on tiny instances.

States are (presented edge set, bought edge set) as edge-index bitmasks;
the next edge is uniform over the edges not yet presented, so the set,
not the order, of presented edges determines the future. The ordered
history induction in :func:`ordered_history_value` does not use that
collapse and serves as an independent cross-check.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from budgetgraph.couplings import graphs_by_mask, increasing_table
from budgetgraph.engine import DecisionHistory, Strategy, drive
from budgetgraph.errors import CapacityError, ParameterError
from budgetgraph.graph import (
    Edge,
    Graph,
    RandomSource,
    as_generator,
    complete_edge_count,
    edge_index,
    edges_from_indices,
    sample_edge_indices,
)
from budgetgraph.models import OracleReport, fraction_text

logger = logging.getLogger(__name__)

# n <= 5; the state space is at most 3^10
MAX_ORACLE_EDGES = 10

State = Tuple[int, int]
Decision = Tuple[int, int, int]
GraphPredicate = Callable[[Graph], bool]


@dataclass
class OracleResult:
    n: int
    t: int
    b: int
    checker: str
    value: Fraction
    values: Dict[State, Fraction] = field(repr=False)
    policy: Dict[Decision, bool] = field(repr=False)

    @property
    def states(self) -> int:
        return len(self.values)

    def to_report(self) -> OracleReport:
        return OracleReport(
            n=self.n,
            t=self.t,
            b=self.b,
            checker=self.checker,
            value=fraction_text(self.value),
            value_float=float(self.value),
            states=self.states,
        )

    def to_json(self) -> dict:
        """Report plus the value of every visited state, keyed "presented,bought"."""
        return {
            "report": self.to_report().model_dump(),
            "values": {f"{P},{B}": fraction_text(v) for (P, B), v in sorted(self.values.items())},
        }


def _checked_instance(n: int, t: int, b: int, checker: GraphPredicate, label: str) -> Tuple[int, Dict[int, bool]]:
    total = complete_edge_count(n)
    if total > MAX_ORACLE_EDGES:
        raise CapacityError(f"oracle instances are capped at {MAX_ORACLE_EDGES} edges, n={n} has {total}")
    if not 0 <= t <= total:
        raise ParameterError(f"t={t} outside [0, {total}] for n={n}")
    if b < 0:
        raise ParameterError(f"budget must be non-negative, got {b}")
    return total, increasing_table(graphs_by_mask(n), checker, label, total)


def optimal_success(n: int, t: int, b: int, checker: GraphPredicate, label: str = "checker") -> OracleResult:
    """
    Success probability of the best (t,b)-strategy, by backward induction.

    At each state the next edge is uniform over the unpresented ones; buying
    is allowed while fewer than b edges are bought and the better of buy and
    skip is taken. The optimal policy buys only when buying is strictly better.

    Args:
        n: Number of vertices, with M <= 10
        t: Number of presented edges
        b: Budget
        checker: Increasing graph property
        label: Name of the property in reports

    Raises:
        ParameterError: If the checker is not increasing or t is outside [0, M]
        CapacityError: If M exceeds the oracle cap
    """
    total, success = _checked_instance(n, t, b, checker, label)
    values: Dict[State, Fraction] = {}
    policy: Dict[Decision, bool] = {}

    def value(presented: int, bought: int) -> Fraction:
        key = (presented, bought)
        if key in values:
            return values[key]
        if presented.bit_count() == t:
            result = Fraction(int(success[bought]))
        else:
            remaining = [e for e in range(total) if not presented >> e & 1]
            acc = Fraction(0)
            for e in remaining:
                skip = value(presented | 1 << e, bought)
                buy = value(presented | 1 << e, bought | 1 << e) if bought.bit_count() < b else None
                take = buy is not None and buy > skip
                policy[(presented, bought, e)] = take
                acc += buy if take else skip
            result = acc / len(remaining)
        values[key] = result
        return result

    optimum = value(0, 0)
    logger.info("oracle n=%d t=%d b=%d %s: %s over %d states", n, t, b, label, optimum, len(values))
    return OracleResult(n=n, t=t, b=b, checker=label, value=optimum, values=values, policy=policy)


def ordered_history_value(n: int, t: int, b: int, checker: GraphPredicate, label: str = "checker") -> Fraction:
    """
    Optimal value over decision trees indexed by the full ordered history.

    No state is shared between different presentation orders, so this is an
    independent check of the set-based induction. Exponential in t.
    """
    total, success = _checked_instance(n, t, b, checker, label)

    def value(order: Tuple[int, ...], bought: int) -> Fraction:
        if len(order) == t:
            return Fraction(int(success[bought]))
        presented = sum(1 << e for e in order)
        remaining = [e for e in range(total) if not presented >> e & 1]
        acc = Fraction(0)
        for e in remaining:
            best = value(order + (e,), bought)
            if bought.bit_count() < b:
                best = max(best, value(order + (e,), bought | 1 << e))
            acc += best
        return acc / len(remaining)

    return value((), 0)


def strategy_value(
    n: int, t: int, b: int, checker: GraphPredicate, probability: Callable[[int, int, int], float], label: str = "checker"
) -> Fraction:
    """
    Exact success probability of a state-table strategy.

    Args:
        probability: Purchase probability for (presented mask, bought mask, edge index)
    """
    total, success = _checked_instance(n, t, b, checker, label)
    memo: Dict[State, Fraction] = {}

    def value(presented: int, bought: int) -> Fraction:
        key = (presented, bought)
        if key in memo:
            return memo[key]
        if presented.bit_count() == t:
            result = Fraction(int(success[bought]))
        else:
            remaining = [e for e in range(total) if not presented >> e & 1]
            acc = Fraction(0)
            for e in remaining:
                q = Fraction(probability(presented, bought, e)) if bought.bit_count() < b else Fraction(0)
                acc += q * value(presented | 1 << e, bought | 1 << e) + (1 - q) * value(presented | 1 << e, bought)
            result = acc / len(remaining)
        memo[key] = result
        return result

    return value(0, 0)


def gnm_probability(n: int, m: int, checker: GraphPredicate) -> Fraction:
    """Exact probability that a uniform m-edge graph on [n] has the property."""
    total = complete_edge_count(n)
    if total > MAX_ORACLE_EDGES:
        raise CapacityError(f"exact enumeration is capped at {MAX_ORACLE_EDGES} edges, n={n} has {total}")
    if not 0 <= m <= total:
        raise ParameterError(f"m={m} outside [0, {total}] for n={n}")
    hits = sum(1 for mask, G in graphs_by_mask(n).items() if mask.bit_count() == m and checker(G))
    return Fraction(hits, math.comb(total, m))


class _MaskTracking(Strategy):
    """Keeps the presented and bought edge-index masks of the running trial."""

    def start(self, n: int, t: int) -> None:
        super().start(n, t)
        self.presented = 0
        self.bought = 0

    def observe(self, step: int, history: DecisionHistory, edge: Edge, bought: bool) -> None:
        bit = 1 << edge_index(*edge)
        self.presented |= bit
        if bought:
            self.bought |= bit


class PolicyStrategy(_MaskTracking):
    """Follows the optimal decisions found by :func:`optimal_success`."""

    name = "oracle_policy"

    def __init__(self, result: OracleResult):
        super().__init__(result.b)
        self.policy = result.policy

    def decide(self, step: int, history: DecisionHistory, edge: Edge) -> float:
        return 1.0 if self.policy.get((self.presented, self.bought, edge_index(*edge)), False) else 0.0


class RandomTableStrategy(_MaskTracking):
    """
    A randomized strategy with one fixed purchase probability per state and edge.

    The table is filled for every reachable (presented, bought, edge) triple
    in increasing key order, so a seed fixes the strategy completely.
    """

    name = "random_table"
    deterministic = False

    def __init__(self, n: int, t: int, budget: int, rng: RandomSource):
        super().__init__(budget)
        rng = as_generator(rng)
        total = complete_edge_count(n)
        self.table: Dict[Decision, float] = {}
        for presented in range(1 << total):
            if presented.bit_count() >= t:
                continue
            free = [e for e in range(total) if not presented >> e & 1]
            subsets = sorted(s for s in _submasks(presented) if s.bit_count() < budget)
            for bought in subsets:
                for e, q in zip(free, rng.random(len(free)).tolist()):
                    self.table[(presented, bought, e)] = q

    def decide(self, step: int, history: DecisionHistory, edge: Edge) -> float:
        return self.table[(self.presented, self.bought, edge_index(*edge))]

    def probability(self, presented: int, bought: int, e: int) -> float:
        return self.table.get((presented, bought, e), 0.0)


def _submasks(mask: int) -> List[int]:
    out, sub = [], mask
    while True:
        out.append(sub)
        if sub == 0:
            return out
        sub = (sub - 1) & mask


def simulate_strategy_rate(
    n: int, t: int, strategy: Strategy, checker: GraphPredicate, trials: int, rng: RandomSource = None
) -> float:
    """Monte Carlo success rate of ``strategy`` over ``trials`` presentation orders."""
    if trials < 1:
        raise ParameterError(f"need at least one trial, got {trials}")
    rng = as_generator(rng)
    total = complete_edge_count(n)
    hits = 0
    for _ in range(trials):
        edges = edges_from_indices(sample_edge_indices(total, t, rng))
        history = drive(n, edges, strategy, rng)
        hits += bool(checker(history.bought_graph()))
    return hits / trials


def simulate_policy_value(
    result: OracleResult, checker: GraphPredicate, trials: int, rng: RandomSource = None
) -> float:
    """Monte Carlo success rate of the optimal policy extracted from ``result``."""
    return simulate_strategy_rate(result.n, result.t, PolicyStrategy(result), checker, trials, rng)


def three_sigma(value: Fraction, trials: int) -> float:
    """Three standard deviations of a success rate with true value ``value``."""
    p = float(value)
    return 3 * math.sqrt(p * (1 - p) / trials) if trials else math.inf


def random_strategies(n: int, t: int, b: int, count: int, master_seed: int) -> List[RandomTableStrategy]:
    """``count`` seeded random table strategies with independent child seeds."""
    seeds = np.random.SeedSequence(master_seed).spawn(count)
    return [RandomTableStrategy(n, t, b, np.random.default_rng(s)) for s in seeds]


def monotonicity_grid(n: int, checker: GraphPredicate, label: str = "checker") -> Dict[Tuple[int, int], Fraction]:
    """optimal_success for every 0 <= b <= t <= M."""
    total = complete_edge_count(n)
    return {
        (t, b): optimal_success(n, t, b, checker, label).value
        for t in range(total + 1)
        for b in range(t + 1)
    }


def first_decreasing_pair(grid: Dict[Tuple[int, int], Fraction]) -> Optional[Tuple[Tuple[int, int], Tuple[int, int]]]:
    """A pair of grid points where the value drops as t or b grows, or None."""
    for (t, b), v in grid.items():
        for other in ((t + 1, b), (t, b + 1)):
            if other in grid and grid[other] < v:
                return (t, b), other
    return None
