"""
The budget-constrained random graph process.

Edges of K_n arrive in uniformly random order; before each arrival the
strategy is asked for a purchase probability, the engine flips the coin and
records the decision irrevocably. The engine, not the strategy, enforces the
budget and owns all randomness.
"""
from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from budgetgraph.errors import ParameterError, StrategyContractError
from budgetgraph.graph import (
    Edge,
    Graph,
    GraphBuilder,
    as_generator,
    complete_edge_count,
    edges_from_indices,
    sample_process_prefix,
    RandomSource,
)
from budgetgraph.models import ExperimentConfig, StageLogEntry, TrialRecord

logger = logging.getLogger(__name__)

Checker = Callable[[Graph, Optional[object]], bool]


class DecisionHistory:
    """
    Presented edges with their purchase bits, plus the running graphs.

    Strategies read it; only the engine appends to it.
    """

    __slots__ = ("n", "presented", "purchases", "bought", "seen", "budget_used")

    def __init__(self, n: int):
        self.n = n
        self.presented: List[Edge] = []
        self.purchases = bytearray()
        self.bought = GraphBuilder(n)
        self.seen = GraphBuilder(n)
        self.budget_used = 0

    def __len__(self) -> int:
        return len(self.presented)

    def record(self, edge: Edge, bought: bool) -> None:
        self.presented.append(edge)
        self.purchases.append(1 if bought else 0)
        self.seen.add_edge(*edge)
        if bought:
            self.bought.add_edge(*edge)
            self.budget_used += 1

    def was_presented(self, u: int, v: int) -> bool:
        return self.seen.has_edge(u, v)

    def bought_edges(self, step: Optional[int] = None) -> List[Edge]:
        length = len(self.presented) if step is None else step
        return [e for e, bit in zip(self.presented[:length], self.purchases[:length]) if bit]

    def bought_graph(self, step: Optional[int] = None) -> Graph:
        """B_step; the current bought graph when ``step`` is None."""
        if step is None:
            return self.bought.freeze()
        return Graph(self.n, self.bought_edges(step))

    def presented_graph(self, step: Optional[int] = None) -> Graph:
        """G_step; the current presented graph when ``step`` is None."""
        if step is None:
            return self.seen.freeze()
        return Graph(self.n, self.presented[:step])


class Strategy(ABC):
    """
    A (t,b)-strategy.

    Subclasses implement :meth:`decide`; :meth:`start` resets per-trial state
    and is called by the engine before the first step. ``decide`` is only
    queried while budget remains.

    Attributes:
        name: Label used in summaries
        budget: The budget b
        deterministic: Whether decide only returns 0 or 1
    """

    name = "strategy"
    deterministic = True

    def __init__(self, budget: int):
        if budget < 0:
            raise ParameterError(f"budget must be non-negative, got {budget}")
        self.budget = budget
        self.stage_log: List[StageLogEntry] = []

    def start(self, n: int, t: int) -> None:
        self.stage_log = []

    @abstractmethod
    def decide(self, step: int, history: DecisionHistory, edge: Edge) -> float:
        """Purchase probability for ``edge`` presented at ``step`` (1-based)."""

    def observe(self, step: int, history: DecisionHistory, edge: Edge, bought: bool) -> None:
        """Called after every step, including steps after the budget ran out."""

    def finish(self, history: DecisionHistory) -> None:
        """Called once after the last step."""

    def witness(self) -> Optional[object]:
        return None

    def log_stage(self, stage: str, success: bool, detail: str = "") -> None:
        self.stage_log.append(StageLogEntry(stage=stage, success=success, detail=detail))


@dataclass
class TrialOutcome:
    n: int
    t: int
    budget: int
    seed: int
    history: DecisionHistory
    final_bought: Graph
    final_presented: Graph
    budget_used: int
    success: bool
    errored: bool = False
    error: Optional[str] = None
    stage_log: List[StageLogEntry] = field(default_factory=list)
    witness: Optional[object] = None

    def to_record(self, index: int) -> TrialRecord:
        witness = self.witness
        if witness is not None and not isinstance(witness, list):
            witness = list(witness)
        return TrialRecord(
            index=index,
            seed=self.seed,
            t=self.t,
            b=self.budget,
            budget_used=self.budget_used,
            success=self.success,
            errored=self.errored,
            error=self.error,
            stage_log=self.stage_log,
            witness=witness,
        )


def _trial_streams(seed: int) -> Tuple[np.random.Generator, np.random.Generator]:
    """Independent streams for the edge order and the purchase coins."""
    edges_seq, coins_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(edges_seq), np.random.default_rng(coins_seq)


def _purchase(strategy: Strategy, step: int, history: DecisionHistory, edge: Edge,
              coins: np.random.Generator) -> bool:
    value = strategy.decide(step, history, edge)
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise StrategyContractError(f"{strategy.name} returned non-numeric {value!r} at step {step}")
    if math.isnan(value) or not 0.0 <= value <= 1.0:
        raise StrategyContractError(f"{strategy.name} returned {value} outside [0, 1] at step {step}")
    if strategy.deterministic and value not in (0.0, 1.0):
        raise StrategyContractError(f"deterministic {strategy.name} returned {value} at step {step}")
    if value == 1.0:
        return True
    if value == 0.0:
        return False
    # the coin is drawn only for genuinely random decisions
    return bool(coins.random() < value)


def drive(n: int, edges: Sequence[Edge], strategy: Strategy, coins: np.random.Generator) -> DecisionHistory:
    """Run ``strategy`` over a fixed presentation order and return its history."""
    strategy.start(n, len(edges))
    history = DecisionHistory(n)
    for step, edge in enumerate(edges, start=1):
        bought = False
        if history.budget_used < strategy.budget:
            bought = _purchase(strategy, step, history, edge, coins)
        history.record(edge, bought)
        strategy.observe(step, history, edge, bought)
    strategy.finish(history)
    return history


def run_trial(n: int, t: int, strategy: Strategy, checker: Checker, seed: int) -> TrialOutcome:
    """
    Run one trial of the process under ``strategy``.

    Args:
        n: Number of vertices
        t: Number of presented edges
        strategy: The strategy; its per-trial state is reset
        checker: Property evaluated on (B_t, strategy witness)
        seed: Seed of this trial

    Returns:
        The trial outcome. A checker exception marks it errored.

    Raises:
        ParameterError: If t > M
        StrategyContractError: If the strategy returns an invalid probability
    """
    if not 0 <= t <= complete_edge_count(n):
        raise ParameterError(f"t={t} outside [0, {complete_edge_count(n)}] for n={n}")
    edge_rng, coins = _trial_streams(seed)
    sequence = sample_process_prefix(n, t, edge_rng)
    history = drive(n, sequence.edges, strategy, coins)
    bought = history.bought_graph()
    witness = strategy.witness()
    success, errored, error = False, False, None
    try:
        success = bool(checker(bought, witness))
    except Exception as e:
        logger.warning("checker raised on seed %d: %s", seed, e)
        errored, error = True, f"{type(e).__name__}: {e}"
    return TrialOutcome(
        n=n,
        t=t,
        budget=strategy.budget,
        seed=seed,
        history=history,
        final_bought=bought,
        final_presented=history.presented_graph(),
        budget_used=history.budget_used,
        success=success,
        errored=errored,
        error=error,
        stage_log=list(strategy.stage_log),
        witness=witness,
    )


def replay_trial(outcome: TrialOutcome, strategy: Strategy) -> bool:
    """Re-drive the recorded presentation order; True iff the purchase bits repeat."""
    _, coins = _trial_streams(outcome.seed)
    replayed = drive(outcome.n, outcome.history.presented, strategy, coins)
    return replayed.purchases == outcome.history.purchases


def child_seed(master_seed: int, index: int) -> int:
    """Seed of trial ``index``, independent of how trials are scheduled."""
    state = np.random.SeedSequence(master_seed, spawn_key=(index,)).generate_state(1, dtype=np.uint64)
    return int(state[0])


def _batch_worker(payload: Tuple[str, int, int]) -> Tuple[int, TrialOutcome]:
    from budgetgraph.strategies.registry import build_checker, build_strategy

    config_json, index, seed = payload
    config = ExperimentConfig.model_validate_json(config_json)
    strategy = build_strategy(config)
    checker = build_checker(config)
    return index, run_trial(config.process.n, config.process.resolved_t, strategy, checker, seed)


def run_batch(config: ExperimentConfig, master_seed: int, jobs: int = 1) -> List[TrialOutcome]:
    """
    Run ``config.process.trials`` independent trials.

    Trial i always runs with ``child_seed(master_seed, i)`` and results come
    back in index order, so the list is the same for any ``jobs``.
    """
    trials = config.process.trials
    logger.info(
        "batch start: strategy=%s n=%d t=%d trials=%d jobs=%d",
        config.strategy.name, config.process.n, config.process.resolved_t, trials, jobs,
    )
    config_json = config.model_dump_json()
    payloads = [(config_json, i, child_seed(master_seed, i)) for i in range(trials)]
    if jobs <= 1 or trials <= 1:
        results = [_batch_worker(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_batch_worker, payloads))
    results.sort(key=lambda item: item[0])
    outcomes = [outcome for _, outcome in results]
    logger.info("batch finish: %d/%d successes", sum(o.success for o in outcomes), trials)
    return outcomes


def sample_hitting_time(n: int, prop: Callable[[Graph], bool], rng: RandomSource) -> Optional[int]:
    """
    First step of the unrestricted process at which a monotone ``prop`` holds.

    One full presentation order is sampled and the prefix length is found by
    binary search, which is exact for monotone properties. Returns None when
    even K_n fails the property.
    """
    total = complete_edge_count(n)
    order = edges_from_indices(as_generator(rng).permutation(total))
    if not prop(Graph(n, order)):
        return None
    lo, hi = 0, total
    while lo < hi:
        mid = (lo + hi) // 2
        if prop(Graph(n, order[:mid])):
            hi = mid
        else:
            lo = mid + 1
    return lo
