"""Build strategies and checkers from a validated experiment config."""
import logging
from typing import Optional

from budgetgraph.checkers import (
    has_f_factor,
    is_acyclic,
    is_connected,
    max_disjoint_copies,
    min_degree,
    verify_ham_power,
)
from budgetgraph.engine import Checker, Strategy
from budgetgraph.errors import ConfigError, ParameterError
from budgetgraph.graph import Graph
from budgetgraph.hampower import derive_params, make_ham_power_strategy
from budgetgraph.models import ExperimentConfig
from budgetgraph.patterns import parse_pattern, pattern_stats
from budgetgraph.strategies.basic import (
    make_buy_all,
    make_fixed_subgraph,
    make_forest,
    make_min_degree_greedy,
    named_subgraph,
)
from budgetgraph.strategies.partition import make_partition_factor, required_copies

logger = logging.getLogger(__name__)


def _require(value: Optional[str], field: str) -> str:
    if not value:
        raise ConfigError(field, "required for this choice")
    return value


def build_strategy(config: ExperimentConfig) -> Strategy:
    """
    Fresh strategy instance for one trial.

    Raises:
        ConfigError: Naming the strategy field that makes the build fail
    """
    spec = config.strategy
    n, t = config.process.n, config.process.resolved_t
    budget = t if spec.budget is None else spec.budget
    try:
        if spec.name == "buy_all":
            return make_buy_all(budget)
        if spec.name == "fixed_subgraph":
            target = named_subgraph(_require(spec.subgraph, "strategy.subgraph"), n)
            return make_fixed_subgraph(target, spec.budget)
        if spec.name == "forest":
            return make_forest(budget)
        if spec.name == "min_degree_greedy":
            return make_min_degree_greedy(spec.kdeg, budget)
        if spec.name == "partition_factor":
            if spec.budget is not None:
                raise ConfigError("strategy.budget", "partition_factor derives its budget from its mode")
            pattern = _require(spec.pattern, "strategy.pattern")
            mode = spec.mode or "full_strictly_balanced"
            stats = pattern_stats(parse_pattern(pattern), name=pattern)
            strategy, _ = make_partition_factor(stats, n, t, spec.K, mode, spec.alpha)
            return strategy
        if spec.name == "ham_power":
            params = derive_params(
                n, t, spec.k, spec.epsilon, spec.j, spec.ell, spec.q, spec.r,
                spec.k_pi, spec.k_sigma, spec.epsilon_prime, spec.threshold_scale, spec.search_budget,
                eta=spec.eta,
                stage_weights=spec.stage_weights,
                pool_slack=spec.pool_slack,
                search_restarts=spec.search_restarts,
                search_seed=spec.search_seed,
            )
            return make_ham_power_strategy(params, spec.budget)
    except ConfigError:
        raise
    except ParameterError as e:
        raise ConfigError(f"strategy.{spec.name}", str(e)) from e
    raise ConfigError("strategy.name", f"unknown strategy '{spec.name}'")


def build_checker(config: ExperimentConfig) -> Checker:
    """
    Property evaluated on the final bought graph and the strategy witness.

    Raises:
        ConfigError: If the checker needs a pattern and none is configured,
            or the pattern does not fit n
    """
    spec = config.checker
    n = config.process.n
    if spec.name == "nonempty":
        return lambda G, witness: G.edge_count >= 1
    if spec.name == "min_degree":
        return lambda G, witness: min_degree(G) >= spec.k
    if spec.name == "connected":
        return lambda G, witness: is_connected(G)
    if spec.name == "acyclic":
        return lambda G, witness: is_acyclic(G)
    if spec.name == "ham_power":
        return lambda G, witness: witness is not None and verify_ham_power(G, witness, spec.k)

    name = spec.pattern or config.strategy.pattern
    if not name:
        raise ConfigError("checker.pattern", "required for factor checkers")
    try:
        F = parse_pattern(name)
    except ParameterError as e:
        raise ConfigError("checker.pattern", str(e)) from e
    if spec.name == "f_factor":
        if n % F.n:
            raise ConfigError("checker.pattern", f"v(F)={F.n} does not divide n={n}")
        return lambda G, witness: _has_factor(G, F)
    if spec.name == "alpha_factor":
        target = required_copies(n, F.n, spec.alpha)
        return lambda G, witness: max_disjoint_copies(G, F, target)[0] >= target
    raise ConfigError("checker.name", f"unknown checker '{spec.name}'")


def _has_factor(G: Graph, F: Graph) -> bool:
    return has_f_factor(G, F) is not None


def strategy_params(config: ExperimentConfig) -> Optional[dict]:
    """Derived parameters worth writing next to the trial log, if the strategy has any."""
    strategy = build_strategy(config)
    params = getattr(strategy, "params", None)
    return None if params is None else params.model_dump()

