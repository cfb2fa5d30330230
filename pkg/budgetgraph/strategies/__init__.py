"""Builder strategies: simple baselines, partition factor strategies and the registry."""
from budgetgraph.strategies.basic import (
    BuyAll,
    FixedSubgraph,
    Forest,
    MinDegreeGreedy,
    make_buy_all,
    make_fixed_subgraph,
    make_forest,
    make_min_degree_greedy,
)
from budgetgraph.strategies.partition import PartitionFactor, make_partition_factor

__all__ = [
    "BuyAll",
    "FixedSubgraph",
    "Forest",
    "MinDegreeGreedy",
    "PartitionFactor",
    "make_buy_all",
    "make_fixed_subgraph",
    "make_forest",
    "make_min_degree_greedy",
    "make_partition_factor",
]
