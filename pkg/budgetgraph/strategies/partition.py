"""
Partition strategies for F-factors and alpha-F-factors.

The vertex set is cut once into k parts of v(F)-divisible size; every edge
presented inside a part is bought while budget remains. Part count and budget
follow the mode's formula with p = t/M and natural logarithms.
"""
import logging
import math
from typing import List, Tuple

from budgetgraph.engine import DecisionHistory, Strategy
from budgetgraph.errors import ParameterError
from budgetgraph.graph import Edge, complete_edge_count
from budgetgraph.models import PartitionMode, PartitionStrategyParams, fraction_text
from budgetgraph.patterns import PatternStats, f_equipartition

logger = logging.getLogger(__name__)

MODES = ("full_strictly_balanced", "partial", "full_nonbalanced")


class PartitionFactor(Strategy):
    """Buys an edge iff both endpoints lie in the same part."""

    name = "partition_factor"

    def __init__(self, n: int, parts: List[List[int]], budget: int, params: PartitionStrategyParams):
        super().__init__(budget)
        self.parts = parts
        self.params = params
        # -1 marks vertices left out of every part
        self.part_of = [-1] * n
        for index, part in enumerate(parts):
            for v in part:
                self.part_of[v] = index

    def decide(self, step: int, history: DecisionHistory, edge: Edge) -> float:
        a, b = self.part_of[edge[0]], self.part_of[edge[1]]
        return 1.0 if a == b and a >= 0 else 0.0


def part_count_and_budget(stats: PatternStats, n: int, t: int, K: float, mode: PartitionMode) -> Tuple[int, int, float]:
    """
    Part count k and budget b of a partition strategy.

    Returns:
        Tuple of (k, b, p)
    """
    p = t / complete_edge_count(n)
    v = stats.order
    log_n = math.log(n)
    if mode == "full_strictly_balanced":
        d = float(stats.one_density)
        polylog = log_n ** (1 / (v - 1))
        k = math.floor(p ** d * n / (K * polylog))
        b = math.floor(9 * K * t ** (1 - d) * n ** (2 * d - 1) * polylog)
    else:
        d = float(stats.max_one_density)
        k = math.floor(p ** d * n / K)
        b = math.floor(9 * K * t ** (1 - d) * n ** (2 * d - 1))
    return k, b, p


def make_partition_factor(
    stats: PatternStats, n: int, t: int, K: float, mode: PartitionMode, alpha: float = 1.0
) -> Tuple[PartitionFactor, PartitionStrategyParams]:
    """
    Build a partition strategy.

    Args:
        stats: The pattern F with its densities
        n: Number of vertices
        t: Number of presented edges
        K: Part-count tuning constant
        mode: full_strictly_balanced, partial or full_nonbalanced
        alpha: Fraction to cover in partial mode

    Returns:
        The strategy and its derived parameters

    Raises:
        ParameterError: If the pattern does not suit the mode, v(F) does not
            divide n in a full mode, or the derived part count is below 1
    """
    if mode not in MODES:
        raise ParameterError(f"unknown partition mode '{mode}'")
    v = stats.order
    if mode == "full_strictly_balanced" and not stats.strictly_one_balanced:
        raise ParameterError(f"{stats.name} is not strictly 1-balanced")
    if mode == "full_nonbalanced" and stats.vertex_balanced:
        raise ParameterError(f"{stats.name} is vertex-balanced; use full_strictly_balanced or partial")
    if mode != "partial" and n % v:
        raise ParameterError(f"v(F)={v} does not divide n={n}")
    if t < 1:
        raise ParameterError("a partition strategy needs t >= 1")
    k, b, p = part_count_and_budget(stats, n, t, K, mode)
    if k < 1:
        raise ParameterError(
            f"derived part count k={k} < 1 for n={n}, t={t}, K={K}: t is too small (p={p:.4g})"
        )
    usable = n - n % v
    blocks = usable // v
    if k > blocks:
        logger.warning("part count %d exceeds %d blocks of %d; using %d parts", k, blocks, v, blocks)
        k = blocks
    parts = f_equipartition(list(range(usable)), k, v)
    density = stats.one_density if mode == "full_strictly_balanced" else stats.max_one_density
    params = PartitionStrategyParams(
        pattern=stats.name,
        mode=mode,
        n=n,
        t=t,
        K=K,
        p=p,
        density=fraction_text(density),
        k=k,
        part_sizes=[len(part) for part in parts],
        b=b,
        alpha=alpha,
    )
    logger.info("partition strategy %s/%s: k=%d b=%d p=%.4f", stats.name, mode, k, b, p)
    return PartitionFactor(n, parts, b, params), params


def required_copies(n: int, v: int, alpha: float) -> int:
    """ceil(alpha * n / v(F))."""
    return math.ceil(alpha * n / v - 1e-12)


def part_witness_covers(parts: List[List[int]], copies: List[Tuple[int, ...]]) -> bool:
    """Whether every copy sits inside one part and the copies tile each part."""
    part_of = {v: i for i, part in enumerate(parts) for v in part}
    covered = [0] * len(parts)
    for copy in copies:
        owners = {part_of.get(v) for v in copy}
        if len(owners) != 1 or None in owners:
            return False
        covered[owners.pop()] += len(copy)
    return covered == [len(part) for part in parts]
