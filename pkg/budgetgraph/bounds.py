"""
Time/budget tradeoff curves and the per-vertex copy-count statistic.

Every curve is affine in x = log_n t: for a pattern with maximum
1-density d the budget exponent is (2d - 1) - (d - 1)x, valid from the
hitting-time exponent 2 - 1/d up to 2. Cliques K_r have d = r/2 and the
k-th power of a Hamilton cycle behaves like d = k.
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Literal, Optional, Sequence, Set, Union

from budgetgraph.checkers import PatternEmbedder
from budgetgraph.errors import ParameterError
from budgetgraph.graph import Graph, normalize_edge
from budgetgraph.models import CopyCountReport

logger = logging.getLogger(__name__)

Family = Literal["clique_factor", "f_factor", "ham_power"]
BoundKind = Literal["lower_bound", "strategy_budget_full", "strategy_budget_partial"]

CSV_HEADER = "family,param,x,log_n_b,kind"


@dataclass(frozen=True)
class BoundSpec:
    """
    One curve.

    ``param`` is r for cliques, d*(F) for general factors and k for powers
    of Hamilton cycles. ``pattern_order`` is v(F), needed only for the
    polylog correction of the full strictly balanced strategy budget.
    """

    family: Family
    param: Union[int, Fraction]
    kind: BoundKind = "lower_bound"
    pattern_order: Optional[int] = None

    def __post_init__(self):
        if self.family == "clique_factor" and (not isinstance(self.param, int) or self.param < 2):
            raise ParameterError(f"clique order must be an integer >= 2, got {self.param}")
        if self.family == "ham_power" and (not isinstance(self.param, int) or self.param < 1):
            raise ParameterError(f"Hamilton cycle power must be an integer >= 1, got {self.param}")
        if self.family == "f_factor" and Fraction(self.param) < 1:
            raise ParameterError(f"maximum 1-density must be at least 1, got {self.param}")

    @property
    def density(self) -> Fraction:
        if self.family == "clique_factor":
            return Fraction(self.param, 2)
        return Fraction(self.param)

    @property
    def x_min(self) -> Fraction:
        return 2 - 1 / self.density

    @property
    def label(self) -> str:
        return str(self.param) if not isinstance(self.param, Fraction) else f"{self.param.numerator}/{self.param.denominator}"

    def polylog_power(self) -> Fraction:
        """Exponent c of the (ln n)^c factor the strategy budget carries on top of n^x."""
        if self.kind != "strategy_budget_full" or self.family == "ham_power":
            return Fraction(0)
        order = self.param if self.family == "clique_factor" else self.pattern_order
        if order is None:
            return Fraction(0)
        return Fraction(1, order - 1)


def budget_exponent(spec: BoundSpec, x: Union[float, Fraction]) -> Union[float, Fraction]:
    """
    log_n b as a function of x = log_n t.

    Exact when ``x`` is a Fraction.

    Raises:
        ParameterError: If x lies outside [2 - 1/d, 2]
    """
    if not spec.x_min <= x <= 2:
        raise ParameterError(f"x={x} outside [{spec.x_min}, 2] for {spec.family}({spec.label})")
    d = spec.density
    if spec.family == "clique_factor":
        r = spec.param
        return (r - 1) - (Fraction(r, 2) - 1) * x
    return (2 * d - 1) - (d - 1) * x


def polylog_correction(spec: BoundSpec, n: int) -> float:
    """log_n((ln n)^c) for the bound's polylog power c."""
    c = spec.polylog_power()
    if c == 0:
        return 0.0
    if n < 3:
        raise ParameterError(f"polylog correction needs n >= 3, got {n}")
    return float(c) * math.log(math.log(n)) / math.log(n)


def curve_table(specs: Sequence[BoundSpec], x_grid: Sequence[float], n: Optional[int] = None) -> str:
    """
    CSV rows family,param,x,log_n_b,kind with six decimals.

    Grid points outside a curve's valid range are skipped for that curve;
    with ``n`` given, strategy-budget rows include the polylog correction.
    """
    lines = [CSV_HEADER]
    for spec in specs:
        for x in x_grid:
            if not spec.x_min <= x <= 2:
                continue
            value = float(budget_exponent(spec, x))
            if n is not None:
                value += polylog_correction(spec, n)
            lines.append(f"{spec.family},{spec.label},{float(x):.6f},{value:.6f},{spec.kind}")
    return "\n".join(lines) + "\n"


def exponent_grid(specs: Sequence[BoundSpec], points: int = 50) -> List[Fraction]:
    """Evenly spaced exact x values from the lowest curve start up to 2, endpoints included."""
    if points < 2:
        raise ParameterError(f"a grid needs at least two points, got {points}")
    start = min((spec.x_min for spec in specs), default=Fraction(1))
    step = (2 - start) / (points - 1)
    return [start + i * step for i in range(points)]


def copy_threshold(n: int, t: int, b: int, F: Graph, lam: float) -> float:
    """lambda * b^(v-1) * t^(e-v+1) * n^(v-2e-1)."""
    v, e = F.n, F.edge_count
    return lam * b ** (v - 1) * t ** (e - v + 1) * n ** (v - 2 * e - 1)


def _copies_by_vertex(B: Graph, F: Graph) -> List[Set[int]]:
    """Vertex sets of the distinct copies of F in B, one entry per copy."""
    embedder = PatternEmbedder(F)
    seen: Set[frozenset] = set()
    copies: List[Set[int]] = []
    pattern_edges = list(F.edges())
    for phi in embedder.embeddings(B):
        image = frozenset(normalize_edge(phi[a], phi[b]) for a, b in pattern_edges)
        if image in seen:
            continue
        seen.add(image)
        copies.append(set(phi))
    return copies


def copy_count_statistic(B: Graph, F: Graph, t: int, b: int, lam: float, epsilon: float) -> CopyCountReport:
    """
    Greedy vertex removal until every survivor lies in few copies of F.

    The vertex in most copies is removed while some survivor exceeds the
    threshold; it stops once more than epsilon*n vertices have gone.

    Args:
        B: Bought graph
        F: Pattern
        t: Number of presented edges
        b: Budget
        lam: Constant in front of the threshold
        epsilon: Largest removed fraction

    Returns:
        The report; ``lambda_needed`` is the smallest lam at which nothing
        would be removed
    """
    if t < 1 or b < 1:
        raise ParameterError(f"t and b must be positive, got t={t}, b={b}")
    n = B.n
    threshold = copy_threshold(n, t, b, F, lam)
    copies = _copies_by_vertex(B, F)
    counts = [0] * n
    containing: Dict[int, List[int]] = {v: [] for v in range(n)}
    for index, vertices in enumerate(copies):
        for v in vertices:
            counts[v] += 1
            containing[v].append(index)
    lambda_needed = max(counts, default=0) / copy_threshold(n, t, b, F, 1.0)

    alive = [True] * len(copies)
    survivors = set(range(n))
    removed = 0
    while survivors and removed <= epsilon * n:
        worst = max(survivors, key=lambda v: (counts[v], -v))
        if counts[worst] <= threshold:
            break
        survivors.discard(worst)
        removed += 1
        for index in containing[worst]:
            if alive[index]:
                alive[index] = False
                for u in copies[index]:
                    counts[u] -= 1
    logger.info("copy count: %d copies, %d vertices removed, lambda needed %.4g", len(copies), removed, lambda_needed)
    return CopyCountReport(
        n=n,
        threshold=threshold,
        surviving=sorted(survivors),
        max_count=max((counts[v] for v in survivors), default=0),
        fraction_below=len(survivors) / n if n else 1.0,
        lambda_needed=lambda_needed,
    )
