"""
Couplings between the random graph process and binomial random graphs.

The multi-stage sampler splits a process into stages of prescribed lengths
and places every stage between two independent binomial graphs; when the
sandwich cannot be formed it records the failure and falls back to a fresh
process, so the stage graphs always carry the exact process law. The
validators compare sampled laws with laws enumerated on tiny instances.
"""
from __future__ import annotations

import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Set, Tuple, Union

import numpy as np
from scipy.stats import chisquare

from budgetgraph.checkers import GRAPH_PROPERTIES
from budgetgraph.errors import CapacityError, ParameterError
from budgetgraph.graph import Graph, RandomSource, as_generator, complete_edge_count, iter_bits, sample_edge_indices
from budgetgraph.models import ChiSquareReport, FKGReport, fraction_text

logger = logging.getLogger(__name__)

MAX_FKG_VERTICES = 4
MAX_LAW_CELLS = 10_000

GraphPredicate = Callable[[Graph], bool]


@dataclass(frozen=True)
class MultistageSample:
    H: List[Graph]
    H_hat: List[Graph]
    H_bar: List[Graph]
    failure_step: Optional[int]


@dataclass(frozen=True)
class SandwichSample:
    H: Graph
    G_hat: Graph
    H_prime: Graph
    ok: bool


def default_probabilities(n: int, stage_lengths: Sequence[int]) -> Tuple[List[float], List[float]]:
    """
    Lower and top-up edge probabilities for each stage.

    p_i = (t_i/M)(1 - t_i^{-1/4}) and pbar_i = (t_i/M) t_i^{-1/4}; both are 0
    for an empty stage.
    """
    total = complete_edge_count(n)
    p_list, pbar_list = [], []
    for t_i in stage_lengths:
        if t_i == 0:
            p_list.append(0.0)
            pbar_list.append(0.0)
            continue
        slack = t_i ** -0.25
        p_list.append(t_i / total * (1 - slack))
        pbar_list.append(t_i / total * slack)
    return p_list, pbar_list


def _binomial_indices(total: int, p: float, rng: np.random.Generator) -> Set[int]:
    return set(sample_edge_indices(total, int(rng.binomial(total, p)), rng))


def _check_stages(n: int, stage_lengths: Sequence[int], p_list: Sequence[float], pbar_list: Sequence[float]) -> int:
    total = complete_edge_count(n)
    if not len(stage_lengths) == len(p_list) == len(pbar_list):
        raise ParameterError("stage lengths and probability lists must have equal length")
    if any(t_i < 0 for t_i in stage_lengths) or sum(stage_lengths) > total:
        raise ParameterError(f"stage lengths {list(stage_lengths)} do not fit M={total}")
    for p in itertools.chain(p_list, pbar_list):
        if not 0 <= p <= 1:
            raise ParameterError(f"edge probability {p} outside [0, 1]")
    return total


def _fresh_stages(total: int, stage_lengths: Sequence[int], rng: np.random.Generator) -> List[Set[int]]:
    order = sample_edge_indices(total, sum(stage_lengths), rng)
    stages, start = [], 0
    for t_i in stage_lengths:
        stages.append(set(order[start:start + t_i]))
        start += t_i
    return stages


def _multistage_indices(
    total: int,
    stage_lengths: Sequence[int],
    p_list: Sequence[float],
    pbar_list: Sequence[float],
    rng: np.random.Generator,
) -> Tuple[List[Set[int]], List[Set[int]], List[Set[int]], Optional[int]]:
    H = [_binomial_indices(total, p, rng) for p in p_list]
    H_bar = [_binomial_indices(total, p, rng) for p in pbar_list]
    H_hat: List[Set[int]] = []
    used: Set[int] = set()
    for i, t_i in enumerate(stage_lengths):
        forced = H[i] - used
        spare = H_bar[i] - H[i] - used
        if len(forced) > t_i or len(forced) + len(spare) < t_i:
            return H, _fresh_stages(total, stage_lengths, rng), H_bar, i
        extra = t_i - len(forced)
        top_up = rng.choice(sorted(spare), size=extra, replace=False).tolist() if extra else []
        stage = forced | set(top_up)
        H_hat.append(stage)
        used |= stage
    return H, H_hat, H_bar, None


def sample_multistage(
    n: int,
    stage_lengths: Sequence[int],
    p_list: Optional[Sequence[float]] = None,
    pbar_list: Optional[Sequence[float]] = None,
    rng: RandomSource = None,
) -> MultistageSample:
    """
    One draw of the multi-stage coupling.

    Stage i fails when H_i minus the earlier stages has more than t_i edges,
    or when H_i united with Hbar_i, minus the earlier stages, has fewer. On
    success Hhat_i is H_i minus the earlier stages plus a uniform top-up from
    Hbar_i; on the first failure every Hhat_i comes from a fresh process.

    Args:
        n: Number of vertices
        stage_lengths: t_1..t_k with sum at most M
        p_list: Edge probabilities of the H_i; see :func:`default_probabilities`
        pbar_list: Edge probabilities of the Hbar_i
        rng: Seed or Generator

    Returns:
        The sample; ``failure_step`` is the 0-based failing stage or None
    """
    defaults = default_probabilities(n, stage_lengths)
    p_list = defaults[0] if p_list is None else list(p_list)
    pbar_list = defaults[1] if pbar_list is None else list(pbar_list)
    total = _check_stages(n, stage_lengths, p_list, pbar_list)
    H, H_hat, H_bar, failure = _multistage_indices(total, stage_lengths, p_list, pbar_list, as_generator(rng))
    return MultistageSample(
        H=[Graph.from_edge_indices(n, sorted(s)) for s in H],
        H_hat=[Graph.from_edge_indices(n, sorted(s)) for s in H_hat],
        H_bar=[Graph.from_edge_indices(n, sorted(s)) for s in H_bar],
        failure_step=failure,
    )


def _sandwich_probabilities(total: int, m: int, p: float, p_prime: float, pbar: Optional[float]) -> Tuple[float, float]:
    if not 0 <= p <= 1 or not 0 <= p_prime <= 1:
        raise ParameterError(f"edge probabilities must lie in [0, 1], got p={p}, p'={p_prime}")
    if not p * total <= m <= p_prime * total:
        raise ParameterError(f"need p <= m/M <= p', got p={p}, m/M={m}/{total}, p'={p_prime}")
    if pbar is None:
        pbar = 0.0 if p == 1 else (p_prime - p) / (1 - p)
    union = 1 - (1 - p) * (1 - pbar)
    if union > p_prime + 1e-12:
        raise ParameterError(f"H united with Hbar has edge probability {union} above p'={p_prime}")
    # H' = H ∪ Hbar ∪ X with X independent, so that H' ~ G(n, p')
    keep = (1 - p) * (1 - pbar)
    extra = 0.0 if keep == 0 else max(0.0, 1 - (1 - p_prime) / keep)
    return pbar, extra


def _sandwich_indices(
    total: int, m: int, p: float, pbar: float, extra: float, rng: np.random.Generator
) -> Tuple[Set[int], Set[int], Set[int], bool]:
    H, H_hat, H_bar, _ = _multistage_indices(total, [m], [p], [pbar], rng)
    H_prime = H[0] | H_bar[0] | _binomial_indices(total, extra, rng)
    ok = H[0] <= H_hat[0] <= H_prime
    return H[0], H_hat[0], H_prime, ok


def sample_sandwich(
    n: int, m: int, p: float, p_prime: float, rng: RandomSource = None, pbar: Optional[float] = None
) -> SandwichSample:
    """
    H ~ G(n,p), Ghat ~ uniform m-edge graph and H' ~ G(n,p') on one space.

    Ghat is the one-stage multi-stage coupling; H' adds independent edges to
    H ∪ Hbar so that its law is exactly G(n,p'). ``ok`` reports whether
    H ⊆ Ghat ⊆ H' holds in this draw.

    Raises:
        ParameterError: Unless p <= m/M <= p', or if ``pbar`` pushes H ∪ Hbar above p'
    """
    total = complete_edge_count(n)
    pbar, extra = _sandwich_probabilities(total, m, p, p_prime, pbar)
    H, G_hat, H_prime, ok = _sandwich_indices(total, m, p, pbar, extra, as_generator(rng))
    return SandwichSample(
        H=Graph.from_edge_indices(n, sorted(H)),
        G_hat=Graph.from_edge_indices(n, sorted(G_hat)),
        H_prime=Graph.from_edge_indices(n, sorted(H_prime)),
        ok=ok,
    )


def _ordered_disjoint_sets(total: int, sizes: Sequence[int]) -> List[Tuple[FrozenSet[int], ...]]:
    cells = math.factorial(total)
    for size in sizes:
        cells //= math.factorial(size)
    cells //= math.factorial(total - sum(sizes))
    if cells > MAX_LAW_CELLS:
        raise CapacityError(f"the exact law has {cells} outcomes, above the cap of {MAX_LAW_CELLS}")
    out: List[Tuple[FrozenSet[int], ...]] = []

    def extend(prefix: Tuple[FrozenSet[int], ...], free: Tuple[int, ...]) -> None:
        if len(prefix) == len(sizes):
            out.append(prefix)
            return
        for chosen in itertools.combinations(free, sizes[len(prefix)]):
            rest = tuple(x for x in free if x not in chosen)
            extend(prefix + (frozenset(chosen),), rest)

    extend((), tuple(range(total)))
    return out


def _report(test: str, counts: Counter, cells: Sequence, samples: int, **extra) -> ChiSquareReport:
    observed = np.array([counts.get(cell, 0) for cell in cells], dtype=float)
    # every validated law is uniform over its cells
    expected = np.full(len(cells), samples / len(cells))
    result = chisquare(observed, expected)
    return ChiSquareReport(
        test=test,
        samples=samples,
        statistic=float(result.statistic),
        dof=len(cells) - 1,
        p_value=float(result.pvalue),
        **extra,
    )


def validate_multistage(
    n: int = 4,
    stage_lengths: Sequence[int] = (2, 2),
    p_list: Sequence[float] = (0.3, 0.3),
    pbar_list: Sequence[float] = (0.05, 0.05),
    samples: int = 100_000,
    rng: RandomSource = None,
) -> ChiSquareReport:
    """
    Chi-square of the joint stage law against the process law, plus containment counts.

    The true law of (Hhat_1, .., Hhat_k) is uniform over ordered tuples of
    pairwise disjoint edge sets of the given sizes. Every non-failing draw
    must satisfy H_i minus earlier stages ⊆ Hhat_i ⊆ H_i ∪ Hbar_i.
    """
    total = _check_stages(n, stage_lengths, p_list, pbar_list)
    cells = _ordered_disjoint_sets(total, stage_lengths)
    rng = as_generator(rng)
    counts: Counter = Counter()
    failures = violations = 0
    for _ in range(samples):
        H, H_hat, H_bar, failure = _multistage_indices(total, stage_lengths, p_list, pbar_list, rng)
        counts[tuple(frozenset(s) for s in H_hat)] += 1
        if failure is not None:
            failures += 1
            continue
        used: Set[int] = set()
        for i, stage in enumerate(H_hat):
            if len(stage) != stage_lengths[i] or not H[i] - used <= stage <= H[i] | H_bar[i] or stage & used:
                violations += 1
                break
            used |= stage
    report = _report("multistage", counts, cells, samples, failures=failures, containment_violations=violations)
    logger.info("multistage validator: chi2=%.3f p=%.4f failures=%d", report.statistic, report.p_value, failures)
    return report


def validate_sandwich(
    n: int = 4, m: int = 3, p: float = 0.2, p_prime: float = 0.8, samples: int = 20_000, rng: RandomSource = None
) -> ChiSquareReport:
    """Chi-square of the Ghat marginal against the uniform m-edge law, plus failed sandwiches."""
    total = complete_edge_count(n)
    pbar, extra = _sandwich_probabilities(total, m, p, p_prime, None)
    cells = [cell[0] for cell in _ordered_disjoint_sets(total, [m])]
    rng = as_generator(rng)
    counts: Counter = Counter()
    failures = 0
    for _ in range(samples):
        _, G_hat, _, ok = _sandwich_indices(total, m, p, pbar, extra, rng)
        counts[frozenset(G_hat)] += 1
        failures += not ok
    return _report("sandwich", counts, cells, samples, failures=failures)


def validate_gnm(n: int = 4, m: int = 3, samples: int = 20_000, rng: RandomSource = None) -> ChiSquareReport:
    """Chi-square of the process prefix of length m, as an edge set, against the uniform m-edge law."""
    total = complete_edge_count(n)
    cells = [cell[0] for cell in _ordered_disjoint_sets(total, [m])]
    rng = as_generator(rng)
    counts = Counter(frozenset(sample_edge_indices(total, m, rng)) for _ in range(samples))
    return _report("gnm", counts, cells, samples)


def failure_rate(
    n: int,
    stage_lengths: Sequence[int],
    p_list: Sequence[float],
    pbar_list: Sequence[float],
    samples: int,
    rng: RandomSource = None,
) -> float:
    total = _check_stages(n, stage_lengths, p_list, pbar_list)
    rng = as_generator(rng)
    failed = sum(
        _multistage_indices(total, stage_lengths, p_list, pbar_list, rng)[3] is not None for _ in range(samples)
    )
    return failed / samples


def graphs_by_mask(n: int) -> Dict[int, Graph]:
    total = complete_edge_count(n)
    return {mask: Graph.from_edge_indices(n, list(iter_bits(mask))) for mask in range(1 << total)}


def increasing_table(graphs: Dict[int, Graph], predicate: GraphPredicate, label: str, total: int) -> Dict[int, bool]:
    """Predicate value per edge mask; raises ParameterError unless adding an edge never breaks it."""
    table = {mask: bool(predicate(G)) for mask, G in graphs.items()}
    for mask, value in table.items():
        if not value:
            continue
        for e in range(total):
            if not table[mask | (1 << e)]:
                raise ParameterError(f"predicate {label} is not increasing: adding edge {e} breaks it")
    return table


def check_fkg_exact(
    n: int,
    p: Union[Fraction, str, int, float],
    f: GraphPredicate,
    g: GraphPredicate,
    f_name: str = "f",
    g_name: str = "g",
) -> FKGReport:
    """
    Exact E[fg], E[f] and E[g] over G(n,p), summing all 2^M graphs.

    Args:
        n: Number of vertices, at most 4
        p: Edge probability; converted to an exact rational
        f: Increasing graph predicate
        g: Increasing graph predicate

    Raises:
        ParameterError: If p lies outside [0, 1] or a predicate is not increasing
        CapacityError: If n exceeds 4
    """
    if n > MAX_FKG_VERTICES:
        raise CapacityError(f"exact FKG sums are capped at n={MAX_FKG_VERTICES}, got {n}")
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise ParameterError(f"edge probability {p} outside [0, 1]")
    total = complete_edge_count(n)
    graphs = graphs_by_mask(n)
    f_table = increasing_table(graphs, f, f_name, total)
    g_table = increasing_table(graphs, g, g_name, total)
    e_fg = e_f = e_g = Fraction(0)
    for mask in graphs:
        size = mask.bit_count()
        weight = p ** size * (1 - p) ** (total - size)
        e_f += weight * f_table[mask]
        e_g += weight * g_table[mask]
        e_fg += weight * (f_table[mask] and g_table[mask])
    return FKGReport(
        n=n,
        p=fraction_text(p),
        f=f_name,
        g=g_name,
        e_fg=fraction_text(e_fg),
        e_f=fraction_text(e_f),
        e_g=fraction_text(e_g),
        holds=e_fg >= e_f * e_g,
    )


FKG_PAIRS: List[Tuple[str, str]] = [
    ("nonempty", "nonempty"),
    ("triangle", "min_degree_1"),
    ("connected", "two_edges"),
    ("perfect_matching", "connected"),
    ("path_p3", "matching_2"),
    ("star_k13", "triangle"),
    ("cycle_c4", "min_degree_1"),
    ("clique_k4", "connected"),
    ("matching_2", "two_edges"),
    ("triangle", "path_p3"),
]


def fkg_catalogue(n: int, p: Union[Fraction, str]) -> List[FKGReport]:
    """Exact FKG check for every catalogued pair of increasing named properties."""
    return [
        check_fkg_exact(n, p, GRAPH_PROPERTIES[f], GRAPH_PROPERTIES[g], f, g)
        for f, g in FKG_PAIRS
    ]

