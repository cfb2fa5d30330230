"""
Endsequence pairs, (A,B)-linkages and the sparse-partition matching.

An (A,B)-linkage of length r is the k-th power of a path a_1..a_k x_1..x_r
b_1..b_k with the edges inside A and inside B removed.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Set, Tuple

import networkx as nx
from networkx.algorithms import bipartite

from budgetgraph.checkers import SearchBudget
from budgetgraph.errors import ParameterError
from budgetgraph.graph import Edge, Graph, RandomSource, as_generator, bits_of, iter_bits, normalize_edge, power_of_path_edges

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EndsequencePair:
    """Two disjoint ordered k-tuples; a linkage runs from A to B."""

    A: Tuple[int, ...]
    B: Tuple[int, ...]

    def __post_init__(self):
        if len(self.A) != len(self.B) or not self.A:
            raise ParameterError("endsequences must be non-empty and of equal length")
        if len(set(self.A) | set(self.B)) != 2 * len(self.A):
            raise ParameterError(f"endsequence pair {self.A}, {self.B} repeats a vertex")

    @property
    def k(self) -> int:
        return len(self.A)

    @property
    def vertices(self) -> Tuple[int, ...]:
        return self.A + self.B


def validate_family(family: Sequence[EndsequencePair], host: Optional[Set[int]] = None) -> None:
    """Pairs must be pairwise vertex-disjoint and, if given, inside ``host``."""
    seen: Set[int] = set()
    for pair in family:
        if seen.intersection(pair.vertices):
            raise ParameterError("endsequence pairs of a family must be disjoint")
        seen.update(pair.vertices)
    if host is not None and not seen <= host:
        raise ParameterError("endsequence family leaves the host set")


def linkage_edges(pair: EndsequencePair, internal: Sequence[int], k: int) -> Set[Edge]:
    inside = power_of_path_edges(pair.A, k) | power_of_path_edges(pair.B, k)
    return power_of_path_edges(list(pair.A) + list(internal) + list(pair.B), k) - inside


@dataclass(frozen=True)
class Linkage:
    pair: EndsequencePair
    internal: Tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.internal)

    @property
    def path(self) -> Tuple[int, ...]:
        return self.pair.A + self.internal + self.pair.B

    @property
    def edges(self) -> Set[Edge]:
        return linkage_edges(self.pair, self.internal, self.pair.k)


def _internal_sequences(
    G: Graph, pair: EndsequencePair, r: int, allowed: int, budget: SearchBudget
) -> Iterator[Tuple[int, ...]]:
    """All internal sequences (ascending DFS order) completing a linkage in G."""
    k = pair.k
    A, B = pair.A, pair.B
    adjacency = G.adjacency
    # direct A-B edges exist when r < k: a_i ~ b_j iff r + j <= i (1-based)
    for i in range(1, k + 1):
        for j in range(1, i - r + 1):
            if not G.has_edge(A[i - 1], B[j - 1]):
                return
    path = list(A)

    def extend(i: int, used: int) -> Iterator[Tuple[int, ...]]:
        if i > r:
            yield tuple(path[k:])
            return
        candidates = allowed & ~used
        for u in path[-k:]:
            candidates &= adjacency[u]
        # x_i reaches b_j when r + j - i <= k
        for j in range(1, min(k, k - r + i) + 1):
            candidates &= adjacency[B[j - 1]]
        for x in iter_bits(candidates):
            budget.tick()
            path.append(x)
            yield from extend(i + 1, used | (1 << x))
            path.pop()

    yield from extend(1, 0)


def find_linkage(
    G: Graph, pair: EndsequencePair, r: int, allowed: Sequence[int], budget: Optional[SearchBudget] = None
) -> Optional[Linkage]:
    """
    An (A,B)-linkage of length r in G with internal vertices from ``allowed``.

    Each new internal vertex must be adjacent to the k vertices before it and
    to every vertex of B within distance k, so B is checked as early as possible.

    Raises:
        ParameterError: If r < 0 or ``allowed`` meets A or B
        CapacityError: If the budget runs out
    """
    if r < 0:
        raise ParameterError(f"linkage length must be non-negative, got {r}")
    if set(allowed).intersection(pair.vertices):
        raise ParameterError("allowed vertices must avoid the endsequences")
    budget = budget or SearchBudget()
    internal = next(_internal_sequences(G, pair, r, bits_of(allowed), budget), None)
    return None if internal is None else Linkage(pair, internal)


def find_linkage_family(
    G: Graph,
    family: Sequence[EndsequencePair],
    r: int,
    allowed: Sequence[int],
    budget: Optional[SearchBudget] = None,
) -> Optional[List[Linkage]]:
    """
    Pairwise disjoint linkages, one per pair, all inside ``allowed``.

    Pairs are linked in order; when a later pair cannot be linked the search
    backtracks into the earlier pairs' alternatives.

    Raises:
        ParameterError: If 4*r*len(family) > len(allowed) or the family is not disjoint
        CapacityError: If the budget runs out
    """
    if 4 * r * len(family) > len(allowed):
        raise ParameterError(
            f"{len(family)} linkages of length {r} need at least {4 * r * len(family)} vertices, got {len(allowed)}"
        )
    validate_family(family)
    blocked = set(allowed).intersection(v for pair in family for v in pair.vertices)
    if blocked:
        raise ParameterError("allowed vertices must avoid the endsequences")
    budget = budget or SearchBudget()
    chosen: List[Linkage] = []

    def link(index: int, free: int) -> bool:
        if index == len(family):
            return True
        pair = family[index]
        for internal in _internal_sequences(G, pair, r, free, budget):
            chosen.append(Linkage(pair, internal))
            if link(index + 1, free & ~bits_of(internal)):
                return True
            chosen.pop()
        return False

    return list(chosen) if link(0, bits_of(allowed)) else None


def interval_partition(count: int, groups: int) -> List[List[int]]:
    """Equipartition of 0..count-1 into consecutive intervals, larger ones first."""
    if groups < 1:
        raise ParameterError(f"need at least one group, got {groups}")
    base, extra = divmod(count, groups)
    out, start = [], 0
    for a in range(groups):
        size = base + (1 if a < extra else 0)
        out.append(list(range(start, start + size)))
        start += size
    return out


def sparse_partition_match(
    G_prev: Graph, X_sets: Sequence[Sequence[int]], Y_sets: Sequence[Sequence[int]], threshold: int
) -> Optional[List[List[int]]]:
    """
    Equipartition of the X-indices over the Y-sets with small neighborhoods.

    Index i may go to group a only if |N(X_i) ∩ Y_a| <= threshold in G_prev.
    The canonical interval partition is returned when it already qualifies;
    otherwise each group gets as many slots as its interval had and a
    Hopcroft-Karp matching of X-indices into slots decides.

    Returns:
        ``J`` with ``J[a]`` the X-indices assigned to Y_a, or None if no
        valid equipartition exists
    """
    if len({len(Y) for Y in Y_sets}) > 1:
        raise ParameterError("Y sets must have equal sizes")
    if len(X_sets) < len(Y_sets):
        raise ParameterError(f"need at least as many X sets ({len(X_sets)}) as Y sets ({len(Y_sets)})")
    y_masks = [bits_of(Y) for Y in Y_sets]
    if sum(m.bit_count() for m in y_masks) != bits_of(v for Y in Y_sets for v in Y).bit_count():
        raise ParameterError("Y sets must be pairwise disjoint")
    neighborhoods = []
    for X in X_sets:
        mask = 0
        for x in X:
            mask |= G_prev.adjacency[x]
        neighborhoods.append(mask)

    def fits(i: int, a: int) -> bool:
        return (neighborhoods[i] & y_masks[a]).bit_count() <= threshold

    canonical = interval_partition(len(X_sets), len(Y_sets))
    if all(fits(i, a) for a, group in enumerate(canonical) for i in group):
        return canonical
    slots = [(a, i) for a, group in enumerate(canonical) for i in group]
    aux = nx.Graph()
    left = [("x", i) for i in range(len(X_sets))]
    aux.add_nodes_from(left, bipartite=0)
    aux.add_nodes_from((("slot",) + slot for slot in slots), bipartite=1)
    for i in range(len(X_sets)):
        for slot in slots:
            if fits(i, slot[0]):
                aux.add_edge(("x", i), ("slot",) + slot)
    matching = bipartite.hopcroft_karp_matching(aux, top_nodes=left)
    if any(node not in matching for node in left):
        logger.info("sparse partition: no perfect matching of %d sets into %d groups", len(X_sets), len(Y_sets))
        return None
    groups: List[List[int]] = [[] for _ in Y_sets]
    for i in range(len(X_sets)):
        groups[matching[("x", i)][1]].append(i)
    return groups


@dataclass(frozen=True)
class SparsenessEstimate:
    samples: int
    worst_ratio: float
    passed: bool


def estimate_sparseness(
    H: Graph,
    V: Sequence[int],
    R: Sequence[int],
    r: int,
    m: int,
    lam: float,
    rng: RandomSource,
    subsets: int = 50,
    draws: int = 200,
) -> SparsenessEstimate:
    """
    Sampling estimate of whether V is (R, r, m, lam)-sparse in H.

    Random subsets U of V with |U| >= m are drawn; in each, the share of random
    r-subsets S that are R-independent (no edge of H[S ∪ R] touches S) is
    scaled to a count and compared with lam * |U|^r. The worst ratio seen is
    reported. This is a diagnostic, not a proof.
    """
    if not 1 <= r <= m <= len(V):
        raise ParameterError(f"need 1 <= r <= m <= |V|, got r={r}, m={m}, |V|={len(V)}")
    rng = as_generator(rng)
    r_mask = bits_of(R)
    vertices = list(V)
    worst = math.inf
    for _ in range(subsets):
        size = int(rng.integers(m, len(vertices) + 1))
        U = rng.choice(vertices, size=size, replace=False).tolist()
        hits = 0
        for _ in range(draws):
            S = rng.choice(U, size=r, replace=False).tolist()
            s_mask = bits_of(S)
            if all(H.adjacency[x] & (s_mask | r_mask) == 0 for x in S):
                hits += 1
        estimate = hits / draws * math.comb(size, r)
        worst = min(worst, estimate / size ** r)
    return SparsenessEstimate(samples=subsets, worst_ratio=worst, passed=worst >= lam)


def pair_edges_inside(pair: EndsequencePair) -> Set[Edge]:
    """Edges with both ends in A or both in B; a linkage never contains them."""
    return {normalize_edge(u, v) for side in (pair.A, pair.B) for u in side for v in side if u < v}
