"""
Densities and balancedness of fixed pattern graphs F.

All densities are exact ``Fraction`` values so strict comparisons in the
balancedness tests never depend on rounding.
"""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence

import networkx as nx

from budgetgraph.errors import CapacityError, ParameterError
from budgetgraph.graph import Graph, iter_bits, power_of_path_edges

logger = logging.getLogger(__name__)

# 2^12 vertex subsets per query
MAX_PATTERN_VERTICES = 12


def _require_pattern(F: Graph) -> None:
    if F.n < 2:
        raise ParameterError(f"pattern needs at least 2 vertices, got {F.n}")


def _subset_edge_counts(F: Graph) -> List[int]:
    """Edge count of F[S] for every vertex subset S, indexed by bitmask."""
    if F.n > MAX_PATTERN_VERTICES:
        raise CapacityError(
            f"pattern has {F.n} vertices; exhaustive enumeration is capped at {MAX_PATTERN_VERTICES}"
        )
    counts = [0] * (1 << F.n)
    for mask in range(1, 1 << F.n):
        low = (mask & -mask).bit_length() - 1
        rest = mask ^ (1 << low)
        counts[mask] = counts[rest] + (F.adjacency[low] & rest).bit_count()
    return counts


def one_density(F: Graph) -> Fraction:
    """d(F) = e(F) / (v(F) - 1)."""
    _require_pattern(F)
    return Fraction(F.edge_count, F.n - 1)


def max_one_density(F: Graph) -> Fraction:
    """
    d*(F), the largest 1-density over subgraphs with at least 2 vertices.

    Only induced subgraphs are enumerated: for a fixed vertex set the induced
    subgraph has the most edges.

    Raises:
        ParameterError: If F has fewer than 2 vertices
        CapacityError: If F has more than MAX_PATTERN_VERTICES vertices
    """
    _require_pattern(F)
    counts = _subset_edge_counts(F)
    return max(
        Fraction(counts[mask], mask.bit_count() - 1)
        for mask in range(1 << F.n)
        if mask.bit_count() >= 2
    )


def is_strictly_one_balanced(F: Graph) -> bool:
    """True iff every proper subgraph on at least 2 vertices is strictly sparser than F."""
    _require_pattern(F)
    counts = _subset_edge_counts(F)
    density = one_density(F)
    full = (1 << F.n) - 1
    for mask in range(1 << F.n):
        size = mask.bit_count()
        # spanning proper subgraphs lose edges, hence density, automatically
        if size < 2 or mask == full:
            continue
        if Fraction(counts[mask], size - 1) >= density:
            return False
    return True


def is_vertex_balanced(F: Graph) -> bool:
    """True iff every vertex lies in some subgraph attaining d*(F)."""
    _require_pattern(F)
    counts = _subset_edge_counts(F)
    best = [Fraction(-1)] * F.n
    for mask in range(1 << F.n):
        size = mask.bit_count()
        if size < 2:
            continue
        d = Fraction(counts[mask], size - 1)
        for v in iter_bits(mask):
            if d > best[v]:
                best[v] = d
    top = max(best)
    return all(b == top for b in best)


def _densest_rooted(F: Graph, root: int, lam: Fraction) -> List[int]:
    """Vertex set S containing ``root`` maximising e(S) - lam*|S|, via one min cut."""
    scale = lam.denominator
    cost = lam.numerator
    network = nx.DiGraph()
    network.add_node("s")
    network.add_node("t")
    for u, v in F.edges():
        node = ("e", u, v)
        network.add_edge("s", node, capacity=scale)
        # edges without a capacity attribute are infinite
        network.add_edge(node, ("v", u))
        network.add_edge(node, ("v", v))
    for v in range(F.n):
        network.add_edge(("v", v), "t", capacity=cost)
    network.add_edge("s", ("v", root))
    _, (source_side, _) = nx.minimum_cut(network, "s", "t")
    return sorted(node[1] for node in source_side if isinstance(node, tuple) and node[0] == "v")


def _edges_within(F: Graph, vertices: Sequence[int]) -> int:
    mask = 0
    for v in vertices:
        mask |= 1 << v
    return sum((F.adjacency[v] & mask).bit_count() for v in vertices) // 2


def max_one_density_flow(F: Graph) -> Fraction:
    """
    d*(F) for patterns of any size.

    Dinkelbach iteration on lam: for each root vertex, a min cut finds the set
    S containing the root that maximises e(S) - lam*(|S| - 1). When that
    maximum is positive the density of S becomes the new lam; otherwise lam
    is optimal. Exact for every F and cross-checked against
    :func:`max_one_density` on small patterns.
    """
    _require_pattern(F)
    lam = one_density(F)
    iterations = 0
    while True:
        iterations += 1
        best_gain, best_set = Fraction(0), None
        for root in range(F.n):
            subset = _densest_rooted(F, root, lam)
            gain = _edges_within(F, subset) - lam * (len(subset) - 1)
            if gain > best_gain:
                best_gain, best_set = gain, subset
        if best_set is None:
            logger.debug("max_one_density_flow converged after %d rounds: %s", iterations, lam)
            return lam
        lam = Fraction(_edges_within(F, best_set), len(best_set) - 1)


def path_power(q: int, k: int) -> Graph:
    """P_q^k: the k-th power of the path on q vertices."""
    if q < 2 or k < 1:
        raise ParameterError(f"P_q^k needs q >= 2 and k >= 1, got q={q}, k={k}")
    return Graph(q, power_of_path_edges(list(range(q)), k))


def path_power_one_density(q: int, k: int) -> Fraction:
    """Closed form of d(P_q^k) = (kq - k(k+1)/2) / (q - 1) for k < q."""
    if not 1 <= k < q:
        raise ParameterError(f"closed form needs 1 <= k < q, got q={q}, k={k}")
    return Fraction(k * q - k * (k + 1) // 2, q - 1)


def f_equipartition(vertices: Sequence[int], parts: int, block: int) -> List[List[int]]:
    """
    Split ``vertices`` into ``parts`` consecutive intervals of block-divisible size.

    Sizes take at most two values differing by exactly ``block`` and are sorted
    in descending order.

    Args:
        vertices: Ordered vertices to split
        parts: Number of parts
        block: v(F); every part size is a multiple of it

    Returns:
        List of parts, each an ordered list of vertices

    Raises:
        ParameterError: If the divisibility or size constraints cannot be met
    """
    total = len(vertices)
    if parts < 1 or block < 1:
        raise ParameterError(f"parts and block must be positive, got parts={parts}, block={block}")
    if total % block:
        raise ParameterError(f"{total} vertices are not divisible into blocks of {block}")
    blocks = total // block
    if blocks < parts:
        raise ParameterError(f"{blocks} blocks of {block} cannot fill {parts} non-empty parts")
    base, extra = divmod(blocks, parts)
    sizes = [(base + 1) * block] * extra + [base * block] * (parts - extra)
    out, start = [], 0
    for size in sizes:
        out.append(list(vertices[start:start + size]))
        start += size
    return out


@dataclass(frozen=True)
class PatternStats:
    """A pattern F with its exact densities and balancedness flags."""

    name: str
    pattern: Graph
    one_density: Fraction
    max_one_density: Fraction
    strictly_one_balanced: bool
    vertex_balanced: bool

    @property
    def order(self) -> int:
        return self.pattern.n

    @property
    def size(self) -> int:
        return self.pattern.edge_count


def pattern_stats(F: Graph, name: Optional[str] = None) -> PatternStats:
    """Classify a pattern of at most MAX_PATTERN_VERTICES vertices."""
    return PatternStats(
        name=name or f"F(v={F.n},e={F.edge_count})",
        pattern=F,
        one_density=one_density(F),
        max_one_density=max_one_density(F),
        strictly_one_balanced=is_strictly_one_balanced(F),
        vertex_balanced=is_vertex_balanced(F),
    )


def parse_pattern(spec: str) -> Graph:
    """
    Resolve a pattern name or edge-list path.

    Accepted names are ``K2`` .. ``K5`` and ``Pq^k:q=<q>,k=<k>``; anything else
    is read as an edge-list file.

    Raises:
        ParameterError: On an unknown name, malformed arguments or a missing file
    """
    text = spec.strip()
    if text in ("K2", "K3", "K4", "K5"):
        return Graph.complete(int(text[1]))
    if text.startswith("Pq^k:"):
        try:
            args = dict(item.split("=", 1) for item in text[len("Pq^k:"):].split(","))
            return path_power(int(args["q"]), int(args["k"]))
        except (KeyError, ValueError) as e:
            raise ParameterError(f"malformed power-of-path pattern '{spec}': {e}") from e
    if not os.path.isfile(text):
        raise ParameterError(f"unknown pattern '{spec}' (not a built-in name nor an edge-list file)")
    with open(text, "r", encoding="utf-8") as f:
        return Graph.from_edge_list_text(f.read())
