"""
Undirected simple graphs on the vertex set [n] = {0, ..., n-1}.

Adjacency is stored as one Python ``int`` bitset per vertex, so neighborhood
intersections are a single ``&`` and degrees a ``bit_count()``. Edges are
normalised to ``(u, v)`` with ``u < v`` and carry a canonical linear index
``v(v-1)/2 + u`` which the samplers draw from.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from budgetgraph.errors import ParameterError

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]
RandomSource = Union[np.random.Generator, int, None]

# Prefixes longer than this fraction of M are drawn by shuffling the whole
# index space instead of by rejection against the used set.
SPARSE_FRACTION = 0.25


def as_generator(rng: RandomSource) -> np.random.Generator:
    """Accept a Generator, an integer seed or None and return a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the positions of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def bits_of(vertices: Iterable[int]) -> int:
    mask = 0
    for v in vertices:
        mask |= 1 << v
    return mask


def complete_edge_count(n: int) -> int:
    """Return M = n(n-1)/2, the number of edges of K_n."""
    if n < 0:
        raise ParameterError(f"vertex count must be non-negative, got {n}")
    return n * (n - 1) // 2


def normalize_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


def edge_index(u: int, v: int) -> int:
    """Canonical linear index of the edge uv."""
    if u == v:
        raise ParameterError(f"loop at vertex {u}")
    u, v = normalize_edge(u, v)
    return v * (v - 1) // 2 + u


def edge_from_index(index: int) -> Edge:
    """Inverse of :func:`edge_index`."""
    v = (1 + math.isqrt(1 + 8 * index)) // 2
    return (index - v * (v - 1) // 2, v)


def edges_from_indices(indices: Sequence[int]) -> List[Edge]:
    """Vectorised :func:`edge_from_index` over a sequence of indices."""
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size == 0:
        return []
    v = ((1 + np.sqrt(1 + 8 * idx.astype(np.float64))) // 2).astype(np.int64)
    # float sqrt can land one off next to perfect squares
    v -= (v * (v - 1) // 2 > idx).astype(np.int64)
    v += ((v + 1) * v // 2 <= idx).astype(np.int64)
    u = idx - v * (v - 1) // 2
    return list(zip(u.tolist(), v.tolist()))


def power_of_path_edges(order: Sequence[int], k: int) -> Set[Edge]:
    """Edges of the k-th power of the path visiting ``order``."""
    edges = set()
    for i, u in enumerate(order):
        for d in range(1, k + 1):
            if i + d >= len(order):
                break
            edges.add(normalize_edge(u, order[i + d]))
    return edges


def power_of_cycle_edges(order: Sequence[int], k: int) -> Set[Edge]:
    """Edges of the k-th power of the cycle visiting ``order`` (len > 2k)."""
    size = len(order)
    edges = set()
    for i, u in enumerate(order):
        for d in range(1, k + 1):
            edges.add(normalize_edge(u, order[(i + d) % size]))
    return edges


def _checked_pair(n: int, u: int, v: int) -> Edge:
    if u == v:
        raise ParameterError(f"loop at vertex {u}")
    if not (0 <= u < n and 0 <= v < n):
        raise ParameterError(f"edge ({u},{v}) out of range for n={n}")
    return normalize_edge(u, v)


class Graph:
    """
    Immutable undirected simple graph on [n].

    Attributes:
        n: Number of vertices
        adjacency: Tuple of per-vertex neighbor bitsets
        edge_count: Number of edges
    """

    __slots__ = ("n", "adjacency", "edge_count")

    def __init__(self, n: int, edges: Iterable[Edge] = ()):
        if n < 0:
            raise ParameterError(f"vertex count must be non-negative, got {n}")
        adjacency = [0] * n
        count = 0
        for u, v in edges:
            u, v = _checked_pair(n, u, v)
            if adjacency[u] >> v & 1:
                continue
            adjacency[u] |= 1 << v
            adjacency[v] |= 1 << u
            count += 1
        self.n = n
        self.adjacency = tuple(adjacency)
        self.edge_count = count

    @classmethod
    def _from_adjacency(cls, n: int, adjacency: Sequence[int], edge_count: int) -> "Graph":
        graph = cls.__new__(cls)
        graph.n = n
        graph.adjacency = tuple(adjacency)
        graph.edge_count = edge_count
        return graph

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        full = (1 << n) - 1
        return cls._from_adjacency(n, [full ^ (1 << v) for v in range(n)], complete_edge_count(n))

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        return cls(n, ((i, (i + 1) % n) for i in range(n)))

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls(n, ((i, i + 1) for i in range(n - 1)))

    @classmethod
    def from_edge_indices(cls, n: int, indices: Sequence[int]) -> "Graph":
        return cls(n, edges_from_indices(indices))

    # queries

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adjacency[u] >> v & 1)

    def neighbor_mask(self, v: int) -> int:
        return self.adjacency[v]

    def neighbors(self, v: int) -> List[int]:
        return list(iter_bits(self.adjacency[v]))

    def degree(self, v: int) -> int:
        return self.adjacency[v].bit_count()

    def degrees(self) -> List[int]:
        return [mask.bit_count() for mask in self.adjacency]

    def edges(self) -> Iterator[Edge]:
        """Edges as ``(u, v)`` with ``u < v``, sorted lexicographically."""
        for u, mask in enumerate(self.adjacency):
            for v in iter_bits(mask >> (u + 1)):
                yield (u, u + 1 + v)

    def edge_set(self) -> frozenset:
        return frozenset(self.edges())

    def is_subgraph_of(self, other: "Graph") -> bool:
        if self.n != other.n:
            return False
        return all(mine & ~theirs == 0 for mine, theirs in zip(self.adjacency, other.adjacency))

    def union(self, other: "Graph") -> "Graph":
        if self.n != other.n:
            raise ParameterError("union of graphs on different vertex counts")
        adjacency = [a | b for a, b in zip(self.adjacency, other.adjacency)]
        count = sum(mask.bit_count() for mask in adjacency) // 2
        return Graph._from_adjacency(self.n, adjacency, count)

    def induced(self, vertices: Iterable[int]) -> "Graph":
        """Keep only edges with both ends in ``vertices``; labels are unchanged."""
        keep = bits_of(vertices)
        adjacency = [mask & keep if keep >> v & 1 else 0 for v, mask in enumerate(self.adjacency)]
        count = sum(mask.bit_count() for mask in adjacency) // 2
        return Graph._from_adjacency(self.n, adjacency, count)

    def relabel(self, vertices: Sequence[int]) -> "Graph":
        """The subgraph induced on ``vertices``, relabelled to 0..len-1 in that order."""
        position = {v: i for i, v in enumerate(vertices)}
        edges = []
        for i, v in enumerate(vertices):
            for w in iter_bits(self.adjacency[v]):
                j = position.get(w)
                if j is not None and i < j:
                    edges.append((i, j))
        return Graph(len(vertices), edges)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.adjacency == other.adjacency

    def __hash__(self) -> int:
        return hash((self.n, self.adjacency))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.edge_count})"

    def __getstate__(self):
        return (self.n, self.adjacency, self.edge_count)

    def __setstate__(self, state):
        self.n, self.adjacency, self.edge_count = state

    # edge-list text format

    def to_edge_list_text(self) -> str:
        lines = [f"{self.n} {self.edge_count}"]
        lines.extend(f"{u} {v}" for u, v in self.edges())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_edge_list_text(cls, text: str) -> "Graph":
        """
        Parse the edge-list format: a header line ``n m`` then m lines ``u v``.

        Args:
            text: File contents

        Returns:
            The parsed graph

        Raises:
            ParameterError: If the header or any edge line is malformed
        """
        rows = [line.split() for line in text.splitlines() if line.strip() and not line.startswith("#")]
        if not rows or len(rows[0]) != 2:
            raise ParameterError("edge list must start with a 'n m' header line")
        try:
            n, m = int(rows[0][0]), int(rows[0][1])
            edges = [(int(u), int(v)) for u, v in rows[1:]]
        except ValueError as e:
            raise ParameterError(f"malformed edge list: {e}") from e
        if len(edges) != m:
            raise ParameterError(f"header announces {m} edges, found {len(edges)}")
        graph = cls(n, edges)
        if graph.edge_count != m:
            raise ParameterError("edge list contains duplicate edges")
        return graph


class GraphBuilder:
    """Mutable graph used while a process is running; freeze() to share it."""

    __slots__ = ("n", "adjacency", "edge_count")

    def __init__(self, n: int):
        self.n = n
        self.adjacency = [0] * n
        self.edge_count = 0

    def add_edge(self, u: int, v: int) -> bool:
        if self.adjacency[u] >> v & 1:
            return False
        self.adjacency[u] |= 1 << v
        self.adjacency[v] |= 1 << u
        self.edge_count += 1
        return True

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adjacency[u] >> v & 1)

    def neighbor_mask(self, v: int) -> int:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return self.adjacency[v].bit_count()

    def freeze(self) -> Graph:
        return Graph._from_adjacency(self.n, self.adjacency, self.edge_count)


@dataclass(frozen=True)
class EdgeSequence:
    """An ordered list of distinct edges of K_n, e.g. a process prefix."""

    n: int
    edges: Tuple[Edge, ...]

    def __post_init__(self):
        seen = set()
        for u, v in self.edges:
            edge = _checked_pair(self.n, u, v)
            if edge in seen:
                raise ParameterError(f"edge {edge} presented twice")
            seen.add(edge)

    def __len__(self) -> int:
        return len(self.edges)

    def prefix(self, length: int) -> "EdgeSequence":
        return EdgeSequence(self.n, self.edges[:length])

    def as_graph(self, length: Optional[int] = None) -> Graph:
        edges = self.edges if length is None else self.edges[:length]
        return Graph(self.n, edges)


def sample_edge_indices(total: int, t: int, rng: RandomSource) -> List[int]:
    """
    Draw an ordered t-tuple of distinct indices from range(total), uniformly.

    Sparse prefixes use rejection against the set of used indices, so the work
    is O(t) expected; dense prefixes shuffle the whole index space.
    """
    if not 0 <= t <= total:
        raise ParameterError(f"cannot draw {t} distinct edges out of {total}")
    rng = as_generator(rng)
    if t > SPARSE_FRACTION * total:
        return rng.permutation(total)[:t].tolist()
    seen: Set[int] = set()
    out: List[int] = []
    while len(out) < t:
        for x in rng.integers(0, total, size=max(16, 2 * (t - len(out)))).tolist():
            if x in seen:
                continue
            seen.add(x)
            out.append(x)
            if len(out) == t:
                break
    return out


def sample_process_prefix(n: int, t: int, rng: RandomSource) -> EdgeSequence:
    """The first t edges of the random graph process on [n]."""
    total = complete_edge_count(n)
    if t > total:
        raise ParameterError(f"t={t} exceeds M={total} for n={n}")
    indices = sample_edge_indices(total, t, rng)
    return EdgeSequence(n, tuple(edges_from_indices(indices)))


def sample_gnm(n: int, m: int, rng: RandomSource) -> Graph:
    """Uniform random graph with exactly m edges."""
    total = complete_edge_count(n)
    if not 0 <= m <= total:
        raise ParameterError(f"m={m} outside [0, {total}] for n={n}")
    return Graph.from_edge_indices(n, sample_edge_indices(total, m, rng))


def sample_gnp(n: int, p: float, rng: RandomSource) -> Graph:
    """Binomial random graph: every edge independently with probability p."""
    if not 0 <= p <= 1:
        raise ParameterError(f"edge probability {p} outside [0, 1]")
    rng = as_generator(rng)
    # conditioned on its size, G(n,p) is uniform over graphs of that size
    m = int(rng.binomial(complete_edge_count(n), p))
    return sample_gnm(n, m, rng)
