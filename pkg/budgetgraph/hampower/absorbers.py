"""
(j, ell, k)-absorbers.

An absorber is the union of the k-th powers of a spine path P on
s = j(2*ell+4)+ell vertices and of an augmented path Q, which visits V(P)
plus one absorption vertex v and shares its first k and last k vertices with
P. Inside the k-th power of a cycle that runs along P, replacing P by Q puts
v on the cycle without disturbing anything else.

The gadget built here inserts v in the middle of the spine. Its correctness
rests on the checked invariants, not on the construction.
"""
from __future__ import annotations

import functools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Optional, Sequence, Tuple

from budgetgraph.checkers import verify_ham_power
from budgetgraph.errors import ConstructionError, ParameterError
from budgetgraph.graph import Edge, Graph, normalize_edge, power_of_cycle_edges, power_of_path_edges
from budgetgraph.patterns import max_one_density_flow

logger = logging.getLogger(__name__)


def spine_length(j: int, ell: int) -> int:
    """s = j(2*ell+4) + ell."""
    return j * (2 * ell + 4) + ell


@dataclass(frozen=True)
class Absorber:
    k: int
    j: int
    ell: int
    spine: Tuple[int, ...]
    absorption_vertex: int
    augmented: Tuple[int, ...]
    edges: FrozenSet[Edge]

    @property
    def s(self) -> int:
        return len(self.spine)

    @property
    def vertices(self) -> Tuple[int, ...]:
        return self.spine + (self.absorption_vertex,)

    @property
    def initial_endsequence(self) -> Tuple[int, ...]:
        return self.spine[: self.k]

    @property
    def final_endsequence(self) -> Tuple[int, ...]:
        return self.spine[-self.k:]

    def graph(self) -> Graph:
        """The gadget as a pattern: spine vertex i is i, the absorption vertex is s."""
        position = {v: i for i, v in enumerate(self.vertices)}
        return Graph(len(position), ((position[u], position[v]) for u, v in self.edges))

    def embed(self, phi: Sequence[int]) -> "Absorber":
        """
        Image of this absorber under ``phi``.

        Args:
            phi: Host image of every pattern vertex of :meth:`graph`
        """
        position = {v: i for i, v in enumerate(self.vertices)}
        image: Dict[int, int] = {v: phi[i] for v, i in position.items()}
        return Absorber(
            k=self.k,
            j=self.j,
            ell=self.ell,
            spine=tuple(image[v] for v in self.spine),
            absorption_vertex=image[self.absorption_vertex],
            augmented=tuple(image[v] for v in self.augmented),
            edges=frozenset(normalize_edge(image[u], image[v]) for u, v in self.edges),
        )


def validate_absorber(absorber: Absorber) -> None:
    """
    Check every absorber invariant, including a mechanical swap on a synthetic cycle.

    Raises:
        ConstructionError: On the first violated invariant
    """
    k, P, Q, v = absorber.k, absorber.spine, absorber.augmented, absorber.absorption_vertex
    if len(P) != spine_length(absorber.j, absorber.ell):
        raise ConstructionError(f"spine has {len(P)} vertices, expected {spine_length(absorber.j, absorber.ell)}")
    if v in P or len(set(P)) != len(P):
        raise ConstructionError("absorption vertex on the spine or repeated spine vertex")
    if len(Q) != len(P) + 1 or set(Q) != set(P) | {v}:
        raise ConstructionError("augmented path must visit the spine plus the absorption vertex")
    if P[:k] != Q[:k] or P[-k:] != Q[-k:]:
        raise ConstructionError("spine and augmented path must share both endsequences")
    if absorber.edges != frozenset(power_of_path_edges(P, k) | power_of_path_edges(Q, k)):
        raise ConstructionError("edge set is not P^k united with Q^k")
    # swap check: P followed by 2k+1 filler vertices forms a cycle whose k-th
    # power, together with the gadget, must also host Q followed by the fillers
    position = {u: i for i, u in enumerate(absorber.vertices)}
    size = len(position)
    fillers = list(range(size, size + 2 * k + 1))
    cycle_p = [position[u] for u in P] + fillers
    cycle_q = [position[u] for u in Q] + fillers
    local_edges = {normalize_edge(position[a], position[b]) for a, b in absorber.edges}
    host = Graph(size + len(fillers), power_of_cycle_edges(cycle_p, k) | local_edges)
    if not verify_ham_power(host, cycle_q, k):
        raise ConstructionError("swapping the spine for the augmented path breaks the power of the cycle")


@functools.lru_cache(maxsize=32)
def build_absorber_template(j: int, ell: int, k: int) -> Absorber:
    """
    Concrete (j, ell, k)-absorber on vertices 0..s.

    The spine is 0..s-1 and the absorption vertex s is inserted after spine
    position s//2.

    Raises:
        ParameterError: Unless j >= 3, ell >= 2k and k >= 2
        ConstructionError: If the gadget fails its invariants
    """
    if j < 3 or k < 2 or ell < 2 * k:
        raise ParameterError(f"absorbers need j >= 3, k >= 2 and ell >= 2k; got j={j}, ell={ell}, k={k}")
    s = spine_length(j, ell)
    spine = tuple(range(s))
    middle = s // 2
    augmented = spine[:middle] + (s,) + spine[middle:]
    absorber = Absorber(
        k=k,
        j=j,
        ell=ell,
        spine=spine,
        absorption_vertex=s,
        augmented=augmented,
        edges=frozenset(power_of_path_edges(spine, k) | power_of_path_edges(augmented, k)),
    )
    validate_absorber(absorber)
    return absorber


@functools.lru_cache(maxsize=32)
def absorber_max_density(j: int, ell: int, k: int) -> Fraction:
    """Exact d* of the template gadget."""
    return max_one_density_flow(build_absorber_template(j, ell, k).graph())


def smallest_admissible_ell(j: int, k: int, delta: Fraction, max_ell: int = 64) -> Optional[int]:
    """Smallest ell >= 2k whose gadget has d* <= k + delta, or None up to ``max_ell``."""
    for ell in range(2 * k, max_ell + 1):
        if absorber_max_density(j, ell, k) <= k + delta:
            return ell
    return None


def absorb(cycle_order: Sequence[int], absorbers: Sequence[Absorber], leftover: Sequence[int]) -> list:
    """
    Put every leftover vertex on the cycle by swapping its absorber's spine.

    Args:
        cycle_order: Cyclic vertex order containing every listed spine contiguously
        absorbers: Embedded absorbers, vertex-disjoint
        leftover: Absorption vertices missing from the cycle

    Returns:
        The new cyclic order, longer by ``len(leftover)``

    Raises:
        ConstructionError: If a leftover vertex has no absorber or a spine is
            not contiguous and in order in ``cycle_order``
    """
    by_vertex = {a.absorption_vertex: a for a in absorbers}
    order = list(cycle_order)
    for v in leftover:
        absorber = by_vertex.get(v)
        if absorber is None:
            raise ConstructionError(f"vertex {v} is not the absorption vertex of any absorber")
        size = len(order)
        start = order.index(absorber.spine[0]) if absorber.spine[0] in order else -1
        if start < 0 or any(order[(start + i) % size] != u for i, u in enumerate(absorber.spine)):
            raise ConstructionError(f"spine of the absorber for vertex {v} is not contiguous in the cycle")
        # rotate so the spine starts the list, then splice in the augmented path
        rotated = order[start:] + order[:start]
        order = list(absorber.augmented) + rotated[absorber.s:]
    return order
