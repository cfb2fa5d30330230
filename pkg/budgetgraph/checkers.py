"""
Exact verification of target structures in a graph.

Pattern copies are found by backtracking embedding over neighbor bitsets;
factors by exact cover over the enumerated copies, always branching on the
uncovered vertex with the fewest live copies.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from budgetgraph.errors import CapacityError, ParameterError
from budgetgraph.graph import Graph, RandomSource, as_generator, bits_of, iter_bits
from budgetgraph.patterns import MAX_PATTERN_VERTICES

logger = logging.getLogger(__name__)

Embedding = Tuple[int, ...]

DEFAULT_SEARCH_BUDGET = 1_000_000


class SearchBudget:
    """Node counter shared by one search; raises CapacityError when spent."""

    __slots__ = ("limit", "used")

    def __init__(self, limit: int = DEFAULT_SEARCH_BUDGET):
        self.limit = limit
        self.used = 0

    def tick(self, amount: int = 1) -> None:
        self.used += amount
        if self.used > self.limit:
            raise CapacityError(f"search budget of {self.limit} nodes exhausted")


@dataclass
class FactorWitness:
    """Vertex-disjoint copies; ``copies[c][i]`` is the image of pattern vertex i."""

    copies: List[Embedding] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.copies)

    def covered(self) -> List[int]:
        return sorted(v for copy in self.copies for v in copy)

    def is_valid(self, G: Graph, F: Graph) -> bool:
        seen = set()
        for copy in self.copies:
            if len(copy) != F.n or seen.intersection(copy) or len(set(copy)) != F.n:
                return False
            seen.update(copy)
            if any(not G.has_edge(copy[a], copy[b]) for a, b in F.edges()):
                return False
        return True

    def to_json(self) -> List[List[int]]:
        return [list(copy) for copy in self.copies]


class PatternEmbedder:
    """
    Enumerates injective homomorphisms of a pattern F into host graphs.

    Pattern vertices are visited in BFS order from a start vertex so every
    vertex after the first of its component has an already-placed neighbor;
    candidates are the intersection of those neighbors' host bitsets.
    """

    def __init__(self, F: Graph):
        self.F = F
        self._orders: Dict[int, Tuple[List[int], List[List[int]]]] = {}
        self._automorphisms: Optional[int] = None

    def _order_from(self, start: int) -> Tuple[List[int], List[List[int]]]:
        cached = self._orders.get(start)
        if cached is not None:
            return cached
        F = self.F
        order: List[int] = []
        placed = 0
        seeds = [start] + sorted(range(F.n), key=lambda v: (-F.degree(v), v))
        for seed in seeds:
            if placed >> seed & 1:
                continue
            queue = [seed]
            placed |= 1 << seed
            while queue:
                v = queue.pop(0)
                order.append(v)
                for w in iter_bits(F.adjacency[v] & ~placed):
                    placed |= 1 << w
                    queue.append(w)
        position = {v: i for i, v in enumerate(order)}
        back = [[position[w] for w in iter_bits(F.adjacency[v]) if position[w] < i] for i, v in enumerate(order)]
        self._orders[start] = (order, back)
        return order, back

    def embeddings(
        self,
        G: Graph,
        pool: Optional[int] = None,
        anchor: Optional[Tuple[int, int]] = None,
        budget: Optional[SearchBudget] = None,
        rng: Optional[np.random.Generator] = None,
    ) -> Iterator[Embedding]:
        """
        Yield embeddings as tuples indexed by pattern vertex.

        Args:
            G: Host graph
            pool: Bitset of host vertices usable as images; all when None
            anchor: ``(f, g)`` forcing pattern vertex f onto host vertex g
            budget: Optional node budget
            rng: When given, candidates are tried in random instead of
                ascending order

        Yields:
            Tuples ``phi`` with ``phi[f]`` the host image of pattern vertex f
        """
        F = self.F
        if pool is None:
            pool = (1 << G.n) - 1
        start = anchor[0] if anchor is not None else max(range(F.n), key=lambda v: (F.degree(v), -v))
        order, back = self._order_from(start)
        images = [0] * F.n
        adjacency = G.adjacency

        def extend(i: int, used: int) -> Iterator[Embedding]:
            if i == F.n:
                phi = [0] * F.n
                for position, v in enumerate(order):
                    phi[v] = images[position]
                yield tuple(phi)
                return
            if i == 0 and anchor is not None:
                candidates = (1 << anchor[1]) & pool
            else:
                candidates = pool & ~used
                for j in back[i]:
                    candidates &= adjacency[images[j]]
            choices = list(iter_bits(candidates))
            if rng is not None:
                rng.shuffle(choices)
            for g in choices:
                if budget is not None:
                    budget.tick()
                images[i] = g
                yield from extend(i + 1, used | (1 << g))

        yield from extend(0, 0)

    def automorphisms(self) -> int:
        if self._automorphisms is None:
            self._automorphisms = sum(1 for _ in self.embeddings(self.F))
        return self._automorphisms

    def copies(
        self, G: Graph, pool: Optional[int] = None, budget: Optional[SearchBudget] = None
    ) -> List[Tuple[int, Embedding]]:
        """Distinct vertex sets hosting F, as ``(mask, representative embedding)``."""
        found: Dict[int, Embedding] = {}
        for phi in self.embeddings(G, pool=pool, budget=budget):
            mask = bits_of(phi)
            if mask not in found:
                found[mask] = phi
        return sorted(found.items())


def _require_small(F: Graph) -> None:
    if F.n > MAX_PATTERN_VERTICES:
        raise CapacityError(f"pattern has {F.n} vertices; copy enumeration is capped at {MAX_PATTERN_VERTICES}")


def contains_pattern(G: Graph, F: Graph) -> bool:
    return next(PatternEmbedder(F).embeddings(G), None) is not None


def count_copies_at(G: Graph, F: Graph, v: int, embedder: Optional[PatternEmbedder] = None) -> int:
    """
    Number of (unlabelled) copies of F in G that contain vertex v.

    Every labelled embedding through v sends exactly one pattern vertex to v,
    so anchoring each pattern vertex at v in turn counts them once; dividing
    by |Aut(F)| turns labelled embeddings into copies.
    """
    _require_small(F)
    embedder = embedder or PatternEmbedder(F)
    labelled = sum(
        sum(1 for _ in embedder.embeddings(G, anchor=(f, v))) for f in range(F.n)
    )
    return labelled // embedder.automorphisms()


def count_copies(G: Graph, F: Graph) -> int:
    """Total number of copies of F in G."""
    _require_small(F)
    embedder = PatternEmbedder(F)
    return sum(1 for _ in embedder.embeddings(G)) // embedder.automorphisms()


def connected_components(G: Graph) -> List[int]:
    """Components as vertex bitsets, ordered by their lowest vertex."""
    remaining = (1 << G.n) - 1
    components = []
    while remaining:
        low = remaining & -remaining
        component, frontier = low, low
        while frontier:
            reach = 0
            for v in iter_bits(frontier):
                reach |= G.adjacency[v]
            frontier = reach & ~component
            component |= frontier
        components.append(component)
        remaining &= ~component
    return components


def min_degree(G: Graph) -> int:
    return min(G.degrees(), default=0)


def is_connected(G: Graph) -> bool:
    return len(connected_components(G)) <= 1


def is_acyclic(G: Graph) -> bool:
    return G.edge_count == G.n - len(connected_components(G))


class _ExactCover:
    """Exact cover of a vertex set by copies, with incrementally maintained live counts."""

    def __init__(self, masks: Sequence[int], vertices: Sequence[int], budget: SearchBudget):
        self.members = [list(iter_bits(mask)) for mask in masks]
        self.incidence: Dict[int, List[int]] = {v: [] for v in vertices}
        for c, members in enumerate(self.members):
            for v in members:
                self.incidence[v].append(c)
        self.live = bytearray([1]) * len(masks)
        self.count = {v: len(copies) for v, copies in self.incidence.items()}
        self.uncovered = set(vertices)
        self.budget = budget

    def _take(self, c: int) -> List[int]:
        killed = []
        for w in self.members[c]:
            for d in self.incidence[w]:
                if self.live[d]:
                    self.live[d] = 0
                    killed.append(d)
                    for x in self.members[d]:
                        self.count[x] -= 1
            self.uncovered.discard(w)
        return killed

    def _untake(self, c: int, killed: List[int]) -> None:
        for d in reversed(killed):
            self.live[d] = 1
            for x in self.members[d]:
                self.count[x] += 1
        self.uncovered.update(self.members[c])

    def solve(self) -> Optional[List[int]]:
        if not self.uncovered:
            return []
        v = min(self.uncovered, key=lambda u: (self.count[u], u))
        if self.count[v] == 0:
            return None
        for c in [d for d in self.incidence[v] if self.live[d]]:
            self.budget.tick()
            killed = self._take(c)
            rest = self.solve()
            if rest is not None:
                return [c] + rest
            self._untake(c, killed)
        return None


def exact_search_cap(F: Graph) -> int:
    """Largest host order accepted by has_f_factor for this pattern."""
    return 600 if F.n <= 3 else 200


def has_f_factor(
    G: Graph, F: Graph, budget: Optional[SearchBudget] = None, cap: Optional[int] = None
) -> Optional[FactorWitness]:
    """
    Find an F-factor of G or prove there is none.

    Args:
        G: Host graph
        F: Pattern, at most MAX_PATTERN_VERTICES vertices
        budget: Node budget shared by all components
        cap: Largest accepted host order; see exact_search_cap

    Returns:
        A witness covering every vertex, or None when no F-factor exists

    Raises:
        ParameterError: If v(F) does not divide n
        CapacityError: If the host is over the cap or the budget runs out
    """
    _require_small(F)
    if G.n % F.n:
        raise ParameterError(f"v(F)={F.n} does not divide n={G.n}")
    cap = exact_search_cap(F) if cap is None else cap
    if G.n > cap:
        raise CapacityError(f"n={G.n} exceeds the exact factor search cap of {cap}")
    budget = budget or SearchBudget()
    embedder = PatternEmbedder(F)
    # a connected pattern never straddles components
    parts = connected_components(G) if is_connected(F) else [(1 << G.n) - 1]
    witness = FactorWitness()
    for part in parts:
        if part.bit_count() % F.n:
            return None
        copies = embedder.copies(G, pool=part, budget=budget)
        cover = _ExactCover([mask for mask, _ in copies], list(iter_bits(part)), budget).solve()
        if cover is None:
            return None
        witness.copies.extend(copies[c][1] for c in cover)
    return witness


def _greedy_packing(copies: List[Tuple[int, Embedding]]) -> List[int]:
    incidence: Dict[int, int] = {}
    for mask, _ in copies:
        for v in iter_bits(mask):
            incidence[v] = incidence.get(v, 0) + 1
    ranked = sorted(range(len(copies)), key=lambda c: (sum(incidence[v] for v in iter_bits(copies[c][0])), c))
    used, chosen = 0, []
    for c in ranked:
        if copies[c][0] & used == 0:
            chosen.append(c)
            used |= copies[c][0]
    return chosen


def _exact_packing(
    masks: List[int], block: int, floor: List[int], budget: SearchBudget, target: Optional[int] = None
) -> List[int]:
    """
    Branch and bound for a maximum set of pairwise disjoint masks.

    With ``target`` the search returns the first packing of that size
    instead of proving a maximum.
    """
    best = list(floor)

    def reached() -> bool:
        return target is not None and len(best) >= target

    def bound(available: List[int], used: int) -> int:
        live = 0
        for c in available:
            live |= masks[c]
        return min((live & ~used).bit_count() // block, len(available))

    def branch(available: List[int], used: int, chosen: List[int]) -> None:
        nonlocal best
        budget.tick()
        if len(chosen) > len(best):
            best = list(chosen)
        if reached() or not available or len(chosen) + bound(available, used) <= len(best):
            return
        counts: Dict[int, int] = {}
        for c in available:
            for v in iter_bits(masks[c]):
                counts[v] = counts.get(v, 0) + 1
        v = min(counts, key=lambda u: (counts[u], u))
        # either some copy covers v, or v stays uncovered
        for c in [d for d in available if masks[d] >> v & 1]:
            branch([d for d in available if masks[d] & masks[c] == 0], used | masks[c], chosen + [c])
            if reached():
                return
        branch([d for d in available if not masks[d] >> v & 1], used | (1 << v), chosen)

    if not reached():
        branch(list(range(len(masks))), 0, [])
    return best


def max_disjoint_copies(
    G: Graph, F: Graph, target: int, budget: Optional[SearchBudget] = None
) -> Tuple[int, FactorWitness]:
    """
    Vertex-disjoint copies of F, stopping as soon as ``target`` are found.

    A greedy packing that already reaches ``target`` is returned as is.
    Otherwise components are improved one at a time by branch and bound,
    each asked only for the copies still missing on top of the greedy
    packing of the others; the result is the exact maximum whenever it is
    below ``target``.

    Raises:
        CapacityError: If the exact search runs out of budget
    """
    _require_small(F)
    budget = budget or SearchBudget()
    embedder = PatternEmbedder(F)
    copies = embedder.copies(G, budget=budget)
    greedy = _greedy_packing(copies)
    if len(greedy) >= target or not copies:
        return len(greedy), FactorWitness([copies[c][1] for c in greedy])
    parts = connected_components(G) if is_connected(F) else [(1 << G.n) - 1]
    greedy_set = set(greedy)
    plans = []
    for part in parts:
        local = [c for c, (mask, _) in enumerate(copies) if mask & part]
        if local:
            plans.append((part, local, [i for i, c in enumerate(local) if c in greedy_set]))
    chosen: List[int] = []
    gained = 0
    for part, local, floor in plans:
        missing = target - len(greedy) - gained
        if missing <= 0 or len(floor) == part.bit_count() // F.n:
            best = floor
        else:
            best = _exact_packing([copies[c][0] for c in local], F.n, floor, budget, target=len(floor) + missing)
        gained += len(best) - len(floor)
        chosen.extend(local[i] for i in best)
    return len(chosen), FactorWitness([copies[c][1] for c in chosen])


def find_factor_by_embedding(
    G: Graph, F: Graph, vertices: Sequence[int], budget: Optional[SearchBudget] = None
) -> Optional[FactorWitness]:
    """
    F-factor of G[vertices] for patterns of any size.

    Copies are never enumerated up front: the lowest uncovered vertex must be
    covered by some copy, so the search embeds F with each pattern vertex in
    turn anchored there, inside the uncovered pool, and recurses.

    Raises:
        ParameterError: If v(F) does not divide the number of vertices
        CapacityError: If the budget runs out
    """
    if len(vertices) % F.n:
        raise ParameterError(f"v(F)={F.n} does not divide {len(vertices)}")
    budget = budget or SearchBudget()
    embedder = PatternEmbedder(F)
    # anchoring one vertex per automorphism orbit would suffice; all are tried
    anchors = list(range(F.n))

    def cover(pool: int) -> Optional[List[Embedding]]:
        if not pool:
            return []
        low = (pool & -pool).bit_length() - 1
        for f in anchors:
            for phi in embedder.embeddings(G, pool=pool, anchor=(f, low), budget=budget):
                rest = cover(pool & ~bits_of(phi))
                if rest is not None:
                    return [phi] + rest
        return None

    copies = cover(bits_of(vertices))
    return None if copies is None else FactorWitness(copies)


def pack_disjoint_copies(
    G: Graph,
    F: Graph,
    count: int,
    vertices: Sequence[int],
    rng: RandomSource = None,
    restarts: int = 8,
    search_budget: int = DEFAULT_SEARCH_BUDGET,
) -> Optional[FactorWitness]:
    """
    ``count`` vertex-disjoint copies of F inside ``vertices``, placed greedily.

    Each round embeds one copy at a time into the still unused vertices,
    trying candidates in random order, and a copy that cannot be placed
    within ``search_budget`` nodes ends the round. Rounds repeat with fresh
    randomness up to ``restarts`` times. When the copies must fill
    ``vertices`` exactly this may miss a factor that exists; a returned
    packing is always valid.

    Returns:
        The copies, or None when every round fell short

    Raises:
        ParameterError: If ``count`` copies cannot fit into ``vertices``
    """
    if count * F.n > len(vertices):
        raise ParameterError(f"{count} copies of a {F.n}-vertex pattern do not fit into {len(vertices)} vertices")
    generator = as_generator(rng)
    embedder = PatternEmbedder(F)
    pool = bits_of(vertices)
    for attempt in range(max(1, restarts)):
        free, copies = pool, []
        try:
            while len(copies) < count:
                phi = next(embedder.embeddings(G, pool=free, budget=SearchBudget(search_budget), rng=generator), None)
                if phi is None:
                    break
                copies.append(phi)
                free &= ~bits_of(phi)
        except CapacityError:
            pass
        if len(copies) == count:
            return FactorWitness(copies)
        logger.debug("packing round %d placed %d of %d copies", attempt, len(copies), count)
    return None


def is_path_power(G: Graph, path: Sequence[int], k: int) -> bool:
    """Whether G contains the k-th power of the path visiting ``path``."""
    for i, u in enumerate(path):
        for v in path[i + 1:i + k + 1]:
            if not G.has_edge(u, v):
                return False
    return True


def _common(G: Graph, vertices: Sequence[int], mask: int) -> int:
    for v in vertices:
        mask &= G.adjacency[v]
    return mask


class _PathPowerRound:
    """One randomized attempt at a spanning k-th power of a path."""

    def __init__(self, G: Graph, k: int, pool: int, rng: np.random.Generator, budget: SearchBudget):
        self.G, self.k, self.rng, self.budget = G, k, rng, budget
        start = list(iter_bits(pool))
        first = start[int(rng.integers(len(start)))]
        self.path = [first]
        self.free = pool & ~(1 << first)

    def _pick(self, candidates: int) -> int:
        """Candidate leaving the fewest, but some, onward options; ties broken at random."""
        tail = self.path[-(self.k - 1):] if self.k > 1 else []
        scored = []
        for x in iter_bits(candidates):
            onward = _common(self.G, tail, self.free & ~(1 << x) & self.G.adjacency[x]).bit_count()
            scored.append((onward == 0, onward, float(self.rng.random()), x))
        return min(scored)[3]

    def _extend(self) -> bool:
        while self.free:
            self.budget.tick()
            candidates = _common(self.G, self.path[-self.k:], self.free)
            if not candidates:
                return False
            x = self._pick(candidates)
            self.path.append(x)
            self.free &= ~(1 << x)
        return True

    def _rotations(self) -> List[int]:
        """Pivots i for which reversing path[i+1:] keeps a path power and opens a new end."""
        path, k, G = self.path, self.k, self.G
        m = len(path)
        pivots = []
        for i in range(m - 2):
            ok = True
            for a in range(k):
                if i - a < 0 or not ok:
                    break
                for b in range(k - a):
                    if m - 1 - b <= i:
                        break
                    if not G.has_edge(path[i - a], path[m - 1 - b]):
                        ok = False
                        break
            if not ok:
                continue
            # the last k vertices after the reversal
            end = [path[i + j] if m - j > i else path[m - j] for j in range(1, k + 1)]
            if _common(G, end, self.free):
                pivots.append(i)
        return pivots

    def _insert(self, x: int) -> bool:
        path, k, G = self.path, self.k, self.G
        slots = [g for g in range(len(path) + 1)
                 if all(G.has_edge(x, v) for v in path[max(0, g - k):g] + path[g:g + k])]
        if not slots:
            return False
        g = slots[int(self.rng.integers(len(slots)))]
        path.insert(g, x)
        self.free &= ~(1 << x)
        return True

    def run(self, max_rotations: int) -> Optional[List[int]]:
        reversed_once = False
        rotations = 0
        while not self._extend():
            if not reversed_once:
                self.path.reverse()
                reversed_once = True
                continue
            pivots = self._rotations() if rotations < max_rotations else []
            if not pivots:
                break
            i = pivots[int(self.rng.integers(len(pivots)))]
            self.path[i + 1:] = self.path[i + 1:][::-1]
            rotations += 1
        # whatever extension left over goes into slots inside the path
        progress = True
        while self.free and progress:
            progress = False
            for x in list(iter_bits(self.free)):
                self.budget.tick()
                progress = self._insert(x) or progress
        return None if self.free else self.path


def find_path_power_factor(
    G: Graph,
    k: int,
    q: int,
    vertices: Sequence[int],
    rng: RandomSource = None,
    restarts: int = 8,
    search_budget: int = DEFAULT_SEARCH_BUDGET,
) -> Optional[List[List[int]]]:
    """
    P_q^k-factor of G[vertices], as vertex orders of the paths.

    A spanning k-th power of a path is grown from a random vertex, always
    taking the candidate with the fewest onward options. When it stalls the
    path is turned around once, then rotated by reversing a suffix whose
    junction edges are present, and vertices still missing are finally
    inserted wherever their 2k path neighbors are adjacent to them. Cutting
    the result into consecutive blocks of q gives the factor.

    Raises:
        ParameterError: If q does not divide the number of vertices or k < 1
    """
    if k < 1 or q < 1 or len(vertices) % q:
        raise ParameterError(f"cannot split {len(vertices)} vertices into paths of {q} with power {k}")
    if not vertices:
        return []
    generator = as_generator(rng)
    pool = bits_of(vertices)
    for attempt in range(max(1, restarts)):
        round_ = _PathPowerRound(G, k, pool, generator, SearchBudget(search_budget))
        try:
            path = round_.run(max_rotations=2 * len(vertices))
        except CapacityError:
            path = None
        if path is not None:
            return [path[i:i + q] for i in range(0, len(path), q)]
        logger.debug("path power round %d left %d vertices out", attempt, round_.free.bit_count())
    return None


def verify_ham_power(G: Graph, order: Sequence[int], k: int) -> bool:
    """
    Whether G contains the k-th power of the Hamilton cycle visiting ``order``.

    Raises:
        ParameterError: If order is not a permutation of [n] or n <= 2k
    """
    n = G.n
    if sorted(order) != list(range(n)):
        raise ParameterError("order is not a permutation of the vertex set")
    if n <= 2 * k:
        raise ParameterError(f"the k-th power of a Hamilton cycle needs n > 2k, got n={n}, k={k}")
    for i, u in enumerate(order):
        for d in range(1, k + 1):
            if not G.has_edge(u, order[(i + d) % n]):
                return False
    return True


def _triangle() -> Graph:
    return Graph.complete(3)


# Named graph properties shared by the config checkers, the FKG catalogue and
# the exhaustive oracle. All are increasing except "acyclic".
GRAPH_PROPERTIES: Dict[str, Callable[[Graph], bool]] = {
    "nonempty": lambda G: G.edge_count >= 1,
    "two_edges": lambda G: G.edge_count >= 2,
    "triangle": lambda G: contains_pattern(G, _triangle()),
    "min_degree_1": lambda G: min_degree(G) >= 1,
    "connected": is_connected,
    "perfect_matching": lambda G: G.n % 2 == 0 and has_f_factor(G, Graph(2, [(0, 1)])) is not None,
    "path_p3": lambda G: max(G.degrees(), default=0) >= 2,
    "star_k13": lambda G: max(G.degrees(), default=0) >= 3,
    "matching_2": lambda G: contains_pattern(G, Graph(4, [(0, 1), (2, 3)])),
    "cycle_c4": lambda G: contains_pattern(G, Graph.cycle(4)),
    "clique_k4": lambda G: contains_pattern(G, Graph.complete(4)),
    "acyclic": is_acyclic,
}
