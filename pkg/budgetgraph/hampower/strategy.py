"""
The four-stage strategy for the k-th power of a Hamilton cycle.

Stage I    buys inside the pi parts of the absorber pool U1 and fixes
           absorbers A_1..A_eta.
Stage II   buys inside W_a plus the endsequences of group I_a, where the W_a
           split the vertices off the absorbers, and links the final
           endsequence of A_i to the initial one of A_{i+1}, giving one long
           path Q_0.
Stage III  buys inside the sigma parts of a P_q^k-equipartition of the
           vertices not yet used and fixes paths Q_1..Q_nu.
Stage IV   assigns the closing pairs to groups of absorption vertices by a
           neighborhood-threshold matching, buys inside Y_a plus those
           endsequences and closes the cycle with linkages.
Finally every absorption vertex left off the cycle is absorbed.

Each stage closes on the step its time runs out; a failing stage stops all
further purchases and the trial fails. The searches are randomized from
``search_seed``, reset on every start, so a trial replays exactly.
"""
import logging
import math
from typing import List, Optional, Sequence

import numpy as np

from budgetgraph.checkers import (
    SearchBudget,
    find_factor_by_embedding,
    find_path_power_factor,
    is_path_power,
    pack_disjoint_copies,
    verify_ham_power,
)
from budgetgraph.engine import DecisionHistory, Strategy
from budgetgraph.errors import CapacityError, ConstructionError, ParameterError
from budgetgraph.graph import Edge, Graph, complete_edge_count
from budgetgraph.hampower.absorbers import Absorber, absorb, build_absorber_template, validate_absorber
from budgetgraph.hampower.linkages import (
    EndsequencePair,
    Linkage,
    estimate_sparseness,
    find_linkage_family,
    interval_partition,
    sparse_partition_match,
)
from budgetgraph.models import HamPowerParams
from budgetgraph.patterns import f_equipartition, path_power

logger = logging.getLogger(__name__)


def _membership(n: int, groups: Sequence[Sequence[int]]) -> List[int]:
    owner = [-1] * n
    for index, group in enumerate(groups):
        for v in group:
            owner[v] = index
    return owner


def absorber_pool_parts(pool: Sequence[int], parts: int, block: int, count: int) -> List[List[int]]:
    """
    Split the absorber pool into ``parts`` parts, each holding a whole number of absorbers.

    The first ``count * block`` pool vertices are equipartitioned in blocks;
    the slack vertices after them are dealt round-robin over the parts.
    """
    core = list(pool[:count * block])
    split = f_equipartition(core, parts, block)
    for i, v in enumerate(pool[count * block:]):
        split[i % parts].append(v)
    return split


class HamPowerStrategy(Strategy):
    """
    Stateful four-stage strategy; see the module docstring.

    The stage closers are public so the assembly can be driven directly
    against a given bought graph.
    """

    name = "ham_power"

    def __init__(self, params: HamPowerParams, budget: Optional[int] = None):
        super().__init__(params.budget if budget is None else budget)
        self.params = params
        self.template: Absorber = build_absorber_template(params.j, params.ell, params.k)
        self.start(params.n, params.t)

    # setup

    def start(self, n: int, t: int) -> None:
        super().start(n, t)
        if n != self.params.n:
            raise ParameterError(f"strategy derived for n={self.params.n}, process has n={n}")
        p = self.params
        self.n = n
        self.stage = 1
        self.failed = False
        self.rng = np.random.default_rng(p.search_seed)
        bounds, total = [], 0
        for length in p.stage_lengths:
            total += length
            bounds.append(total)
        self.boundaries = bounds
        self.U1 = list(range(p.eta * (p.s + 1) + p.pool_slack))
        self.V_parts = absorber_pool_parts(self.U1, p.pi, p.s + 1, p.eta)
        self.I_groups = interval_partition(p.eta - 1, p.xi)
        self.buy_owner = _membership(n, self.V_parts)
        self.absorbers: List[Absorber] = []
        self.W: List[int] = []
        self.W_parts: List[List[int]] = []
        self.linkages: List[Linkage] = []
        self.spine_path: List[int] = []
        self.paths: List[List[int]] = []
        self.closing_pairs: List[EndsequencePair] = []
        self.Y_parts: List[List[int]] = []
        self.J_groups: List[List[int]] = []
        self.threshold: Optional[int] = None
        self.closing_linkages: List[Linkage] = []
        self.order: Optional[List[int]] = None
        self.U3: List[int] = []
        self.X_parts: List[List[int]] = []
        empty = Graph.empty(n)
        self._advance(0, empty, empty)

    def _budget(self) -> SearchBudget:
        return SearchBudget(self.params.search_budget)

    def _exact_factor(self, bought: Graph, F: Graph, part: Sequence[int], stage: str, index: int):
        """Rooted exact search, run once the randomized rounds have failed on a part that must be filled."""
        try:
            return find_factor_by_embedding(bought, F, part, self._budget())
        except CapacityError as e:
            logger.info("%s exact search capped in part %d: %s", stage, index, e)
            return None

    # process hooks

    def decide(self, step: int, history: DecisionHistory, edge: Edge) -> float:
        if self.failed or self.stage > 4:
            return 0.0
        a, b = self.buy_owner[edge[0]], self.buy_owner[edge[1]]
        return 1.0 if a == b and a >= 0 else 0.0

    def observe(self, step: int, history: DecisionHistory, edge: Edge, bought: bool) -> None:
        if self.stage <= 4 and step >= self.boundaries[self.stage - 1]:
            self._advance(step, history.bought_graph(), history.presented_graph())

    def finish(self, history: DecisionHistory) -> None:
        if self.stage <= 4:
            self._advance(len(history), history.bought_graph(), history.presented_graph())

    def witness(self) -> Optional[List[int]]:
        return self.order

    def _advance(self, step: int, bought: Graph, presented: Graph) -> None:
        closers = (self.close_stage_one, self.close_stage_two, self.close_stage_three, self.close_stage_four)
        while self.stage <= 4 and step >= self.boundaries[self.stage - 1]:
            stage = self.stage
            self.stage += 1
            if self.failed:
                continue
            ok = closers[stage - 1](bought, presented)
            if not ok:
                self.failed = True
                self.buy_owner = [-1] * self.n

    def _fail(self, stage: str, detail: str) -> bool:
        logger.info("%s failed: %s", stage, detail)
        self.log_stage(stage, False, detail)
        return False

    # stage closers

    def close_stage_one(self, bought: Graph, presented: Optional[Graph] = None) -> bool:
        """Fix eta absorbers in the pool parts and open stage II."""
        p = self.params
        F = self.template.graph()
        absorbers: List[Absorber] = []
        for index, part in enumerate(self.V_parts):
            count = len(part) // (p.s + 1)
            packing = pack_disjoint_copies(
                bought, F, count, part, rng=self.rng, restarts=p.search_restarts, search_budget=p.search_budget,
            )
            if packing is None and count * (p.s + 1) == len(part):
                packing = self._exact_factor(bought, F, part, "stage I", index)
            if packing is None:
                return self._fail("stage1", f"no {count} disjoint absorbers in part {index}")
            absorbers.extend(self.template.embed(phi) for phi in packing.copies)
        seen = set()
        bought_edges = bought.edge_set()
        for absorber in absorbers:
            validate_absorber(absorber)
            if seen.intersection(absorber.vertices):
                raise ConstructionError("stage I absorbers overlap")
            seen.update(absorber.vertices)
            if not absorber.edges <= bought_edges:
                raise ConstructionError("stage I absorber uses an edge that was not bought")
        if len(absorbers) != p.eta:
            raise ConstructionError(f"stage I fixed {len(absorbers)} absorbers, expected {p.eta}")
        self.absorbers = absorbers
        self.log_stage("stage1", True, f"absorbers={len(absorbers)} parts={len(self.V_parts)}")
        # stage II buys inside W_a and the endsequences of its pairs
        self.W = [v for v in range(self.n) if v not in seen]
        self.W_parts = [[self.W[i] for i in group] for group in interval_partition(len(self.W), p.xi)]
        groups = []
        for a, indices in enumerate(self.I_groups):
            members = list(self.W_parts[a])
            for i in indices:
                members.extend(self._stage_two_pair(i).vertices)
            groups.append(members)
        self.buy_owner = _membership(self.n, groups)
        return True

    def _stage_two_pair(self, i: int) -> EndsequencePair:
        return EndsequencePair(self.absorbers[i].final_endsequence, self.absorbers[i + 1].initial_endsequence)

    def close_stage_two(self, bought: Graph, presented: Optional[Graph] = None) -> bool:
        """Link consecutive absorbers into Q_0 and open stage III."""
        p = self.params
        linkages: List[Linkage] = []
        for a, indices in enumerate(self.I_groups):
            family = [self._stage_two_pair(i) for i in indices]
            if not family:
                continue
            try:
                found = find_linkage_family(bought, family, p.r, self.W_parts[a], self._budget())
            except ParameterError as e:
                return self._fail("stage2", f"group {a}: {e}")
            except CapacityError as e:
                logger.warning("stage II linkage search capped in group %d: %s", a, e)
                return self._fail("stage2", f"search budget exhausted in group {a}")
            if found is None:
                return self._fail("stage2", f"no linkage family in group {a}")
            # groups are consecutive intervals, so linkages stay in absorber order
            linkages.extend(found)
        self.linkages = linkages
        path: List[int] = list(self.absorbers[0].spine)
        for i, linkage in enumerate(linkages):
            path.extend(linkage.internal)
            path.extend(self.absorbers[i + 1].spine)
        self.spine_path = path
        used = {v for a in self.absorbers for v in a.vertices} | {v for link in linkages for v in link.internal}
        self.U3 = [v for v in range(self.n) if v not in used]
        self.log_stage("stage2", True, f"linkages={len(linkages)} path={len(path)}")
        if len(self.U3) != p.nu * p.q:
            raise ConstructionError(f"|U3|={len(self.U3)} differs from nu*q={p.nu * p.q}")
        self.X_parts = f_equipartition(self.U3, p.sigma, p.q) if p.nu else []
        self.buy_owner = _membership(self.n, self.X_parts)
        return True

    def close_stage_three(self, bought: Graph, presented: Graph) -> bool:
        """Fix the P_q^k factor on U3, choose the stage IV groups and open stage IV."""
        p = self.params
        paths: List[List[int]] = []
        for index, part in enumerate(self.X_parts):
            factor = find_path_power_factor(
                bought, p.k, p.q, part, rng=self.rng, restarts=p.search_restarts, search_budget=p.search_budget,
            )
            if factor is None:
                exact = self._exact_factor(bought, path_power(p.q, p.k), part, "stage III", index)
                factor = None if exact is None else [list(phi) for phi in exact.copies]
            if factor is None:
                return self._fail("stage3", f"no P_q^k factor in part {index}")
            paths.extend(factor)
        for path in paths:
            if len(path) != p.q or not is_path_power(bought, path, p.k):
                raise ConstructionError("stage III path is not a bought P_q^k")
        self.paths = paths
        self.log_stage("stage3", True, f"paths={len(paths)}")

        k = p.k
        chain = [self.spine_path] + paths
        size = len(chain)
        self.closing_pairs = [
            EndsequencePair(tuple(chain[i][-k:]), tuple(chain[(i + 1) % size][:k])) for i in range(size)
        ]
        absorption = [a.absorption_vertex for a in self.absorbers]
        keep = len(absorption) - len(absorption) % p.xi
        self.Y_parts = [absorption[a * (keep // p.xi):(a + 1) * (keep // p.xi)] for a in range(p.xi)]
        return self.assign_closing_groups(presented)

    def assign_closing_groups(self, presented: Graph) -> bool:
        """
        Match the closing pairs to the Y_a under the neighborhood threshold and open stage IV.

        Args:
            presented: Every edge presented so far
        """
        p = self.params
        zeta = len(self.Y_parts[0])
        p_hat = p.t / complete_edge_count(self.n)
        log_n = math.log(self.n)
        threshold = math.floor(p.threshold_scale * p_hat * zeta / log_n)
        self.threshold = threshold
        logger.info(
            "stage IV threshold %d (scale %.3g); the asymptotic choice 2*p*zeta/ln^5 n gives %.4g",
            threshold, p.threshold_scale, 2 * p_hat * zeta / log_n ** 5,
        )
        if p.r >= 1 and zeta >= max(2, p.r):
            estimate = estimate_sparseness(
                presented, self.Y_parts[0], self.closing_pairs[0].vertices, p.r, max(p.r, zeta // 2), 0.0,
                rng=0, subsets=5, draws=20,
            )
            logger.debug("stage IV sparseness diagnostic: worst ratio %.4g", estimate.worst_ratio)
        J = sparse_partition_match(presented, [pair.vertices for pair in self.closing_pairs], self.Y_parts, threshold)
        if J is None:
            return self._fail("stage4", f"no sparse partition at threshold {threshold}")
        self.J_groups = J
        groups = []
        for a, indices in enumerate(J):
            members = list(self.Y_parts[a])
            for i in indices:
                members.extend(self.closing_pairs[i].vertices)
            groups.append(members)
        self.buy_owner = _membership(self.n, groups)
        return True

    def close_stage_four(self, bought: Graph, presented: Optional[Graph] = None) -> bool:
        """Close the cycle with linkages through Y_a, absorb the rest and verify."""
        p = self.params
        linkages: List[Optional[Linkage]] = [None] * len(self.closing_pairs)
        for a, indices in enumerate(self.J_groups):
            family = [self.closing_pairs[i] for i in indices]
            if not family:
                continue
            try:
                found = find_linkage_family(bought, family, p.r, self.Y_parts[a], self._budget())
            except ParameterError as e:
                return self._fail("stage4", f"group {a}: {e}")
            except CapacityError as e:
                logger.warning("stage IV linkage search capped in group %d: %s", a, e)
                return self._fail("stage4", f"search budget exhausted in group {a}")
            if found is None:
                return self._fail("stage4", f"no closing linkage family in group {a}")
            for i, linkage in zip(indices, found):
                linkages[i] = linkage
        self.closing_linkages = [link for link in linkages if link is not None]
        self.log_stage("stage4", True, f"closing linkages={len(self.closing_linkages)}")

        chain = [self.spine_path] + self.paths
        cycle: List[int] = []
        for i, segment in enumerate(chain):
            cycle.extend(segment)
            cycle.extend(linkages[i].internal)
        on_cycle = set(cycle)
        leftover = [a.absorption_vertex for a in self.absorbers if a.absorption_vertex not in on_cycle]
        order = absorb(cycle, self.absorbers, leftover)
        if sorted(order) != list(range(self.n)):
            raise ConstructionError("assembled order does not visit every vertex exactly once")
        if not verify_ham_power(bought, order, p.k):
            raise ConstructionError("assembled order is not a power of a Hamilton cycle in the bought graph")
        self.order = order
        self.log_stage("absorption", True, f"absorbed={len(leftover)}")
        return True


def make_ham_power_strategy(params: HamPowerParams, budget: Optional[int] = None) -> HamPowerStrategy:
    return HamPowerStrategy(params, budget)
