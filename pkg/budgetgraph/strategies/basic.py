"""The simple strategies: buy everything, a fixed target, a forest, a degree target."""
import os
from typing import Dict, Optional

from budgetgraph.engine import DecisionHistory, Strategy
from budgetgraph.errors import ParameterError
from budgetgraph.graph import Edge, Graph


class BuyAll(Strategy):
    name = "buy_all"

    def decide(self, step: int, history: DecisionHistory, edge: Edge) -> float:
        return 1.0


class FixedSubgraph(Strategy):
    """Buys exactly the presented edges of a fixed graph H."""

    name = "fixed_subgraph"

    def __init__(self, target: Graph, budget: int):
        super().__init__(budget)
        self.target = target

    def decide(self, step: int, history: DecisionHistory, edge: Edge) -> float:
        return 1.0 if self.target.has_edge(*edge) else 0.0


class MinDegreeGreedy(Strategy):
    name = "min_degree_greedy"

    def __init__(self, kdeg: int, budget: int):
        if kdeg < 1:
            raise ParameterError(f"kdeg must be at least 1, got {kdeg}")
        super().__init__(budget)
        self.kdeg = kdeg

    def decide(self, step: int, history: DecisionHistory, edge: Edge) -> float:
        u, v = edge
        if history.bought.degree(u) < self.kdeg or history.bought.degree(v) < self.kdeg:
            return 1.0
        return 0.0


class DisjointSet:
    """Union by rank with path compression over vertices 0..n-1."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> bool:
        """Merge the sets of x and y; False if they were already one set."""
        px, py = self.find(x), self.find(y)
        if px == py:
            return False
        if self.rank[px] < self.rank[py]:
            px, py = py, px
        self.parent[py] = px
        if self.rank[px] == self.rank[py]:
            self.rank[px] += 1
        return True


class Forest(Strategy):
    """Buys an edge iff it joins two components of the bought graph."""

    name = "forest"

    def __init__(self, budget: int):
        super().__init__(budget)
        self.components: Optional[DisjointSet] = None

    def start(self, n: int, t: int) -> None:
        super().start(n, t)
        self.components = DisjointSet(n)

    def decide(self, step: int, history: DecisionHistory, edge: Edge) -> float:
        return 0.0 if self.components.find(edge[0]) == self.components.find(edge[1]) else 1.0

    def observe(self, step: int, history: DecisionHistory, edge: Edge, bought: bool) -> None:
        if bought:
            self.components.union(*edge)


def make_buy_all(budget: int) -> Strategy:
    return BuyAll(budget)


def make_fixed_subgraph(target: Graph, budget: Optional[int] = None) -> Strategy:
    """Fixed-target strategy; the budget defaults to e(H)."""
    return FixedSubgraph(target, target.edge_count if budget is None else budget)


def make_min_degree_greedy(kdeg: int, budget: int) -> Strategy:
    return MinDegreeGreedy(kdeg, budget)


def make_forest(budget: int) -> Strategy:
    return Forest(budget)


def clique_factor_graph(n: int, r: int) -> Graph:
    """Disjoint copies of K_r on the consecutive blocks {0..r-1}, {r..2r-1}, ..."""
    if r < 2 or n % r:
        raise ParameterError(f"a K_{r}-factor needs r >= 2 dividing n={n}")
    edges = []
    for start in range(0, n, r):
        edges.extend((start + a, start + b) for a in range(r) for b in range(a + 1, r))
    return Graph(n, edges)


def named_subgraph(spec: str, n: int) -> Graph:
    """
    Resolve a fixed target graph on [n].

    Args:
        spec: ``perfect_matching``, ``clique_factor:r=<r>`` or an edge-list path
        n: Number of vertices the target must live on

    Raises:
        ParameterError: If the name is unknown or the graph has the wrong order
    """
    text = spec.strip()
    if text == "perfect_matching":
        return clique_factor_graph(n, 2)
    if text.startswith("clique_factor:"):
        args: Dict[str, str] = dict(item.split("=", 1) for item in text[len("clique_factor:"):].split(",") if "=" in item)
        if "r" not in args or not args["r"].isdigit():
            raise ParameterError(f"malformed clique factor target '{spec}'")
        return clique_factor_graph(n, int(args["r"]))
    if not os.path.isfile(text):
        raise ParameterError(f"unknown fixed subgraph '{spec}'")
    with open(text, "r", encoding="utf-8") as f:
        graph = Graph.from_edge_list_text(f.read())
    if graph.n != n:
        raise ParameterError(f"fixed subgraph has {graph.n} vertices, the process has {n}")
    return graph
