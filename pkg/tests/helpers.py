"""Hypothesis strategies and paths shared by the test modules."""
import os

from hypothesis import strategies as st

from budgetgraph.graph import Graph, complete_edge_count

CONFIGS = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "configs")


@st.composite
def graphs(draw, min_n=0, max_n=7):
    """Arbitrary simple graphs on [n]."""
    n = draw(st.integers(min_n, max_n))
    total = complete_edge_count(n)
    mask = draw(st.integers(0, (1 << total) - 1)) if total else 0
    return Graph.from_edge_indices(n, [e for e in range(total) if mask >> e & 1])


@st.composite
def nested_graphs(draw, min_n=1, max_n=7):
    """Pairs (H, G) with H a subgraph of G."""
    G = draw(graphs(min_n, max_n))
    edges = list(G.edges())
    keep = draw(st.lists(st.booleans(), min_size=len(edges), max_size=len(edges)))
    H = Graph(G.n, [e for e, flag in zip(edges, keep) if flag])
    return H, G
