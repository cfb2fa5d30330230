import numpy as np
import pytest

from budgetgraph.graph import Graph


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def triangle():
    return Graph.complete(3)


@pytest.fixture
def k4():
    return Graph.complete(4)


@pytest.fixture
def pendant_triangle():
    """A triangle with one pendant vertex attached to vertex 0."""
    return Graph(4, [(0, 1), (0, 2), (1, 2), (0, 3)])


@pytest.fixture
def out_dir(tmp_path):
    return str(tmp_path / "results")
