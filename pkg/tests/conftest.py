import numpy as np
import pytest

from bihop.graph import BipartiteGraph, build_graph


@pytest.fixture
def single_edge_graph() -> BipartiteGraph:
    """One left node, one right node, one edge."""
    return build_graph(1, 1, [(0, 0)])


@pytest.fixture
def path_graph() -> BipartiteGraph:
    """Left node 0 joined to right nodes 0 and 1 (a 3-node path)."""
    return build_graph(1, 2, [(0, 0), (0, 1)])


@pytest.fixture
def toy_graph() -> BipartiteGraph:
    """3x3 with 4 edges; small enough for hand calculation."""
    return build_graph(3, 3, [(0, 0), (0, 1), (1, 1), (2, 2)])


def random_bipartite(rng: np.random.Generator, max_side: int = 8, min_edges: int = 1) -> BipartiteGraph:
    """A random graph for property tests (every node may have degree 0)."""
    n_left = int(rng.integers(1, max_side + 1))
    n_right = int(rng.integers(1, max_side + 1))
    density = rng.uniform(0.15, 0.7)
    pairs = [
        (u, v)
        for u in range(n_left)
        for v in range(n_right)
        if rng.random() < density
    ]
    while len(pairs) < min_edges:
        pairs.append((int(rng.integers(n_left)), int(rng.integers(n_right))))
    return build_graph(n_left, n_right, pairs)
