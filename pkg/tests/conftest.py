import numpy as np
import pytest

from sesel.graph import graph_from_edges


@pytest.fixture
def two_node_graph():
    return graph_from_edges(2, [0], [1], [1.0])


@pytest.fixture
def star_graph():
    # unit-weight star: node 0 is the hub
    return graph_from_edges(4, [0, 0, 0], [1, 2, 3], [1.0, 1.0, 1.0])


@pytest.fixture
def two_triangles_graph():
    # two unit triangles joined by one weak edge 0-3
    ea = [0, 0, 1, 3, 3, 4, 0]
    eb = [1, 2, 2, 4, 5, 5, 3]
    ew = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.1]
    return graph_from_edges(6, ea, eb, ew)


@pytest.fixture
def path_graph():
    # 0-1-2 with equal strong weights
    return graph_from_edges(3, [0, 1], [1, 2], [0.9, 0.9])


def random_graph(rng, n, k=None, dim=6):
    from sesel.graph import build_knn_graph, default_k

    x = rng.standard_normal((n, dim))
    return build_knn_graph(x, k or min(default_k(n), n - 1))


def random_weighted_graph(rng, n, p=0.5):
    """Erdos-Renyi-ish with weights in (0, 1]; guarantees no isolated node."""
    ea, eb, ew = [], [], []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.uniform() < p:
                ea.append(u)
                eb.append(v)
                ew.append(float(rng.uniform(0.05, 1.0)))
    # connect anything isolated to its successor
    deg = np.zeros(n)
    for u, v in zip(ea, eb):
        deg[u] += 1
        deg[v] += 1
    for u in np.flatnonzero(deg == 0).tolist():
        v = (u + 1) % n
        ea.append(min(u, v))
        eb.append(max(u, v))
        ew.append(float(rng.uniform(0.05, 1.0)))
    return graph_from_edges(n, ea, eb, ew)
