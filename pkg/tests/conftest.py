import numpy as np
import pytest

from owdist import build_graph_space, build_point_cloud_space, build_sphere_space, make_measure


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def unit_square_space(rng):
    return build_point_cloud_space(rng.random((30, 2)))


def random_connected_graph_space(rng, n, extra_edges=6):
    """Random spanning tree plus a few extra weighted edges; always connected."""
    edges = []
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges.append((u, v, float(0.25 * rng.integers(1, 9))))
    for _ in range(extra_edges):
        u, v = rng.choice(n, size=2, replace=False)
        edges.append((int(u), int(v), float(0.25 * rng.integers(1, 9))))
    return build_graph_space(n, edges)


def random_sphere_space(rng, n, d=2):
    vecs = rng.standard_normal((n, d + 1))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    return build_sphere_space(vecs)


def random_measure(rng, space, max_atoms=None):
    n = space.size if max_atoms is None else min(space.size, max_atoms)
    k = int(rng.integers(1, n + 1))
    idx = rng.choice(space.size, size=k, replace=False)
    w = rng.random(k) + 1e-3
    return make_measure(space, idx, w / w.sum(), normalize=True)
