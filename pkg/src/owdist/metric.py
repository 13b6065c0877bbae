"""Finite metric spaces and discrete probability measures on them.

Supported space kinds: Euclidean point clouds, weighted-graph shortest-path
metrics, geodesic metrics on unit spheres, and explicit distance matrices.
Every space materializes its full n-by-n distance matrix once; spaces and
measures are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial.distance import cdist

from .errors import ContractError

EUCLIDEAN_CLOUD = "euclidean-cloud"
GRAPH_SHORTEST_PATH = "graph-shortest-path"
SPHERE_GEODESIC = "sphere-geodesic"
EXPLICIT_MATRIX = "explicit-matrix"

SPACE_KINDS = (EUCLIDEAN_CLOUD, GRAPH_SHORTEST_PATH, SPHERE_GEODESIC, EXPLICIT_MATRIX)


@dataclass(frozen=True)
class FiniteMetricSpace:
    """A finite point set with a precomputed pairwise distance matrix.

    Attributes
    ----------
    dmat : (n, n) float array, symmetric with zero diagonal.
    kind : one of SPACE_KINDS.
    coords : optional (n, d) ambient coordinates, present for point clouds
        and spheres.  Needed to evaluate observables anchored at points
        outside the space.
    """

    dmat: np.ndarray
    kind: str
    coords: np.ndarray | None = None

    def __post_init__(self):
        self.dmat.setflags(write=False)
        if self.coords is not None:
            self.coords.setflags(write=False)

    @property
    def size(self) -> int:
        return self.dmat.shape[0]

    def dist(self, i: int, j: int) -> float:
        return float(self.dmat[i, j])

    def diameter(self) -> float:
        return float(self.dmat.max())


def _finish_space(dmat: np.ndarray, kind: str, coords=None) -> FiniteMetricSpace:
    dmat = np.ascontiguousarray(dmat, dtype=float)
    np.fill_diagonal(dmat, 0.0)
    if (dmat < 0).any():
        raise ContractError("negative distances in metric space")
    return FiniteMetricSpace(dmat=dmat, kind=kind, coords=coords)


def _as_points(points, name: str = "points") -> np.ndarray:
    try:
        pts = np.asarray(points, dtype=float)
    except (ValueError, TypeError) as exc:
        raise ValueError(f"{name} have ragged dimensions") from exc
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.ndim != 2:
        raise ValueError(f"{name} must be a list of equal-length vectors")
    if pts.shape[0] == 0:
        raise ValueError(f"{name} are empty")
    if not np.isfinite(pts).all():
        raise ValueError(f"{name} contain non-finite entries")
    return pts


def build_point_cloud_space(points) -> FiniteMetricSpace:
    """Euclidean metric on a list of d-dimensional points.

    Accepts a flat list of scalars as points on the real line.
    """
    pts = _as_points(points)
    dmat = cdist(pts, pts)
    return _finish_space(dmat, EUCLIDEAN_CLOUD, coords=pts)


def build_graph_space(num_nodes: int, edges) -> FiniteMetricSpace:
    """Shortest-path metric of an undirected positively-weighted graph.

    ``edges`` is an iterable of ``(i, j, weight)``; an unweighted graph is
    expressed with all weights 1.  Raises ContractError naming an unreachable
    pair if the graph is disconnected.
    """
    n = int(num_nodes)
    if n < 1:
        raise ValueError("graph needs at least one node")
    rows, cols, vals = [], [], []
    for e in edges:
        i, j, w = int(e[0]), int(e[1]), float(e[2])
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"edge ({i}, {j}) out of range for {n} nodes")
        if i == j:
            raise ValueError(f"self-loop at node {i}")
        if not w > 0:
            raise ValueError(f"edge ({i}, {j}) has nonpositive weight {w}")
        rows += [i, j]
        cols += [j, i]
        vals += [w, w]
    adj = csr_matrix((vals, (rows, cols)), shape=(n, n))
    dmat = dijkstra(adj, directed=False)
    if np.isinf(dmat).any():
        i, j = np.argwhere(np.isinf(dmat))[0]
        raise ContractError(f"graph is disconnected: no path between nodes {i} and {j}")
    # Forward and reverse Dijkstra may disagree in the last ulp from edge
    # summation order; the true metric is symmetric, so keep the minimum.
    dmat = np.minimum(dmat, dmat.T)
    return _finish_space(dmat, GRAPH_SHORTEST_PATH)


def sphere_geodesic(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Great-circle distances between rows of two unit-vector arrays.

    Evaluated as 2*arcsin(chord/2), the stable form of the arccos of the
    clamped inner product: exact 0 for identical rows, pi for antipodes.
    """
    chord = cdist(np.atleast_2d(u), np.atleast_2d(v))
    return 2.0 * np.arcsin(np.clip(0.5 * chord, 0.0, 1.0))


def build_sphere_space(unit_vectors) -> FiniteMetricSpace:
    """Geodesic metric on points of a unit sphere in R^(d+1).

    Input vectors must be unit norm within 1e-9; they are renormalized
    exactly before distances are taken.
    """
    pts = _as_points(unit_vectors, "unit vectors")
    norms = np.linalg.norm(pts, axis=1)
    if (norms == 0).any():
        raise ValueError("zero vector cannot lie on the sphere")
    if np.abs(norms - 1.0).max() > 1e-9:
        k = int(np.abs(norms - 1.0).argmax())
        raise ValueError(f"vector {k} has norm {norms[k]!r}, deviating from 1 by more than 1e-9")
    pts = pts / norms[:, None]
    dmat = sphere_geodesic(pts, pts)
    return _finish_space(dmat, SPHERE_GEODESIC, coords=pts)


def explicit_space(dmat) -> FiniteMetricSpace:
    """Wrap a user-supplied distance matrix, checking the metric axioms.

    The triangle inequality is verified exactly up to 1e-9 over all triples,
    so this constructor is meant for small spaces.
    """
    d = np.asarray(dmat, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError("distance matrix must be square")
    if not np.allclose(d, d.T, rtol=0.0, atol=0.0):
        raise ContractError("distance matrix is not symmetric")
    if np.abs(np.diagonal(d)).max(initial=0.0) != 0.0:
        raise ContractError("distance matrix has nonzero diagonal")
    if (d < 0).any():
        raise ContractError("distance matrix has negative entries")
    for k in range(d.shape[0]):
        if (d > d[:, k:k + 1] + d[k:k + 1, :] + 1e-9).any():
            raise ContractError(f"triangle inequality fails through point {k}")
    return _finish_space(d.copy(), EXPLICIT_MATRIX)


@dataclass(frozen=True)
class DiscreteMeasure:
    """A probability measure with finitely many atoms on a space.

    ``indices`` are distinct, sorted point indices; ``weights`` are strictly
    positive and sum to 1.
    """

    space: FiniteMetricSpace
    indices: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.indices.setflags(write=False)
        self.weights.setflags(write=False)

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def support_size(self) -> int:
        return len(self.indices)


def make_measure(space: FiniteMetricSpace, indices, weights, normalize: bool = False) -> DiscreteMeasure:
    """Build a measure, merging duplicate indices and renormalizing weights.

    Duplicate indices accumulate their weights; zero weights are dropped.
    Unless ``normalize`` is set, the raw weights must already sum to 1
    within 1e-9 (they are then renormalized exactly).
    """
    idx = np.asarray(indices, dtype=np.int64).ravel()
    w = np.asarray(weights, dtype=float).ravel()
    if idx.size == 0:
        raise ValueError("measure needs at least one atom")
    if idx.size != w.size:
        raise ValueError("indices and weights differ in length")
    if (idx < 0).any() or (idx >= space.size).any():
        bad = idx[(idx < 0) | (idx >= space.size)][0]
        raise ValueError(f"atom index {bad} out of range for space of size {space.size}")
    if (w < 0).any():
        raise ContractError("measure weights must be nonnegative")
    total = w.sum()
    if total <= 0:
        raise ContractError("measure weights sum to zero")
    if not normalize and abs(total - 1.0) > 1e-9:
        raise ContractError(f"measure weights sum to {total!r}, not 1")
    uniq, inv = np.unique(idx, return_inverse=True)
    merged = np.zeros(len(uniq))
    np.add.at(merged, inv, w)
    keep = merged > 0
    uniq, merged = uniq[keep], merged[keep]
    merged = merged / merged.sum()
    return DiscreteMeasure(space=space, indices=uniq, weights=merged)


def uniform_measure(space: FiniteMetricSpace, indices) -> DiscreteMeasure:
    """Uniform weights over the given indices; duplicates merge their mass."""
    idx = np.asarray(indices, dtype=np.int64).ravel()
    if idx.size == 0:
        raise ValueError("measure needs at least one atom")
    return make_measure(space, idx, np.full(idx.size, 1.0 / idx.size))


def check_triangle_inequality(space: FiniteMetricSpace, tol: float = 1e-9) -> float:
    """Largest triangle-inequality violation over all triples (<= 0 means none)."""
    d = space.dmat
    worst = -np.inf
    for k in range(space.size):
        gap = (d - (d[:, k:k + 1] + d[k:k + 1, :])).max()
        worst = max(worst, float(gap))
    if worst > tol:
        raise ContractError(f"triangle inequality violated by {worst}")
    return worst
