"""Baseline metrics: sliced / max-sliced Wasserstein and Chamfer distance.

Slicing projects Euclidean point measures onto random directions and reuses
the 1D Wasserstein core, so sliced and observable estimates share one
numerical inner loop.  Chamfer is the brute-force double nearest-neighbor
sum of squared distances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .metric import EUCLIDEAN_CLOUD, DiscreteMeasure
from .ot import line_measure, wasserstein_1d
from .parallel import parallel_map

MEAN = "mean"
MAX = "max"


@dataclass(frozen=True)
class SliceSet:
    """Unit projection directions plus the seed that produced them."""

    directions: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        self.directions.setflags(write=False)

    def __len__(self) -> int:
        return len(self.directions)


def sample_slices(d: int, count: int, seed: int | None = None) -> SliceSet:
    """Directions uniform on the sphere: normalized standard Gaussians."""
    if d < 1 or count < 1:
        raise ValueError("need d >= 1 and count >= 1")
    rng = np.random.default_rng(seed)
    vecs = rng.standard_normal((count, d))
    norms = np.linalg.norm(vecs, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return SliceSet(directions=vecs / norms, seed=seed)


def sliced_wasserstein(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    p: float,
    slices: SliceSet,
    mode: str = MEAN,
    threads: int = 1,
) -> float:
    """Sliced (mean) or max-sliced Wasserstein distance on a point cloud."""
    if mu.space is not nu.space:
        raise ValueError("measures must live on the same space")
    space = mu.space
    if space.kind != EUCLIDEAN_CLOUD or space.coords is None:
        raise ValueError("sliced Wasserstein needs a Euclidean point-cloud space")
    if mode not in (MEAN, MAX):
        raise ValueError(f"mode must be 'mean' or 'max', got {mode!r}")
    pts_mu = space.coords[mu.indices]
    pts_nu = space.coords[nu.indices]

    def one(theta):
        pm = line_measure(pts_mu @ theta, mu.weights)
        pn = line_measure(pts_nu @ theta, nu.weights)
        return wasserstein_1d(pm, pn, p)

    per = np.array(parallel_map(one, slices.directions, threads=threads))
    return float(per.max() if mode == MAX else per.mean())


def chamfer(p_cloud, q_cloud) -> float:
    """Chamfer distance: both one-sided sums of squared nearest distances."""
    p_arr = np.atleast_2d(np.asarray(p_cloud, dtype=float))
    q_arr = np.atleast_2d(np.asarray(q_cloud, dtype=float))
    if p_arr.size == 0 or q_arr.size == 0:
        raise ValueError("chamfer distance needs two nonempty clouds")
    if p_arr.shape[1] != q_arr.shape[1]:
        raise ValueError("clouds differ in dimension")
    sq = cdist(p_arr, q_arr, metric="sqeuclidean")
    return float(sq.min(axis=1).sum() + sq.min(axis=0).sum())
