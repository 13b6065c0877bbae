"""Wedge observables: weighted minima (or maxima) of distance-to-anchor
functions, the 1-Lipschitz projections that push measures onto the line.

Anchors are either point indices of a space or ambient coordinates (allowed
on point-cloud and sphere spaces, where out-of-space anchor points still
have well-defined distances).  All evaluation is vectorized over points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ContractError
from .metric import (
    EUCLIDEAN_CLOUD,
    SPHERE_GEODESIC,
    DiscreteMeasure,
    FiniteMetricSpace,
    sphere_geodesic,
)
from .ot import LineMeasure, line_measure

MIN = "min"
MAX = "max"


@dataclass(frozen=True)
class Observable:
    """f(x) = min_i weights[i] * d(x, anchor_i), or the max variant.

    Exactly one of ``anchor_indices`` (indices into a space) and
    ``anchor_coords`` (ambient points) is set.  Weights lie in (0, 1] so the
    function is 1-Lipschitz and never degenerates to the zero function.
    """

    weights: np.ndarray
    combinator: str = MIN
    anchor_indices: np.ndarray | None = None
    anchor_coords: np.ndarray | None = None

    def __post_init__(self):
        self.weights.setflags(write=False)
        if self.anchor_indices is not None:
            self.anchor_indices.setflags(write=False)
        if self.anchor_coords is not None:
            self.anchor_coords.setflags(write=False)

    @property
    def order(self) -> int:
        """Wedge order n: the observable combines n+1 anchor distances."""
        return len(self.weights) - 1

    def __len__(self) -> int:
        return len(self.weights)


def observable(anchors, weights=None, combinator: str = MIN) -> Observable:
    """Build an observable from anchors given as indices or coordinate rows."""
    if combinator not in (MIN, MAX):
        raise ValueError(f"combinator must be 'min' or 'max', got {combinator!r}")
    arr = np.asarray(anchors)
    if arr.size == 0:
        raise ValueError("observable needs at least one anchor")
    if weights is None:
        w = np.ones(arr.shape[0] if arr.ndim == 2 else arr.size)
    else:
        w = np.asarray(weights, dtype=float).ravel()
    if (w <= 0).any() or (w > 1).any():
        raise ContractError("observable weights must lie in (0, 1]")
    if arr.ndim == 2:
        coords = np.ascontiguousarray(arr, dtype=float)
        if len(w) != coords.shape[0]:
            raise ValueError("anchors and weights differ in length")
        return Observable(weights=w, combinator=combinator, anchor_coords=coords)
    if arr.ndim == 1 and np.issubdtype(arr.dtype, np.integer):
        idx = np.ascontiguousarray(arr, dtype=np.int64)
        if len(w) != idx.size:
            raise ValueError("anchors and weights differ in length")
        return Observable(weights=w, combinator=combinator, anchor_indices=idx)
    raise ValueError("anchors must be integer indices or a 2D array of coordinates")


def distance_observable(anchor) -> Observable:
    """The plain distance-to-a-point function f_a with unit weight."""
    if np.isscalar(anchor) and isinstance(anchor, (int, np.integer)):
        return observable(np.array([anchor], dtype=np.int64))
    return observable(np.atleast_2d(np.asarray(anchor, dtype=float)))


def _ambient_distances(coords_from: np.ndarray, coords_to: np.ndarray, kind: str) -> np.ndarray:
    if kind == EUCLIDEAN_CLOUD:
        return cdist(coords_from, coords_to)
    if kind == SPHERE_GEODESIC:
        norms = np.linalg.norm(coords_from, axis=1, keepdims=True)
        if (norms == 0).any():
            raise ValueError("zero vector cannot anchor a sphere observable")
        return sphere_geodesic(coords_from / norms, coords_to)
    raise ValueError(f"ambient anchors are not defined for {kind} spaces")


def anchor_distances(f: Observable, space: FiniteMetricSpace, point_indices=None) -> np.ndarray:
    """Matrix of d(anchor_i, x_j) for the space points (all, by default)."""
    if f.anchor_indices is not None:
        rows = space.dmat[f.anchor_indices]
        return rows if point_indices is None else rows[:, np.asarray(point_indices)]
    if space.coords is None:
        raise ValueError(f"space of kind {space.kind!r} has no coords for ambient anchors")
    pts = space.coords if point_indices is None else space.coords[np.asarray(point_indices)]
    return _ambient_distances(f.anchor_coords, pts, space.kind)


def eval_observable_many(f: Observable, space: FiniteMetricSpace, point_indices=None) -> np.ndarray:
    """Observable values at the given points (all space points by default)."""
    vals = f.weights[:, None] * anchor_distances(f, space, point_indices)
    return vals.min(axis=0) if f.combinator == MIN else vals.max(axis=0)


def eval_observable(f: Observable, x: int, space: FiniteMetricSpace) -> float:
    return float(eval_observable_many(f, space, np.array([x]))[0])


def eval_observable_at_coords(f: Observable, points: np.ndarray, space: FiniteMetricSpace) -> np.ndarray:
    """Observable values at arbitrary ambient points (grid evaluation)."""
    if space.coords is None:
        raise ValueError(f"space of kind {space.kind!r} has no ambient coordinates")
    anchors = f.anchor_coords if f.anchor_coords is not None else space.coords[f.anchor_indices]
    dists = _ambient_distances(anchors, np.atleast_2d(np.asarray(points, dtype=float)), space.kind)
    vals = f.weights[:, None] * dists
    return vals.min(axis=0) if f.combinator == MIN else vals.max(axis=0)


def pushforward(mu: DiscreteMeasure, f: Observable) -> LineMeasure:
    """Pushforward of a measure to the line: atoms at f(x) with mu's weights."""
    return line_measure(eval_observable_many(f, mu.space, mu.indices), mu.weights)


@dataclass(frozen=True)
class ObservableSet:
    """A finite family of observables with a record of how it was sampled."""

    observables: tuple[Observable, ...]
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.observables) == 0:
            raise ValueError("observable set must be nonempty")

    def __len__(self) -> int:
        return len(self.observables)

    def __iter__(self):
        return iter(self.observables)

    def __getitem__(self, k: int) -> Observable:
        return self.observables[k]

    def union(self, other: "ObservableSet") -> "ObservableSet":
        return ObservableSet(
            observables=self.observables + other.observables,
            provenance={"strategy": "union", "parts": [self.provenance, other.provenance]},
        )


UNIT_WEIGHTS = "unit"
UNIFORM_WEIGHTS = "uniform"


def sample_anchored_set(
    space: FiniteMetricSpace,
    pool,
    order: int,
    count: int,
    weight_mode: str = UNIT_WEIGHTS,
    seed: int | None = None,
    exhaust: bool = False,
) -> ObservableSet:
    """Sample observables anchored on a pool of points.

    The pool is an array of point indices or of ambient coordinate rows.
    Each observable takes ``order + 1`` anchors drawn uniformly with
    replacement; weights are all 1 (``unit``) or drawn from (0, 1]
    (``uniform``).  With ``exhaust`` (order 0 only) the pool is enumerated
    without replacement, yielding exactly the distance functions f_a.
    """
    pool_arr = np.asarray(pool)
    if pool_arr.size == 0:
        raise ValueError("anchor pool is empty")
    if order < 0:
        raise ValueError("wedge order must be >= 0")
    is_coords = pool_arr.ndim == 2
    if is_coords:
        pool_arr = np.ascontiguousarray(pool_arr, dtype=float)
    else:
        pool_arr = np.ascontiguousarray(pool_arr, dtype=np.int64)
        if (pool_arr < 0).any() or (pool_arr >= space.size).any():
            raise ValueError("pool indices out of range")
    pool_size = pool_arr.shape[0]
    provenance = {
        "strategy": "exhaust" if exhaust else "random",
        "seed": seed,
        "order": order,
        "weight_mode": weight_mode,
        "pool_size": pool_size,
        "ambient": bool(is_coords),
    }
    if exhaust:
        if order != 0:
            raise ValueError("exhaust mode enumerates the pool for order 0 only")
        obs = tuple(
            observable(pool_arr[k:k + 1] if is_coords else pool_arr[k:k + 1])
            for k in range(pool_size)
        )
        provenance["count"] = pool_size
        return ObservableSet(observables=obs, provenance=provenance)
    if count < 1:
        raise ValueError("count must be >= 1")
    if weight_mode not in (UNIT_WEIGHTS, UNIFORM_WEIGHTS):
        raise ValueError(f"unknown weight mode {weight_mode!r}")
    provenance["count"] = count
    rng = np.random.default_rng(seed)
    obs = []
    for _ in range(count):
        picks = rng.integers(0, pool_size, size=order + 1)
        anchors = pool_arr[picks]
        if weight_mode == UNIT_WEIGHTS:
            w = np.ones(order + 1)
        else:
            w = 1.0 - rng.random(order + 1)  # lies in (0, 1]
        obs.append(observable(anchors, w))
    return ObservableSet(observables=tuple(obs), provenance=provenance)


def subset_expansion(anchors, space: FiniteMetricSpace | None = None) -> ObservableSet:
    """One unit-weight wedge per nonempty subset of up to 20 anchors."""
    arr = np.asarray(anchors)
    k = arr.shape[0] if arr.ndim == 2 else arr.size
    if not 1 <= k <= 20:
        raise ValueError(f"subset expansion supports 1..20 anchors, got {k}")
    if space is not None and arr.ndim == 1:
        if (np.asarray(arr, dtype=np.int64) >= space.size).any():
            raise ValueError("anchor indices out of range")
    obs = []
    for mask in range(1, 1 << k):
        picks = [i for i in range(k) if mask >> i & 1]
        obs.append(observable(arr[picks]))
    return ObservableSet(observables=tuple(obs), provenance={"strategy": "subset-expansion", "k": k})


def _sorted_balls(balls):
    parsed = []
    for pos, (center, radius) in enumerate(balls):
        r = float(radius)
        if not r > 0:
            raise ValueError(f"ball radius must be positive, got {r}")
        parsed.append((r, center, pos))
    index_centers = all(isinstance(c, (int, np.integer)) for _, c, _ in parsed)
    # Non-decreasing radii; ties resolved by center index (input position for
    # ambient centers), so the construction is a deterministic total order.
    if index_centers:
        parsed.sort(key=lambda t: (t[0], int(t[1])))
    else:
        parsed.sort(key=lambda t: (t[0], t[2]))
    radii = np.array([r for r, _, _ in parsed])
    centers = [c for _, c, _ in parsed]
    if index_centers:
        centers = np.array(centers, dtype=np.int64)
    else:
        centers = np.asarray(centers, dtype=float)
    return centers, radii


def union_ball_observable(balls, space: FiniteMetricSpace | None = None) -> tuple[Observable, float]:
    """Observable whose sublevel set below the returned threshold is the
    union of the given open balls ``(center, radius)``.

    Balls are sorted by non-decreasing radius r0 <= ... <= rn; the wedge
    weights are r0/ri and the threshold is r0.
    """
    centers, radii = _sorted_balls(balls)
    h = observable(centers, radii[0] / radii)
    return h, float(radii[0])


def union_ball_mass(mu: DiscreteMeasure, balls) -> float:
    """mu-mass of a union of open balls, read off one pushforward ray."""
    h, threshold = union_ball_observable(balls, mu.space)
    return pushforward(mu, h).mass_below(threshold)


def intersection_ball_mass(mu: DiscreteMeasure, balls) -> float:
    """mu-mass of an intersection of open balls by signed union masses.

    Expands over all nonempty sub-collections, so the ball count is capped
    at 12.
    """
    balls = list(balls)
    n = len(balls)
    if n > 12:
        raise ValueError(f"intersection mass supports at most 12 balls, got {n}")
    centers, radii = _sorted_balls(balls)
    terms = []
    for mask in range(1, 1 << n):
        picks = [i for i in range(n) if mask >> i & 1]
        sign = -1.0 if len(picks) % 2 == 0 else 1.0
        sub = [(centers[i], radii[i]) for i in picks]
        terms.append(sign * union_ball_mass(mu, sub))
    return math.fsum(terms)


def weighted_voronoi_cells(f: Observable, space: FiniteMetricSpace) -> np.ndarray:
    """Assign each point to the anchor attaining its weighted minimum.

    Ties go to the lowest anchor position; the cells partition the space.
    """
    if f.combinator != MIN:
        raise ValueError("Voronoi cells are defined for min-combinator observables")
    vals = f.weights[:, None] * anchor_distances(f, space)
    return np.argmin(vals, axis=0)
