"""Observable Wasserstein estimators, delta-covers, and measure quantization.

The estimator takes the (sup or power-mean) reduction of the 1D Wasserstein
distances between the pushforwards of two measures under a finite observable
family.  In sup mode it lower-bounds the exact Wasserstein distance because
every observable is 1-Lipschitz.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .metric import DiscreteMeasure, FiniteMetricSpace, make_measure
from .observables import ObservableSet, observable, pushforward, sample_anchored_set
from .ot import wasserstein_1d
from .parallel import parallel_map

SUP = "sup"
AVG = "avg"


@dataclass(frozen=True)
class OwdResult:
    """Outcome of one estimate: the reduced value plus per-observable detail."""

    value: float
    per_observable: np.ndarray
    argmax_observable: int | None
    mode: str
    p: float
    q: float | None = None

    def __post_init__(self):
        self.per_observable.setflags(write=False)

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "mode": self.mode,
            "p": self.p,
            "q": self.q,
            "per_observable": [float(v) for v in self.per_observable],
            "argmax_observable": self.argmax_observable,
        }


def owd_estimate(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    p: float,
    observables: ObservableSet,
    mode: str = SUP,
    q: float = 1.0,
    threads: int = 1,
) -> OwdResult:
    """Empirical observable Wasserstein distance over a sampled family.

    Per observable f the 1D distance w_p(f#mu, f#nu) is computed in closed
    form; the reduction is the maximum (``sup``) or the power mean of order
    ``q`` (``avg``).  Per-observable work is independent and can be threaded;
    the reduction is order-independent either way.
    """
    if mu.space is not nu.space:
        raise ValueError("measures must live on the same space")
    if mode not in (SUP, AVG):
        raise ValueError(f"mode must be 'sup' or 'avg', got {mode!r}")
    if mode == AVG and q < 1:
        raise ValueError(f"power-mean order q must be >= 1, got {q}")

    def one(f):
        return wasserstein_1d(pushforward(mu, f), pushforward(nu, f), p)

    per = np.array(parallel_map(one, observables, threads=threads))
    if mode == SUP:
        arg = int(np.argmax(per))
        return OwdResult(value=float(per[arg]), per_observable=per, argmax_observable=arg, mode=SUP, p=p)
    value = float(np.mean(per**q) ** (1.0 / q))
    return OwdResult(value=value, per_observable=per, argmax_observable=None, mode=AVG, p=p, q=q)


GREEDY = "greedy"
FARTHEST_POINT = "farthest-point"


@dataclass(frozen=True)
class DeltaCover:
    """Anchor set whose open delta-balls cover the space.

    Anchor indices are stored sorted ascending, so nearest-anchor ties in
    quantization resolve to the lowest point index.
    """

    space: FiniteMetricSpace
    delta: float
    anchor_indices: np.ndarray
    kind: str

    def __post_init__(self):
        self.anchor_indices.setflags(write=False)


def _finish_cover(space: FiniteMetricSpace, delta: float, anchors: list[int], kind: str) -> DeltaCover:
    idx = np.sort(np.asarray(anchors, dtype=np.int64))
    nearest = space.dmat[idx].min(axis=0)
    if (nearest >= delta).any():
        raise ContractError("anchor set fails to delta-cover the space")
    return DeltaCover(space=space, delta=float(delta), anchor_indices=idx, kind=kind)


def greedy_delta_cover(space: FiniteMetricSpace, delta: float) -> DeltaCover:
    """Single greedy pass in index order: keep a point iff no kept anchor is
    within delta of it.  Anchors end up pairwise >= delta apart.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    anchors: list[int] = []
    nearest = np.full(space.size, np.inf)
    for i in range(space.size):
        if nearest[i] >= delta:
            anchors.append(i)
            nearest = np.minimum(nearest, space.dmat[i])
    return _finish_cover(space, delta, anchors, GREEDY)


def farthest_point_cover(space: FiniteMetricSpace, delta: float, start: int = 0) -> DeltaCover:
    """Farthest-point anchor insertion until every point is within delta."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    anchors = [int(start)]
    nearest = space.dmat[start].copy()
    while nearest.max() >= delta:
        j = int(np.argmax(nearest))
        anchors.append(j)
        nearest = np.minimum(nearest, space.dmat[j])
    return _finish_cover(space, delta, anchors, FARTHEST_POINT)


def quantize_measure(mu: DiscreteMeasure, cover: DeltaCover) -> DiscreteMeasure:
    """Snap every atom's mass to its nearest cover anchor.

    Each atom moves strictly less than delta, so w_p(mu, quantized) < delta
    for all p >= 1.
    """
    if cover.space is not mu.space:
        raise ValueError("cover and measure must share a space")
    sub = mu.space.dmat[np.ix_(mu.indices, cover.anchor_indices)]
    nearest = np.argmin(sub, axis=1)
    return make_measure(mu.space, cover.anchor_indices[nearest], mu.weights)


def quantized_distance_error(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    p: float,
    cover: DeltaCover,
    observables: ObservableSet,
    threads: int = 1,
) -> tuple[float, float]:
    """Anchored estimate before and after quantizing both measures.

    Returns ``(dhat, d)`` where d uses (mu, nu) and dhat their snapped
    versions; the two differ by at most 2*delta.
    """
    d = owd_estimate(mu, nu, p, observables, mode=SUP, threads=threads).value
    mu_hat = quantize_measure(mu, cover)
    nu_hat = quantize_measure(nu, cover)
    dhat = owd_estimate(mu_hat, nu_hat, p, observables, mode=SUP, threads=threads).value
    return dhat, d


def nested_anchored_sets(
    space: FiniteMetricSpace,
    pool,
    orders: list[int],
    count: int,
    seed: int | None = None,
    weight_mode: str = "unit",
) -> list[ObservableSet]:
    """Cumulative observable sets of increasing wedge order sharing anchors.

    For each of ``count`` draws, one anchor tuple of length max(orders)+1 is
    sampled; set k contains, for every draw, the wedges over the first
    order+1 anchors for all orders up to orders[k].  The returned sets are
    nested, so sup estimates over them are monotone.
    """
    orders = sorted(orders)
    base = sample_anchored_set(space, pool, orders[-1], count, weight_mode=weight_mode, seed=seed)
    sets = []
    members: list = []
    for order in orders:
        for f in base:
            anchors = (
                f.anchor_indices[: order + 1]
                if f.anchor_indices is not None
                else f.anchor_coords[: order + 1]
            )
            members.append(observable(anchors, f.weights[: order + 1], f.combinator))
        sets.append(
            ObservableSet(
                observables=tuple(members),
                provenance={
                    "strategy": "nested",
                    "seed": seed,
                    "orders": orders[: len(sets) + 1],
                    "count": count,
                },
            )
        )
    return sets
