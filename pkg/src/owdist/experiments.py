"""Seeded synthetic studies: Gaussian-class clouds, heat distributions on
random geometric graphs, and uniform sphere samples, plus the scoring
utilities (nearest-neighbor rates, relative error) used to compare metrics.

Every generator is deterministic given its seed; experiment repetitions use
derived seeds so runs are reproducible row by row.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import cdist

from .errors import ContractError
from .metric import DiscreteMeasure, FiniteMetricSpace, build_graph_space, build_sphere_space, make_measure, uniform_measure
from .observables import ObservableSet, subset_expansion
from .ot import exact_wasserstein, line_measure, wasserstein_1d
from .owd import owd_estimate
from .parallel import parallel_map

REGIONS = ("top-left", "middle", "bottom-right")
_REGION_CELLS = {"top-left": (0, 0), "middle": (1, 1), "bottom-right": (2, 2)}


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

@dataclass
class LabeledDataset:
    """Samples (point cloud or measure) with class labels and the full
    parameter record that generated them."""

    samples: list
    generator_config: dict

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def labels(self) -> np.ndarray:
        return np.array([lbl for _, lbl in self.samples])


def _class_cov_diag(d: int, cls: int) -> np.ndarray:
    diag = np.ones(d)
    if cls == 1:
        diag[0] = 3.0
    elif cls == 2:
        diag[-1] = 3.0
    return diag


def gaussian_dataset(d: int, samples_per_class: int, points_per_sample: int, seed) -> LabeledDataset:
    """Three centered Gaussian classes told apart by their covariance:
    identity, diag(3,1,...,1) and diag(1,...,1,3)."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    rng = np.random.default_rng(seed)
    samples = []
    for cls in range(3):
        scale = np.sqrt(_class_cov_diag(d, cls))
        for _ in range(samples_per_class):
            cloud = rng.standard_normal((points_per_sample, d)) * scale
            samples.append((cloud, cls))
    config = {
        "generator": "gaussian",
        "d": d,
        "samples_per_class": samples_per_class,
        "points_per_sample": points_per_sample,
        "seed": _seed_json(seed),
    }
    return LabeledDataset(samples=samples, generator_config=config)


@dataclass(frozen=True)
class GeometricGraph:
    """A connected random geometric graph with its shortest-path space,
    node positions, and the Laplacian eigendecomposition used for heat flow."""

    space: FiniteMetricSpace
    positions: np.ndarray
    edges: np.ndarray
    radius: float
    laplacian_evals: np.ndarray
    laplacian_evecs: np.ndarray

    def __post_init__(self):
        for arr in (self.positions, self.edges, self.laplacian_evals, self.laplacian_evecs):
            arr.setflags(write=False)

    @property
    def size(self) -> int:
        return self.space.size


def _grid_cell(positions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """3x3 grid cell of each position; row 0 is the top of the unit square."""
    col = np.minimum((positions[:, 0] * 3).astype(int), 2)
    row = np.minimum(((1.0 - positions[:, 1]) * 3).astype(int), 2)
    return row, col


def region_nodes(positions: np.ndarray, region: str) -> np.ndarray:
    if region not in _REGION_CELLS:
        raise ValueError(f"unknown region {region!r}; expected one of {REGIONS}")
    row, col = _grid_cell(positions)
    want_r, want_c = _REGION_CELLS[region]
    return np.nonzero((row == want_r) & (col == want_c))[0]


def random_geometric_graph(n: int, seed, required_regions=None, max_attempts: int = 1000) -> GeometricGraph:
    """n nodes uniform in the unit square, edges below radius sqrt(log(n)/n).

    Disconnected draws (and draws leaving a required region empty) are
    rejected and resampled; after ``max_attempts`` consecutive rejections an
    error is raised.
    """
    if n < 2:
        raise ValueError("need at least two nodes")
    radius = math.sqrt(math.log(n) / n)
    rng = np.random.default_rng(seed)
    for _ in range(max_attempts):
        pos = rng.random((n, 2))
        dists = cdist(pos, pos)
        iu, ju = np.triu_indices(n, k=1)
        keep = dists[iu, ju] < radius
        edges = np.column_stack([iu[keep], ju[keep]])
        adj = csr_matrix((np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(n, n))
        ncomp, _ = connected_components(adj, directed=False)
        if ncomp != 1:
            continue
        if required_regions and any(len(region_nodes(pos, r)) == 0 for r in required_regions):
            continue
        space = build_graph_space(n, [(int(i), int(j), 1.0) for i, j in edges])
        deg = np.zeros(n)
        lap = np.zeros((n, n))
        for i, j in edges:
            lap[i, j] = lap[j, i] = -1.0
            deg[i] += 1
            deg[j] += 1
        lap[np.diag_indices(n)] = deg
        evals, evecs = np.linalg.eigh(lap)
        return GeometricGraph(
            space=space,
            positions=pos,
            edges=edges,
            radius=radius,
            laplacian_evals=evals,
            laplacian_evecs=evecs,
        )
    raise ContractError(f"no admissible geometric graph in {max_attempts} attempts (n={n})")


@dataclass(frozen=True)
class HeatDistribution:
    """Heat diffused from one node, perturbed by uniform noise, clamped and
    renormalized into a probability vector over the graph nodes."""

    graph: GeometricGraph
    source: int
    t: float
    beta: float
    values: np.ndarray

    def __post_init__(self):
        self.values.setflags(write=False)

    def to_measure(self) -> DiscreteMeasure:
        return make_measure(self.graph.space, np.arange(len(self.values)), self.values)


def heat_distribution(graph: GeometricGraph, region: str, beta: float, seed, t: float | None = None) -> HeatDistribution:
    """Pick a source node in the region, diffuse for time t (default 0.1*n)
    through exp(-tL), add uniform noise scaled by beta times the peak, clamp
    negatives and renormalize."""
    if beta < 0:
        raise ValueError("noise level must be >= 0")
    nodes = region_nodes(graph.positions, region)
    if len(nodes) == 0:
        raise ContractError(f"region {region!r} contains no nodes")
    n = graph.size
    if t is None:
        t = 0.1 * n
    rng = np.random.default_rng(seed)
    source = int(nodes[rng.integers(0, len(nodes))])
    decay = np.exp(-t * graph.laplacian_evals)
    heat = graph.laplacian_evecs @ (decay * graph.laplacian_evecs[source])
    peak = heat.max()
    values = heat + (rng.uniform(-beta * peak, beta * peak, size=n) if beta > 0 else 0.0)
    values = np.clip(values, 0.0, None)
    total = values.sum()
    if total <= 0:
        raise ContractError("noise wiped out the entire heat vector")
    return HeatDistribution(graph=graph, source=source, t=float(t), beta=float(beta), values=values / total)


def sphere_pair(d: int, m: int, seed) -> tuple[DiscreteMeasure, DiscreteMeasure]:
    """Two independent uniform m-point samples of the d-sphere, embedded in
    one shared 2m-point space so exact OT and estimates use one metric."""
    if d < 1 or m < 1:
        raise ValueError("need d >= 1 and m >= 1")
    rng = np.random.default_rng(seed)
    vecs = rng.standard_normal((2 * m, d + 1))
    vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
    space = build_sphere_space(vecs)
    return uniform_measure(space, np.arange(m)), uniform_measure(space, np.arange(m, 2 * m))


def add_cloud_noise(cloud, eta: float, sigma: float, seed) -> np.ndarray:
    """Append floor(eta * |cloud|) Gaussian outlier points of scale sigma."""
    pts = np.atleast_2d(np.asarray(cloud, dtype=float))
    if eta < 0:
        raise ValueError("eta must be >= 0")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    extra = int(eta * pts.shape[0])
    if extra == 0:
        return pts.copy()
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((extra, pts.shape[1])) * sigma
    return np.vstack([pts, noise])


# ---------------------------------------------------------------------------
# Scoring
# ---------------------------------------------------------------------------

def relative_error(w_exact: float, owd_est: float) -> float:
    """(W - estimate) / W; nonnegative whenever the estimate is a valid
    lower bound."""
    if w_exact <= 0:
        if owd_est > 0:
            raise ContractError(
                f"estimate {owd_est} exceeds exact distance {w_exact}: lower bound violated"
            )
        raise ValueError("relative error needs w_exact > 0")
    return (w_exact - owd_est) / w_exact


def _majority_vote(ordered_labels) -> object:
    counts: dict = {}
    for lbl in ordered_labels:
        counts[lbl] = counts.get(lbl, 0) + 1
    best = max(counts.values())
    tied = {lbl for lbl, c in counts.items() if c == best}
    for lbl in ordered_labels:  # ties resolved by the nearer neighbor
        if lbl in tied:
            return lbl
    raise AssertionError("unreachable")


def nn_classification_score(distance_matrix, labels, k: int = 1, train_indices=None) -> float:
    """k-nearest-neighbor classification rate.

    Without ``train_indices`` this is the leave-one-out rate: each sample is
    classified by majority label among its k nearest other samples.  With
    ``train_indices`` the remaining samples are scored against the training
    columns only.  Distance ties resolve to the lower index; vote ties to
    the nearer neighbor.
    """
    dmat = np.asarray(distance_matrix, dtype=float)
    labels = np.asarray(labels)
    n = len(labels)
    if dmat.shape != (n, n):
        raise ValueError("distance matrix shape does not match labels")
    if np.abs(dmat - dmat.T).max(initial=0.0) > 1e-9:
        raise ValueError("distance matrix is not symmetric")
    if k < 1:
        raise ValueError("k must be >= 1")
    if train_indices is None:
        if n < k + 1:
            raise ValueError(f"need at least {k + 1} samples for leave-one-out {k}-NN")
        correct = 0
        for i in range(n):
            row = dmat[i].copy()
            row[i] = np.inf
            order = np.argsort(row, kind="stable")[:k]
            if _majority_vote(labels[order]) == labels[i]:
                correct += 1
        return correct / n
    train = np.asarray(train_indices, dtype=int)
    if len(train) < k:
        raise ValueError(f"need at least {k} training samples")
    test = np.setdiff1d(np.arange(n), train)
    if len(test) == 0:
        raise ValueError("no test samples left")
    correct = 0
    for i in test:
        order = train[np.argsort(dmat[i, train], kind="stable")[:k]]
        if _majority_vote(labels[order]) == labels[i]:
            correct += 1
    return correct / len(test)


# ---------------------------------------------------------------------------
# Pairwise distance matrices (cached pushforwards, shared 1D core)
# ---------------------------------------------------------------------------

def pairwise_matrix(count: int, fn, threads: int = 1) -> np.ndarray:
    """Symmetric matrix from a function of index pairs (i < j)."""
    pairs = [(i, j) for i in range(count) for j in range(i + 1, count)]
    vals = parallel_map(lambda ij: fn(ij[0], ij[1]), pairs, threads=threads)
    out = np.zeros((count, count))
    for (i, j), v in zip(pairs, vals):
        out[i, j] = out[j, i] = v
    return out


def ow_cloud_matrix(clouds, anchor_coords, p: float = 1.0, threads: int = 1) -> np.ndarray:
    """Sup-mode observable distance matrix between uniform cloud measures,
    using distance-to-anchor observables at ambient anchor points."""
    anchors = np.atleast_2d(np.asarray(anchor_coords, dtype=float))
    cached = [
        [line_measure(np.linalg.norm(np.asarray(c) - a, axis=1)) for a in anchors]
        for c in clouds
    ]

    def pair(i, j):
        return max(wasserstein_1d(pi, pj, p) for pi, pj in zip(cached[i], cached[j]))

    return pairwise_matrix(len(clouds), pair, threads=threads)


def maxsliced_cloud_matrix(clouds, directions, p: float = 1.0, threads: int = 1) -> np.ndarray:
    """Max-sliced distance matrix between uniform cloud measures."""
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    cached = [[line_measure(np.asarray(c) @ th) for th in dirs] for c in clouds]

    def pair(i, j):
        return max(wasserstein_1d(pi, pj, p) for pi, pj in zip(cached[i], cached[j]))

    return pairwise_matrix(len(clouds), pair, threads=threads)


def ow_measure_matrix(measures, anchor_indices, p: float = 1.0, threads: int = 1) -> np.ndarray:
    """Sup-mode observable distance matrix between measures on one space,
    anchored at the given point indices (order-0 observables)."""
    space = measures[0].space
    anchors = np.asarray(anchor_indices, dtype=np.int64)
    cached = [
        [line_measure(space.dmat[a, m.indices], m.weights) for a in anchors]
        for m in measures
    ]

    def pair(i, j):
        return max(wasserstein_1d(pi, pj, p) for pi, pj in zip(cached[i], cached[j]))

    return pairwise_matrix(len(measures), pair, threads=threads)


def exact_matrix(space, measures, p: float = 1.0, threads: int = 1, atom_limit: int = 2000) -> np.ndarray:
    """Exact Wasserstein distance matrix (the expensive ground-truth path)."""
    def pair(i, j):
        return exact_wasserstein(space, measures[i], measures[j], p, atom_limit=atom_limit)[0]

    return pairwise_matrix(len(measures), pair, threads=threads)


# ---------------------------------------------------------------------------
# Result tables
# ---------------------------------------------------------------------------

@dataclass
class ResultTable:
    """Flat experiment results: one row per (repetition, parameters, metric)."""

    experiment: str
    param_names: list[str]
    rows: list[dict] = field(default_factory=list)

    @property
    def columns(self) -> list[str]:
        return ["experiment", "seed"] + [f"param_{p}" for p in self.param_names] + ["metric", "value", "runtime_ms"]

    def add(self, seed, params: dict, metric: str, value, runtime_ms: float):
        row = {"experiment": self.experiment, "seed": seed}
        for name in self.param_names:
            row[f"param_{name}"] = params.get(name, "")
        row["metric"] = metric
        row["value"] = value
        row["runtime_ms"] = runtime_ms
        self.rows.append(row)

    def values(self, metric: str, **params) -> list[float]:
        out = []
        for row in self.rows:
            if row["metric"] != metric:
                continue
            if all(str(row.get(f"param_{k}", "")) == str(v) for k, v in params.items()):
                out.append(float(row["value"]))
        return out

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.columns)
            for row in self.rows:
                writer.writerow([_format_cell(row[c]) for c in self.columns])


def _format_cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def read_rows_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def summarize_rows(rows: list[dict]) -> list[dict]:
    """Mean value over repetitions, grouped by every parameter except the
    repetition index."""
    groups: dict = {}
    order: list = []
    for row in rows:
        key_cols = [c for c in row.keys() if c.startswith("param_") and c != "param_rep"]
        key = (row["experiment"], tuple((c, row[c]) for c in key_cols), row["metric"])
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(float(row["value"]))
    out = []
    for key in order:
        experiment, params, metric = key
        rec = {"experiment": experiment}
        rec.update(dict(params))
        rec["metric"] = metric
        vals = groups[key]
        rec["mean_value"] = repr(sum(vals) / len(vals))
        rec["n"] = str(len(vals))
        out.append(rec)
    return out


def write_summary_csv(summary: list[dict], path):
    if not summary:
        raise ValueError("nothing to summarize")
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(summary[0].keys()))
        writer.writeheader()
        writer.writerows(summary)


def _seed_json(seed):
    if isinstance(seed, (list, tuple, np.ndarray)):
        return [int(s) for s in seed]
    return None if seed is None else int(seed)


# ---------------------------------------------------------------------------
# Experiment runners
# ---------------------------------------------------------------------------

@dataclass
class GaussianConfig:
    dims: tuple = (2, 5, 10)
    points_per_sample: int = 100
    samples_per_class: int = 5
    anchor_counts: tuple = (10, 20)
    slice_counts: tuple = (10, 20)
    anchor_cov: float = 5.0
    anchor_resamples: int = 1
    p: float = 1.0
    repeats: int = 3
    seed: int = 0
    threads: int = 1

    def to_dict(self) -> dict:
        return asdict(self) | {"experiment": "gaussian"}


def run_gaussian_experiment(cfg: GaussianConfig) -> ResultTable:
    """Classify Gaussian-covariance clouds by 1-NN under observable and
    max-sliced distances; one score row per (d, count, method, repetition)."""
    table = ResultTable("gaussian", ["rep", "d", "n_proj"])
    for d in cfg.dims:
        for rep in range(cfg.repeats):
            dataset = gaussian_dataset(
                d, cfg.samples_per_class, cfg.points_per_sample, seed=[cfg.seed, d, rep, 0]
            )
            clouds = [c for c, _ in dataset.samples]
            labels = dataset.labels
            for count in cfg.anchor_counts:
                t0 = time.perf_counter()
                scores = []
                for resample in range(cfg.anchor_resamples):
                    rng = np.random.default_rng([cfg.seed, d, rep, 1, count, resample])
                    anchors = rng.standard_normal((count, d)) * math.sqrt(cfg.anchor_cov)
                    dmat = ow_cloud_matrix(clouds, anchors, p=cfg.p, threads=cfg.threads)
                    scores.append(nn_classification_score(dmat, labels, k=1))
                ms = (time.perf_counter() - t0) * 1000
                table.add(cfg.seed, {"rep": rep, "d": d, "n_proj": count},
                          "ow_1nn_score", float(np.mean(scores)), ms)
            for count in cfg.slice_counts:
                t0 = time.perf_counter()
                scores = []
                for resample in range(cfg.anchor_resamples):
                    rng = np.random.default_rng([cfg.seed, d, rep, 2, count, resample])
                    dirs = rng.standard_normal((count, d))
                    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
                    dmat = maxsliced_cloud_matrix(clouds, dirs, p=cfg.p, threads=cfg.threads)
                    scores.append(nn_classification_score(dmat, labels, k=1))
                ms = (time.perf_counter() - t0) * 1000
                table.add(cfg.seed, {"rep": rep, "d": d, "n_proj": count},
                          "sw_1nn_score", float(np.mean(scores)), ms)
    return table


@dataclass
class GraphConfig:
    nodes: tuple = (300,)
    betas: tuple = (0.5, 1.5)
    per_class: int = 5
    anchor_pcts: tuple = (10.0,)
    p: float = 1.0
    repeats: int = 3
    seed: int = 0
    threads: int = 1
    atom_limit: int = 2000

    def to_dict(self) -> dict:
        return asdict(self) | {"experiment": "graph"}


def run_graph_experiment(cfg: GraphConfig) -> ResultTable:
    """Classify heat distributions on a random geometric graph by 1-NN under
    exact Wasserstein and anchored observable distances.

    Besides the scores, audit rows record the heat-vector validity and the
    worst observable-vs-exact excess (which must stay within solver noise
    for the lower bound to hold).
    """
    table = ResultTable("graph", ["rep", "n", "beta", "anchor_pct"])
    for n in cfg.nodes:
        for rep in range(cfg.repeats):
            graph = random_geometric_graph(n, seed=[cfg.seed, n, rep, 0], required_regions=REGIONS)
            for bi, beta in enumerate(cfg.betas):
                heats = [
                    heat_distribution(graph, region, beta, seed=[cfg.seed, n, rep, 1, bi, ci, s])
                    for ci, region in enumerate(REGIONS)
                    for s in range(cfg.per_class)
                ]
                labels = np.repeat(np.arange(3), cfg.per_class)
                measures = [h.to_measure() for h in heats]
                params = {"rep": rep, "n": n, "beta": beta}

                sum_err = max(abs(h.values.sum() - 1.0) for h in heats)
                min_val = min(h.values.min() for h in heats)
                table.add(cfg.seed, params, "heat_sum_abs_err", float(sum_err), 0.0)
                table.add(cfg.seed, params, "heat_min_value", float(min_val), 0.0)

                t0 = time.perf_counter()
                w_mat = exact_matrix(graph.space, measures, p=cfg.p,
                                     threads=cfg.threads, atom_limit=cfg.atom_limit)
                w_ms = (time.perf_counter() - t0) * 1000
                table.add(cfg.seed, params, "w_1nn_score",
                          nn_classification_score(w_mat, labels, k=1), w_ms)

                for pi, pct in enumerate(cfg.anchor_pcts):
                    t0 = time.perf_counter()
                    rng = np.random.default_rng([cfg.seed, n, rep, 2, bi, pi])
                    n_anchor = max(1, round(n * pct / 100.0))
                    anchors = np.sort(rng.choice(n, size=n_anchor, replace=False))
                    ow_mat = ow_measure_matrix(measures, anchors, p=cfg.p, threads=cfg.threads)
                    ow_ms = (time.perf_counter() - t0) * 1000
                    pp = params | {"anchor_pct": pct}
                    table.add(cfg.seed, pp, "ow_1nn_score",
                              nn_classification_score(ow_mat, labels, k=1), ow_ms)
                    iu = np.triu_indices(len(measures), k=1)
                    excess = float((ow_mat[iu] - w_mat[iu]).max())
                    table.add(cfg.seed, pp, "max_lower_bound_excess", excess, 0.0)
    return table


@dataclass
class SphereConfig:
    dim: int = 3
    m: int = 100
    nf_values: tuple = (1, 3)
    no_values: tuple = (10, 40, 160)
    pool_size: int = 250
    p: float = 1.0
    repeats: int = 10
    seed: int = 0
    threads: int = 1

    def to_dict(self) -> dict:
        return asdict(self) | {"experiment": "sphere"}


def run_sphere_experiment(cfg: SphereConfig) -> ResultTable:
    """Relative error of observable estimates against exact Wasserstein
    between uniform sphere samples, across wedge size and observable count.

    For a fixed repetition and wedge size the anchor collections for smaller
    observable counts are prefixes of those for larger counts, so estimates
    are monotone in the count by construction.
    """
    table = ResultTable("sphere", ["rep", "d", "m", "n_f", "n_o"])
    no_sorted = sorted(cfg.no_values)
    no_max = no_sorted[-1]
    for rep in range(cfg.repeats):
        mu, nu = sphere_pair(cfg.dim, cfg.m, seed=[cfg.seed, rep, 0])
        space = mu.space
        pool_rng = np.random.default_rng([cfg.seed, rep, 1])
        pool = pool_rng.standard_normal((cfg.pool_size, cfg.dim + 1))
        pool /= np.linalg.norm(pool, axis=1, keepdims=True)
        base = {"rep": rep, "d": cfg.dim, "m": cfg.m}

        t0 = time.perf_counter()
        w_exact = exact_wasserstein(space, mu, nu, cfg.p)[0]
        w_ms = (time.perf_counter() - t0) * 1000
        table.add(cfg.seed, base, "w_exact", w_exact, w_ms)

        for nf in cfg.nf_values:
            rng = np.random.default_rng([cfg.seed, rep, 2, nf])
            picks = rng.integers(0, cfg.pool_size, size=(no_max, nf))
            expansions = [subset_expansion(pool[row]) for row in picks]
            block = (1 << nf) - 1
            full = ObservableSet(
                observables=tuple(f for e in expansions for f in e),
                provenance={"strategy": "sphere-experiment", "n_f": nf, "n_o": no_max},
            )
            t0 = time.perf_counter()
            result = owd_estimate(mu, nu, cfg.p, full, threads=cfg.threads)
            est_ms = (time.perf_counter() - t0) * 1000
            for no in no_sorted:
                est = float(result.per_observable[: no * block].max())
                pp = base | {"n_f": nf, "n_o": no}
                table.add(cfg.seed, pp, "ow_estimate", est, est_ms * no / no_max)
                table.add(cfg.seed, pp, "relative_error", relative_error(w_exact, est), 0.0)
    return table
