"""Figure rendering for experiment tables and Voronoi cell reports.

Every experiment command writes its figures next to the CSV it produces;
figures are a view of the delimited data, never the primary output.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

plt.rcParams.update({
    "figure.dpi": 110,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.fontsize": 8,
})

_MARKERS = ("o", "s", "^", "d", "v", "*")


def save_figure(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def _mean_series(rows, metric, x_col, **filters):
    """Mean value per x over repetition rows matching the filters."""
    acc: dict = {}
    for row in rows:
        if row["metric"] != metric:
            continue
        if any(str(row.get(k, "")) != str(v) for k, v in filters.items()):
            continue
        x = float(row[x_col])
        acc.setdefault(x, []).append(float(row["value"]))
    xs = sorted(acc)
    return np.array(xs), np.array([np.mean(acc[x]) for x in xs])


def _distinct(rows, col, metric=None):
    seen = []
    for row in rows:
        if metric is not None and row["metric"] != metric:
            continue
        v = row.get(col, "")
        if v != "" and v not in seen:
            seen.append(v)
    return seen


def plot_gaussian_table(rows, path) -> Path:
    """Classification score vs projection count, one panel per dimension."""
    dims = sorted(_distinct(rows, "param_d"), key=float)
    fig, axes = plt.subplots(1, len(dims), figsize=(3.2 * len(dims), 2.8), squeeze=False)
    for ax, d in zip(axes[0], dims):
        for metric, label in (("ow_1nn_score", "observable"), ("sw_1nn_score", "max-sliced")):
            xs, ys = _mean_series(rows, metric, "param_n_proj", param_d=d)
            if len(xs):
                ax.plot(xs, ys, marker="o", label=label)
        ax.set_title(f"d = {d}")
        ax.set_xlabel("projections / anchors")
        ax.set_ylim(0, 1.05)
    axes[0][0].set_ylabel("1-NN score")
    axes[0][-1].legend()
    return save_figure(fig, path)


def plot_graph_table(rows, path) -> Path:
    """Classification score vs noise level, one panel per graph size."""
    sizes = sorted(_distinct(rows, "param_n"), key=float)
    pcts = sorted(_distinct(rows, "param_anchor_pct", metric="ow_1nn_score"), key=float)
    fig, axes = plt.subplots(1, len(sizes), figsize=(3.4 * len(sizes), 2.8), squeeze=False)
    for ax, n in zip(axes[0], sizes):
        xs, ys = _mean_series(rows, "w_1nn_score", "param_beta", param_n=n)
        if len(xs):
            ax.plot(xs, ys, marker="s", color="k", label="exact $w_1$")
        for mk, pct in zip(_MARKERS, pcts):
            xs, ys = _mean_series(rows, "ow_1nn_score", "param_beta", param_n=n, param_anchor_pct=pct)
            if len(xs):
                ax.plot(xs, ys, marker=mk, label=f"observable ({pct}% anchors)")
        ax.set_title(f"n = {n}")
        ax.set_xlabel("noise level")
        ax.set_ylim(0, 1.05)
    axes[0][0].set_ylabel("1-NN score")
    axes[0][-1].legend()
    return save_figure(fig, path)


def plot_sphere_table(rows, path) -> Path:
    """Mean relative error vs observable count, one line per wedge size."""
    nfs = sorted(_distinct(rows, "param_n_f", metric="relative_error"), key=float)
    fig, ax = plt.subplots(figsize=(4.2, 3.0))
    for mk, nf in zip(_MARKERS, nfs):
        xs, ys = _mean_series(rows, "relative_error", "param_n_o", param_n_f=nf)
        if len(xs):
            ax.plot(xs, ys, marker=mk, label=f"$n_f$ = {nf}")
    ax.set_xlabel("number of observables")
    ax.set_ylabel("mean relative error")
    ax.legend()
    return save_figure(fig, path)


def plot_experiment_table(experiment: str, rows, path) -> Path:
    if experiment == "gaussian":
        return plot_gaussian_table(rows, path)
    if experiment == "graph":
        return plot_graph_table(rows, path)
    if experiment == "sphere":
        return plot_sphere_table(rows, path)
    raise ValueError(f"no figure renderer for experiment {experiment!r}")


def plot_voronoi(space, assignment, values, path, grid=None, anchors_xy=None) -> Path:
    """Scatter of points colored by cell; with a grid, contour the observable."""
    fig, ax = plt.subplots(figsize=(4.0, 3.6))
    if grid is not None:
        gx, gy, gz = grid
        cs = ax.contour(gx, gy, gz, levels=12, linewidths=0.6, cmap="viridis")
        ax.clabel(cs, inline=True, fontsize=6)
    if space.coords is not None and space.coords.shape[1] >= 2:
        xy = space.coords[:, :2]
        ax.scatter(xy[:, 0], xy[:, 1], c=assignment, cmap="tab10", s=18)
    else:
        # No coordinates: show cell membership by index.
        ax.scatter(np.arange(space.size), assignment, c=assignment, cmap="tab10", s=18)
        ax.set_xlabel("point index")
        ax.set_ylabel("cell")
    if anchors_xy is not None:
        ax.scatter(anchors_xy[:, 0], anchors_xy[:, 1], marker="x", c="k", s=60)
    ax.set_title("weighted Voronoi cells")
    return save_figure(fig, path)
