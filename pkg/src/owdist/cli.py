"""Command-line front end.

Subcommands compute distances between stored inputs, run the seeded
experiments, and replot their reports.  Every run echoes its fully resolved
configuration to ``<out>.config.json``; feeding that file back through
``--config`` reproduces the run (flags still win over the file).

Exit codes: 2 for malformed input files or flags, 3 for violated numeric
contracts (e.g. measure weights, exact-solver atom limit).
"""

from __future__ import annotations

import functools
import json
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from .baselines import chamfer, sample_slices, sliced_wasserstein
from .errors import ContractError, InputFormatError
from .experiments import (
    GaussianConfig,
    GraphConfig,
    SphereConfig,
    read_rows_csv,
    run_gaussian_experiment,
    run_graph_experiment,
    run_sphere_experiment,
    summarize_rows,
    write_summary_csv,
)
from .fileio import (
    load_measure_json,
    load_observable_set,
    load_space,
    write_config_echo,
)
from .observables import (
    eval_observable_at_coords,
    eval_observable_many,
    observable,
    sample_anchored_set,
    weighted_voronoi_cells,
)
from .ot import exact_wasserstein
from .owd import owd_estimate
from .parallel import default_threads


def _fail_codes(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except InputFormatError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except ContractError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)
        except ValueError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)

    return wrapper


def _int_list(_ctx, _param, value):
    if value is None:
        return None
    try:
        return tuple(int(v) for v in str(value).split(","))
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}")


def _float_list(_ctx, _param, value):
    if value is None:
        return None
    try:
        return tuple(float(v) for v in str(value).split(","))
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {value!r}")


def _load_config_file(path):
    if path is None:
        return {}
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputFormatError(f"{path}: {exc}")


def _resolve(ctx, config: dict, names) -> dict:
    """Per parameter: explicit flag wins, then the config file, then default."""
    from click.core import ParameterSource

    out = {}
    for name in names:
        src = ctx.get_parameter_source(name)
        if src == ParameterSource.COMMANDLINE or name not in config:
            out[name] = ctx.params[name]
        else:
            value = config[name]
            out[name] = tuple(value) if isinstance(value, list) else value
    return out


def _jsonable(obj):
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def _echo_config(out, record: dict):
    write_config_echo(out, {k: _jsonable(v) for k, v in record.items()})


def _resolve_threads(threads):
    return default_threads() if threads is None else max(1, int(threads))


@click.group()
@click.version_option(version=__version__, prog_name="owdist")
def main():
    """Observable Wasserstein distances and experiment harness."""


@main.command()
@click.argument("space_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("measure_a", type=click.Path(exists=True, dir_okay=False))
@click.argument("measure_b", type=click.Path(exists=True, dir_okay=False))
@click.option("--space-kind", type=click.Choice(["auto", "cloud", "graph", "sphere"]), default="auto")
@click.option("--p", type=float, default=1.0, show_default=True, help="Wasserstein order.")
@click.option("--mode", type=click.Choice(["sup", "avg"]), default="sup", show_default=True)
@click.option("--avg-q", type=float, default=1.0, show_default=True, help="Power-mean order for avg mode.")
@click.option("--observables", "observables_spec", callback=_int_list, default=None,
              help="ORDER,COUNT,SEED: sample anchored observables from the space points.")
@click.option("--observable-file", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--exact", is_flag=True, help="Also solve the exact transport problem.")
@click.option("--atom-limit", type=int, default=2000, show_default=True)
@click.option("--sliced", "sliced_spec", callback=_int_list, default=None,
              help="COUNT[,SEED]: also compute sliced/max-sliced distances (Euclidean only).")
@click.option("--chamfer", "with_chamfer", is_flag=True, help="Also compute Chamfer distance of the supports.")
@click.option("--plan-out", type=click.Path(dir_okay=False), default=None,
              help="Write the exact transport plan as JSON.")
@click.option("--threads", type=int, default=None, help="Worker threads (default: cores or OWDIST_THREADS).")
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Report path (default: stdout).")
@click.pass_context
@_fail_codes
def compute(ctx, space_file, measure_a, measure_b, **_kw):
    """Distances between two stored measures on a stored space."""
    cfg = _resolve(ctx, _load_config_file(ctx.params["config_file"]), [
        "space_kind", "p", "mode", "avg_q", "observables_spec", "observable_file",
        "exact", "atom_limit", "sliced_spec", "with_chamfer", "plan_out", "threads", "out",
    ])
    threads = _resolve_threads(cfg["threads"])
    space = load_space(space_file, cfg["space_kind"])
    mu = load_measure_json(measure_a, space)
    nu = load_measure_json(measure_b, space)

    results: dict = {}
    timings: dict = {}

    obs_set = None
    if cfg["observable_file"] is not None:
        obs_set = load_observable_set(cfg["observable_file"])
    elif cfg["observables_spec"] is not None:
        spec = cfg["observables_spec"]
        if len(spec) != 3:
            raise ValueError("--observables expects ORDER,COUNT,SEED")
        order, count, seed = spec
        obs_set = sample_anchored_set(space, np.arange(space.size), order, count, seed=seed)
    if obs_set is not None:
        t0 = time.perf_counter()
        est = owd_estimate(mu, nu, cfg["p"], obs_set, mode=cfg["mode"], q=cfg["avg_q"], threads=threads)
        timings["owd"] = (time.perf_counter() - t0) * 1000
        results["owd"] = est.to_json()

    if cfg["exact"]:
        t0 = time.perf_counter()
        value, plan = exact_wasserstein(space, mu, nu, cfg["p"], atom_limit=cfg["atom_limit"])
        timings["exact"] = (time.perf_counter() - t0) * 1000
        results["exact"] = {"value": value, "plan_entries": len(plan)}
        if cfg["plan_out"]:
            Path(cfg["plan_out"]).write_text(json.dumps(plan.to_json()))

    if cfg["sliced_spec"] is not None:
        spec = cfg["sliced_spec"]
        count = spec[0]
        seed = spec[1] if len(spec) > 1 else 0
        slices = sample_slices(space.coords.shape[1] if space.coords is not None else 0, count, seed)
        t0 = time.perf_counter()
        mean_v = sliced_wasserstein(mu, nu, cfg["p"], slices, mode="mean", threads=threads)
        max_v = sliced_wasserstein(mu, nu, cfg["p"], slices, mode="max", threads=threads)
        timings["sliced"] = (time.perf_counter() - t0) * 1000
        results["sliced"] = {"mean": mean_v, "max": max_v, "count": count, "seed": seed}

    if cfg["with_chamfer"]:
        if space.coords is None:
            raise ValueError("chamfer needs a space with coordinates")
        t0 = time.perf_counter()
        value = chamfer(space.coords[mu.indices], space.coords[nu.indices])
        timings["chamfer"] = (time.perf_counter() - t0) * 1000
        results["chamfer"] = {"value": value}

    if not results:
        raise ValueError("nothing to compute: pass --observables/--observable-file, --exact, --sliced or --chamfer")

    record = {
        "command": "compute", "space_file": str(space_file),
        "measure_a": str(measure_a), "measure_b": str(measure_b),
    } | {k: _jsonable(v) for k, v in cfg.items() if k != "out"} | {"threads": threads}
    report = {"config": record, "results": results, "timings_ms": timings}
    text = json.dumps(report, indent=2)
    if cfg["out"]:
        Path(cfg["out"]).write_text(text + "\n")
        _echo_config(cfg["out"], record)
    else:
        click.echo(text)


def _experiment_epilogue(table, out, record, plot):
    table.write_csv(out)
    _echo_config(out, record)
    if plot:
        from .plotting import plot_experiment_table

        fig_path = Path(out).with_suffix(".png")
        plot_experiment_table(table.experiment, table.rows, fig_path)
        click.echo(f"wrote {out}, {fig_path}", err=True)
    else:
        click.echo(f"wrote {out}", err=True)


_SEED = click.option("--seed", type=int, required=True, help="Base seed; experiment commands never default it.")
_THREADS = click.option("--threads", type=int, default=None,
                        help="Worker threads (default: cores or OWDIST_THREADS).")
_CONFIG = click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False), default=None,
                       help="Echoed config JSON to resolve unset flags from.")
_PLOT = click.option("--plot/--no-plot", default=True, show_default=True,
                     help="Render the report figure next to the CSV.")


@main.command("gaussian-exp")
@click.option("--dims", callback=_int_list, default="2,5,10", show_default=True)
@click.option("--points", "points_per_sample", type=int, default=100, show_default=True)
@click.option("--samples-per-class", type=int, default=5, show_default=True)
@click.option("--anchor-counts", callback=_int_list, default="10,20", show_default=True)
@click.option("--slice-counts", callback=_int_list, default="10,20", show_default=True)
@click.option("--anchor-cov", type=float, default=5.0, show_default=True,
              help="Covariance scale of the anchor-sampling Gaussian.")
@click.option("--anchor-resamples", type=int, default=1, show_default=True,
              help="Anchor/slice redraws averaged per score.")
@click.option("--p", type=float, default=1.0, show_default=True)
@click.option("--repeats", type=int, default=3, show_default=True)
@_SEED
@_THREADS
@_CONFIG
@_PLOT
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.pass_context
@_fail_codes
def gaussian_exp(ctx, **_kw):
    """Gaussian-covariance classification: observable vs max-sliced."""
    cfg = _resolve(ctx, _load_config_file(ctx.params["config_file"]), [
        "dims", "points_per_sample", "samples_per_class", "anchor_counts", "slice_counts",
        "anchor_cov", "anchor_resamples", "p", "repeats", "seed", "threads", "plot", "out",
    ])
    config = GaussianConfig(
        dims=cfg["dims"], points_per_sample=cfg["points_per_sample"],
        samples_per_class=cfg["samples_per_class"], anchor_counts=cfg["anchor_counts"],
        slice_counts=cfg["slice_counts"], anchor_cov=cfg["anchor_cov"],
        anchor_resamples=cfg["anchor_resamples"], p=cfg["p"], repeats=cfg["repeats"],
        seed=cfg["seed"], threads=_resolve_threads(cfg["threads"]),
    )
    table = run_gaussian_experiment(config)
    _experiment_epilogue(table, cfg["out"], config.to_dict() | {"plot": cfg["plot"]}, cfg["plot"])


@main.command("graph-exp")
@click.option("--nodes", callback=_int_list, default="300", show_default=True)
@click.option("--betas", callback=_float_list, default="0.5,1.5", show_default=True)
@click.option("--per-class", type=int, default=5, show_default=True)
@click.option("--anchor-pcts", callback=_float_list, default="10", show_default=True,
              help="Anchor-set sizes as percentages of the node count.")
@click.option("--p", type=float, default=1.0, show_default=True)
@click.option("--repeats", type=int, default=3, show_default=True)
@click.option("--atom-limit", type=int, default=2000, show_default=True)
@_SEED
@_THREADS
@_CONFIG
@_PLOT
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.pass_context
@_fail_codes
def graph_exp(ctx, **_kw):
    """Heat-distribution classification on random geometric graphs."""
    cfg = _resolve(ctx, _load_config_file(ctx.params["config_file"]), [
        "nodes", "betas", "per_class", "anchor_pcts", "p", "repeats", "atom_limit",
        "seed", "threads", "plot", "out",
    ])
    config = GraphConfig(
        nodes=cfg["nodes"], betas=cfg["betas"], per_class=cfg["per_class"],
        anchor_pcts=cfg["anchor_pcts"], p=cfg["p"], repeats=cfg["repeats"],
        atom_limit=cfg["atom_limit"], seed=cfg["seed"],
        threads=_resolve_threads(cfg["threads"]),
    )
    table = run_graph_experiment(config)
    _experiment_epilogue(table, cfg["out"], config.to_dict() | {"plot": cfg["plot"]}, cfg["plot"])


@main.command("sphere-exp")
@click.option("--dim", type=int, default=3, show_default=True, help="Sphere dimension d (points in R^(d+1)).")
@click.option("--m", type=int, default=100, show_default=True, help="Points per sampled measure.")
@click.option("--nf", "nf_values", callback=_int_list, default="1,3", show_default=True,
              help="Anchor-collection sizes (wedge sizes).")
@click.option("--no", "no_values", callback=_int_list, default="10,40,160", show_default=True,
              help="Numbers of anchor collections.")
@click.option("--pool-size", type=int, default=250, show_default=True)
@click.option("--p", type=float, default=1.0, show_default=True)
@click.option("--repeats", type=int, default=10, show_default=True)
@_SEED
@_THREADS
@_CONFIG
@_PLOT
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.pass_context
@_fail_codes
def sphere_exp(ctx, **_kw):
    """Relative error of observable estimates on sphere samples."""
    cfg = _resolve(ctx, _load_config_file(ctx.params["config_file"]), [
        "dim", "m", "nf_values", "no_values", "pool_size", "p", "repeats",
        "seed", "threads", "plot", "out",
    ])
    config = SphereConfig(
        dim=cfg["dim"], m=cfg["m"], nf_values=cfg["nf_values"], no_values=cfg["no_values"],
        pool_size=cfg["pool_size"], p=cfg["p"], repeats=cfg["repeats"], seed=cfg["seed"],
        threads=_resolve_threads(cfg["threads"]),
    )
    table = run_sphere_experiment(config)
    _experiment_epilogue(table, cfg["out"], config.to_dict() | {"plot": cfg["plot"]}, cfg["plot"])


@main.command()
@click.argument("space_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--space-kind", type=click.Choice(["auto", "cloud", "graph", "sphere"]), default="auto")
@click.option("--observable-file", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Use the first observable from this file.")
@click.option("--anchors", callback=_int_list, default=None, help="Comma-separated anchor point indices.")
@click.option("--weights", callback=_float_list, default=None, help="Anchor weights in (0,1] (default: all 1).")
@click.option("--grid", type=int, default=50, show_default=True,
              help="Grid resolution for level-set sampling (point clouds only).")
@click.option("--plot/--no-plot", default=True, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="JSON path (default: stdout).")
@_fail_codes
def voronoi(space_file, space_kind, observable_file, anchors, weights, grid, plot, out):
    """Weighted Voronoi cells and level-set samples of one observable."""
    space = load_space(space_file, space_kind)
    if observable_file is not None:
        f = load_observable_set(observable_file)[0]
    elif anchors is not None:
        f = observable(np.array(anchors, dtype=np.int64), weights)
    else:
        raise ValueError("pass --observable-file or --anchors")
    assignment = weighted_voronoi_cells(f, space)
    values = eval_observable_many(f, space)
    report = {
        "space_file": str(space_file),
        "cells": [int(c) for c in assignment],
        "values": [float(v) for v in values],
        "cell_sizes": [int(n) for n in np.bincount(assignment, minlength=len(f))],
    }
    grid_tuple = None
    if space.kind == "euclidean-cloud" and space.coords.shape[1] == 2:
        lo = space.coords.min(axis=0)
        hi = space.coords.max(axis=0)
        pad = 0.1 * (hi - lo + 1e-12)
        gx = np.linspace(lo[0] - pad[0], hi[0] + pad[0], grid)
        gy = np.linspace(lo[1] - pad[1], hi[1] + pad[1], grid)
        mx, my = np.meshgrid(gx, gy)
        gz = eval_observable_at_coords(f, np.column_stack([mx.ravel(), my.ravel()]), space).reshape(mx.shape)
        report["grid"] = {"x": gx.tolist(), "y": gy.tolist(), "values": gz.tolist()}
        grid_tuple = (mx, my, gz)
    text = json.dumps(report)
    if out:
        Path(out).write_text(text + "\n")
        if plot:
            from .plotting import plot_voronoi

            anchors_xy = None
            if space.coords is not None and f.anchor_indices is not None and space.coords.shape[1] >= 2:
                anchors_xy = space.coords[f.anchor_indices][:, :2]
            fig_path = Path(out).with_suffix(".png")
            plot_voronoi(space, assignment, values, fig_path, grid=grid_tuple, anchors_xy=anchors_xy)
            click.echo(f"wrote {out}, {fig_path}", err=True)
    else:
        click.echo(text)


@main.command()
@click.argument("results_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--plot/--no-plot", default=False, show_default=True,
              help="Also render the experiment figure from the raw rows.")
@_fail_codes
def summarize(results_csv, out, plot):
    """Mean-over-repetitions summary of an experiment CSV."""
    rows = read_rows_csv(results_csv)
    if not rows:
        raise InputFormatError(f"{results_csv}: no rows")
    write_summary_csv(summarize_rows(rows), out)
    if plot:
        from .plotting import plot_experiment_table

        fig_path = Path(out).with_suffix(".png")
        plot_experiment_table(rows[0]["experiment"], rows, fig_path)
        click.echo(f"wrote {out}, {fig_path}", err=True)
    else:
        click.echo(f"wrote {out}", err=True)


if __name__ == "__main__":
    main()
