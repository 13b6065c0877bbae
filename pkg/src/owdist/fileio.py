"""Readers and writers for the on-disk formats.

Point clouds are header-less CSV, one point per row.  Graphs, measures and
observable sets are JSON.  Parse failures raise InputFormatError naming the
file (and line, for CSV) so the CLI can map them to exit code 2.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ContractError, InputFormatError
from .metric import (
    FiniteMetricSpace,
    build_graph_space,
    build_point_cloud_space,
    build_sphere_space,
    make_measure,
)
from .observables import Observable, ObservableSet, observable


def load_point_cloud_csv(path) -> np.ndarray:
    path = Path(path)
    rows = []
    width = None
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputFormatError(f"{path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        cells = line.split(",")
        try:
            row = [float(c) for c in cells]
        except ValueError as exc:
            raise InputFormatError(f"{path}:{lineno}: not a decimal coordinate row") from exc
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise InputFormatError(f"{path}:{lineno}: expected {width} coordinates, got {len(row)}")
        rows.append(row)
    if not rows:
        raise InputFormatError(f"{path}: empty point-cloud file")
    return np.array(rows)


def _load_json(path):
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except OSError as exc:
        raise InputFormatError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from exc


def load_graph_json(path) -> FiniteMetricSpace:
    data = _load_json(path)
    if not isinstance(data, dict) or "num_nodes" not in data or "edges" not in data:
        raise InputFormatError(f"{path}: graph JSON needs 'num_nodes' and 'edges'")
    try:
        return build_graph_space(int(data["num_nodes"]), data["edges"])
    except (ValueError, TypeError) as exc:
        raise InputFormatError(f"{path}: {exc}") from exc


def load_space(path, kind: str = "auto") -> FiniteMetricSpace:
    """Load a space file; ``kind`` is cloud/graph/sphere or auto-by-suffix."""
    path = Path(path)
    if kind == "auto":
        kind = "graph" if path.suffix.lower() == ".json" else "cloud"
    if kind == "graph":
        return load_graph_json(path)
    points = load_point_cloud_csv(path)
    if kind == "cloud":
        return build_point_cloud_space(points)
    if kind == "sphere":
        try:
            return build_sphere_space(points)
        except ValueError as exc:
            raise InputFormatError(f"{path}: {exc}") from exc
    raise ValueError(f"unknown space kind {kind!r}")


def load_measure_json(path, space: FiniteMetricSpace):
    data = _load_json(path)
    if not isinstance(data, list) or not all(isinstance(e, list) and len(e) == 2 for e in data):
        raise InputFormatError(f"{path}: measure JSON must be an array of [index, weight] pairs")
    try:
        indices = [int(i) for i, _ in data]
        weights = [float(w) for _, w in data]
    except (ValueError, TypeError) as exc:
        raise InputFormatError(f"{path}: {exc}") from exc
    try:
        return make_measure(space, indices, weights)
    except ValueError as exc:
        raise InputFormatError(f"{path}: {exc}") from exc


def save_measure_json(measure, path):
    Path(path).write_text(
        json.dumps([[int(i), float(w)] for i, w in zip(measure.indices, measure.weights)])
    )


def _observable_to_json(f: Observable) -> dict:
    anchors = (
        [int(a) for a in f.anchor_indices]
        if f.anchor_indices is not None
        else [[float(x) for x in row] for row in f.anchor_coords]
    )
    return {"anchors": anchors, "weights": [float(w) for w in f.weights], "combinator": f.combinator}


def save_observable_set(obs_set: ObservableSet, path):
    Path(path).write_text(json.dumps([_observable_to_json(f) for f in obs_set]))


def load_observable_set(path) -> ObservableSet:
    data = _load_json(path)
    if not isinstance(data, list) or not data:
        raise InputFormatError(f"{path}: observable file must be a nonempty JSON array")
    out = []
    for k, entry in enumerate(data):
        if not isinstance(entry, dict) or "anchors" not in entry:
            raise InputFormatError(f"{path}: entry {k} lacks 'anchors'")
        anchors = entry["anchors"]
        if anchors and isinstance(anchors[0], list):
            anchors = np.array(anchors, dtype=float)
        else:
            anchors = np.array(anchors, dtype=np.int64)
        try:
            out.append(
                observable(anchors, entry.get("weights"), entry.get("combinator", "min"))
            )
        except (ValueError, TypeError, ContractError) as exc:
            raise InputFormatError(f"{path}: entry {k}: {exc}") from exc
    return ObservableSet(observables=tuple(out), provenance={"strategy": "file", "path": str(path)})


def config_echo_path(out_path) -> Path:
    out = Path(out_path)
    return out.with_name(out.stem + ".config.json")


def write_config_echo(out_path, config: dict) -> Path:
    echo = config_echo_path(out_path)
    echo.write_text(json.dumps(config, indent=2, sort_keys=True) + "\n")
    return echo
