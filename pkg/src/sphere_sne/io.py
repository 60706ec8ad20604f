"""CSV and JSON file formats.

Point files: a mandatory header, one row per point, columns ``x0..x{d-1}``
(``y0..`` for embeddings) followed by an optional integer ``label`` column.
Floats are written with 17 significant digits so a write/read round trip is
exact.
"""

import csv
import json
import os
import platform
import sys
import time

import numpy as np

from .errors import DomainError

FLOAT_FMT = "{:.17g}"


def format_float(v):
    return FLOAT_FMT.format(float(v))


def write_points(path, points, labels=None, prefix="x"):
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise DomainError(f"points must be a 2-D array, got shape {points.shape}")
    header = [f"{prefix}{j}" for j in range(points.shape[1])]
    if labels is not None:
        labels = np.asarray(labels, dtype=int)
        if labels.shape != (points.shape[0],):
            raise DomainError("labels must have one entry per point")
        header.append("label")
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for i, row in enumerate(points):
            cells = [format_float(v) for v in row]
            if labels is not None:
                cells.append(str(int(labels[i])))
            fh.write(",".join(cells) + "\n")


def read_points(path):
    """Return ``(points, labels)``; ``labels`` is None without a label column."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DomainError(f"{path}: empty file, a header row is required") from None
        rows = [r for r in reader if r]
    header = [h.strip() for h in header]
    has_label = bool(header) and header[-1] == "label"
    n_coord = len(header) - int(has_label)
    if n_coord < 1:
        raise DomainError(f"{path}: no coordinate columns in header {header}")
    for name in header[:n_coord]:
        if not (name[:1] in ("x", "y") and name[1:].isdigit()):
            raise DomainError(f"{path}: unexpected column {name!r}")
    points = np.empty((len(rows), n_coord))
    labels = np.empty(len(rows), dtype=int) if has_label else None
    for i, r in enumerate(rows):
        if len(r) != len(header):
            raise DomainError(f"{path}: row {i + 1} has {len(r)} fields, expected {len(header)}")
        try:
            points[i] = [float(v) for v in r[:n_coord]]
            if has_label:
                labels[i] = int(r[-1])
        except ValueError as exc:
            raise DomainError(f"{path}: row {i + 1}: {exc}") from None
    return points, labels


def write_trace(path, trace, initial_kl, final_kl):
    with open(path, "w", newline="") as fh:
        fh.write("iteration,kl\n")
        for t, v in enumerate(trace):
            fh.write(f"{t},{format_float(v)}\n")
        fh.write(f"final,{format_float(final_kl)}\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else None
    return obj


def dumps(obj):
    """Deterministic JSON: insertion key order, non-finite floats as null."""
    return json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n"


def write_json(path, obj):
    text = dumps(obj)
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def library_version():
    from . import __version__
    return __version__


def manifest(argv, config, seeds, inputs, outputs):
    """Everything needed to rerun a command; no timing, so it is reproducible."""
    return {
        "command": list(argv),
        "config": config,
        "seeds": seeds,
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "library_version": library_version(),
        "numpy_version": np.__version__,
        "python_version": platform.python_version(),
    }


def write_sidecar(output_path, man, started):
    """``<output>.manifest.json``: the manifest plus the wall-clock duration."""
    doc = dict(man)
    doc["wall_clock_seconds"] = round(time.perf_counter() - started, 6)
    with open(os.fspath(output_path) + ".manifest.json", "w") as fh:
        fh.write(dumps(doc))
