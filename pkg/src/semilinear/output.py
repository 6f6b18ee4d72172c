"""Field CSV, PGM heatmap and JSON report writers."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np


def _clean(obj):
    """Recursively convert numpy scalars/arrays; non-finite floats become None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps(report):
    return json.dumps(_clean(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, report):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(report))


def write_field_csv(path, u):
    """Rows x, y, u: interior nodes, then the distinct boundary points."""
    grid = u.grid
    rows = [(x, y, v) for (x, y), v in zip(grid.xy, u.values)]
    if u.bvals is not None:
        arms = grid.boundary_arms
        pts = np.column_stack([grid.bpoints[arms], u.bvals[arms]])
        pts = np.unique(pts, axis=0)
        rows.extend(map(tuple, pts))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "u"])
        for x, y, v in rows:
            w.writerow([f"{x:.17g}", f"{y:.17g}", f"{v:.17g}"])


def write_pgm(path, u):
    """8-bit binary PGM of the lattice; interior mapped linearly, exterior black."""
    grid = u.grid
    lat = np.full(grid.shape, np.nan)
    lat[grid.ij[:, 0], grid.ij[:, 1]] = u.values
    lo, hi = float(u.values.min()), float(u.values.max())
    scale = 255.0 / (hi - lo) if hi > lo else 0.0
    img = np.where(np.isnan(lat), 0.0, np.round((lat - lo) * scale))
    # rows top-to-bottom = decreasing y
    img = np.clip(img, 0, 255).astype(np.uint8).T[::-1]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def write_table_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow(["" if v is None else (f"{v:.17g}" if isinstance(v, float) else v)
                        for v in row])
