"""CSV and key = value report files. Floats are written with 17 significant digits."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def write_csv(path, columns, rows):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(x) for x in row])
    return path


def write_columns(path, columns, arrays):
    """Write equally long arrays as CSV columns."""
    arrays = [np.broadcast_to(np.asarray(a), np.shape(arrays[0])) for a in arrays]
    return write_csv(path, columns, zip(*arrays))


def read_csv(path):
    """Header and rows; numeric fields become floats."""
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = []
        for row in r:
            out = []
            for x in row:
                try:
                    out.append(float(x))
                except ValueError:
                    out.append(x)
            rows.append(out)
    return header, rows


def read_columns(path) -> dict:
    header, rows = read_csv(path)
    return {h: np.array([r[i] for r in rows]) for i, h in enumerate(header)}


def snapshot_table(snap, grid):
    """Cell-centred view of a snapshot; ``u`` is the mean of the bounding nodes."""
    u_cell = 0.5 * (snap.u[1:] + snap.u[:-1])
    return np.full(grid.n_cells, snap.tau), grid.cells, snap.v, u_cell, snap.theta


def snapshot_filename(tau: float) -> str:
    return f"snapshot_tau_{tau:.6f}.csv"


def write_snapshot(outdir, snap, grid):
    path = Path(outdir) / snapshot_filename(snap.tau)
    return write_columns(path, ("tau", "y", "v", "u", "theta"), snapshot_table(snap, grid))


def write_decay_series(path, series):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["tau", "value"])
        for t, v in zip(series.times, series.values):
            w.writerow([fmt(t), fmt(v)])
        w.writerow([f"rate={fmt(series.fitted_rate)}", f"r2={fmt(series.fit_quality)}"])
    return path


def read_decay_series(path):
    """``(times, values, rate, r2)`` from a decay-series CSV."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    body, footer = rows[1:-1], rows[-1]
    meta = dict(item.split("=", 1) for item in footer)
    times = np.array([float(r[0]) for r in body])
    values = np.array([float(r[1]) for r in body])
    return times, values, float(meta["rate"]), float(meta["r2"])


def write_report(path, items: dict):
    path = Path(path)
    with path.open("w") as fh:
        for k, v in items.items():
            fh.write(f"{k} = {fmt(v)}\n")
    return path


def read_report(path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out
