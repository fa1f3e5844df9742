"""Artifact writers: trajectory CSV, matrix snapshots, grayscale heatmaps and JSON."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Sequence

import numpy as np


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def jsonable(obj):
    """Make ``obj`` JSON-safe: numpy scalars to Python, non-finite floats to ``None``."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n")


def write_trajectory_csv(path, t, metrics: dict, w, metric_names: Sequence[str]) -> None:
    n = w.shape[1]
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["t", *metric_names, *(f"w_{i + 1}" for i in range(n))])
        for k in range(len(t)):
            out.writerow([fmt(t[k]), *(fmt(metrics[m][k]) for m in metric_names),
                          *(fmt(v) for v in w[k])])


def stamp(t: float) -> str:
    return f"{t:010.4f}"


def write_snapshot(path, t: float, A) -> None:
    write_json(path, {"t": float(t), "A": np.asarray(A, dtype=float).tolist()})


def gray_levels(A) -> np.ndarray:
    """8-bit gray per entry on a fixed [0, 1] scale; darker means a larger entry."""
    A = np.clip(np.asarray(A, dtype=float), 0.0, 1.0)
    return np.rint(255.0 * (1.0 - A)).astype(np.uint8)


def write_pgm(path, A, cell: int = 16) -> None:
    img = np.kron(gray_levels(A), np.ones((cell, cell), dtype=np.uint8))
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM file")
    w, h = int(parts[1]), int(parts[2])
    return np.frombuffer(parts[4][: w * h], dtype=np.uint8).reshape(h, w)


def write_svg(path, A, cell: int = 16) -> None:
    g = gray_levels(A)
    n, m = g.shape
    rects = [
        f'<rect x="{j * cell}" y="{i * cell}" width="{cell}" height="{cell}" '
        f'fill="rgb({v},{v},{v})"/>'
        for i in range(n) for j in range(m) for v in [int(g[i, j])]
    ]
    Path(path).write_text(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{m * cell}" height="{n * cell}">\n'
        + "\n".join(rects) + "\n</svg>\n")
