"""Load lgpairs CSV outputs and render them as images.

Rendering never alters the data: a heatmap cell's color is a fixed
function of its CSV value, and re-rendering the same inputs produces
byte-identical files (fixed Agg backend, fixed PNG metadata).
"""

import csv
import json
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_PNG_METADATA = {"Software": "lgfigs"}


def sidecar_path(csv_path):
    base = csv_path
    for suffix in (".raw.csv", ".csv"):
        if base.endswith(suffix):
            base = base[: -len(suffix)]
            break
    return base + ".meta.json"


def check_sidecar(csv_path):
    path = sidecar_path(csv_path)
    if not os.path.exists(path):
        raise ValueError(f"input {csv_path} has no metadata sidecar {path}")
    with open(path, "r", encoding="utf-8") as fh:
        json.load(fh)
    return path


def load_matrix_csv(path):
    """Labeled square matrix: first row/column are mode labels."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or len(rows[0]) < 2:
        raise ValueError(f"{path}: expected a labeled matrix CSV")
    col_labels = rows[0][1:]
    if any(not lab for lab in col_labels):
        raise ValueError(f"{path}: missing column labels")
    row_labels, data = [], []
    for row in rows[1:]:
        if not row[0]:
            raise ValueError(f"{path}: missing row label")
        row_labels.append(row[0])
        data.append([float(v) for v in row[1:]])
    grid = np.asarray(data, dtype=float)
    if grid.ndim != 2 or grid.shape[0] != grid.shape[1] or grid.shape[0] != len(col_labels):
        raise ValueError(f"{path}: matrix is not square ({grid.shape})")
    return col_labels, row_labels, grid


def load_sweep_csv(path):
    """Sweep table; requires at least waist_um, gamma, and w_diag columns."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        needed = {"waist_um", "gamma", "w_diag"}
        if reader.fieldnames is None or not needed.issubset(reader.fieldnames):
            raise ValueError(f"{path}: sweep CSV must have columns {sorted(needed)}")
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: sweep CSV has no rows")
    cols = {k: np.array([float(r[k]) for r in rows]) for k in reader.fieldnames}
    return cols


def render_heatmap(csv_path, out_path):
    """Heatmap with the signal index horizontal and the idler index vertical.

    Returns a summary dict with the rendered cell count.
    """
    check_sidecar(csv_path)
    col_labels, row_labels, grid = load_matrix_csv(csv_path)
    n = grid.shape[0]
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    image = ax.imshow(
        grid, origin="lower", interpolation="nearest", cmap="inferno", vmin=0.0, vmax=1.0
    )
    ax.set_xticks(range(n))
    ax.set_xticklabels(col_labels, rotation=90, fontsize=7)
    ax.set_yticks(range(n))
    ax.set_yticklabels(row_labels, fontsize=7)
    ax.set_xlabel("signal mode")
    ax.set_ylabel("idler mode")
    fig.colorbar(image, ax=ax, label="normalized rate")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150, metadata=_PNG_METADATA)
    plt.close(fig)
    return {"out": out_path, "cells": int(grid.size), "shape": grid.shape}


def render_sweep(csv_path, out_path):
    """Diagonal-fraction W against detection waist, ratio gamma on top."""
    check_sidecar(csv_path)
    cols = load_sweep_csv(csv_path)
    waist, gamma, w_diag = cols["waist_um"], cols["gamma"], cols["w_diag"]
    fig, ax = plt.subplots(figsize=(5.2, 3.8))
    ax.plot(waist, w_diag, marker="o", color="#444444")
    ax.set_xlabel("detection mode waist (um)")
    ax.set_ylabel("W (diagonal fraction)")
    ax.set_ylim(0.0, 1.0)
    ax.invert_xaxis()
    top = ax.secondary_xaxis("top")
    top.set_xticks(list(waist))
    top.set_xticklabels([f"{g:.2g}" for g in gamma], fontsize=7)
    top.set_xlabel("waist ratio")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150, metadata=_PNG_METADATA)
    plt.close(fig)
    return {"out": out_path, "points": int(waist.size)}
