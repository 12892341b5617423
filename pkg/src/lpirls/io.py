"""Plain-text file formats for instances and iteration traces.

Matrix files hold ``rows cols`` on the first line followed by one row per
line, every float written with 17 significant digits so that reading back
reproduces the exact 64-bit values. A vector is stored as an ``m x 1``
matrix. Instance metadata (x*, k, support, seed, generator parameters)
lives in a JSON sidecar next to the matrix files.
"""

import csv
import json
import math
import os

import numpy as np

from .model import RegressionInstance

FLOAT_FMT = "%.17g"
TRACE_HEADER = ["t", "eps", "sigma", "obj_lp", "obj_smoothed", "rel_error"]


def fmt(v):
    return FLOAT_FMT % v


def write_matrix(path, mat):
    mat = np.asarray(mat, dtype=float)
    if mat.ndim == 1:
        mat = mat[:, None]
    if mat.ndim != 2:
        raise ValueError("expected a 1-d or 2-d array")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"{mat.shape[0]} {mat.shape[1]}\n")
        for row in mat:
            fh.write(" ".join(fmt(v) for v in row) + "\n")


def read_matrix(path):
    with open(path, encoding="ascii") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: first line must be 'rows cols'")
        rows, cols = int(header[0]), int(header[1])
        data = []
        for line in fh:
            if line.strip():
                data.append([float(tok) for tok in line.split()])
    mat = np.array(data, dtype=float).reshape(-1, cols) if data else np.empty((0, cols))
    if mat.shape != (rows, cols) or any(len(r) != cols for r in data):
        raise ValueError(f"{path}: expected {rows}x{cols} values")
    return mat


def instance_paths(stem):
    """File names used for an instance saved under ``stem``."""
    return {"A": f"{stem}.A.txt", "y": f"{stem}.y.txt", "meta": f"{stem}.json"}


def save_instance(stem, inst):
    paths = instance_paths(stem)
    folder = os.path.dirname(paths["A"])
    if folder:
        os.makedirs(folder, exist_ok=True)
    write_matrix(paths["A"], inst.a_matrix)
    write_matrix(paths["y"], inst.y)
    meta = {
        "m": inst.m,
        "n": inst.n,
        "k": inst.k,
        "x_star": None if inst.x_star is None else [float(v) for v in inst.x_star],
        "support_star": None if inst.support_star is None else list(inst.support_star),
        "noise_sigma": inst.noise_sigma,
        "params": inst.meta,
    }
    with open(paths["meta"], "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths


def load_instance(stem):
    """Read an instance written by :func:`save_instance`.

    ``stem`` may also name a bare matrix file, read as ``[A | y]`` with the
    last column taken as the response.
    """
    paths = instance_paths(stem)
    if not os.path.exists(paths["A"]) and os.path.isfile(stem):
        mat = read_matrix(stem)
        return RegressionInstance(mat[:, :-1], mat[:, -1])
    a = read_matrix(paths["A"])
    y = read_matrix(paths["y"])
    if y.shape[1] != 1:
        raise ValueError(f"{paths['y']}: response must have one column")
    meta = {}
    if os.path.exists(paths["meta"]):
        with open(paths["meta"], encoding="utf-8") as fh:
            meta = json.load(fh)
    return RegressionInstance(
        a, y[:, 0],
        x_star=meta.get("x_star"),
        k=meta.get("k"),
        support_star=meta.get("support_star"),
        noise_sigma=meta.get("noise_sigma"),
        meta=meta.get("params") or {},
    )


def write_trace(path, trace):
    with open(path, "w", encoding="ascii", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for rec in trace:
            w.writerow([
                rec.t, fmt(rec.eps), fmt(rec.sigma), fmt(rec.obj_lp), fmt(rec.obj_smoothed),
                "" if rec.rel_error is None else fmt(rec.rel_error),
            ])


def read_trace(path):
    """Trace CSV as a dict of float arrays (empty rel_error cells become nan)."""
    with open(path, encoding="ascii", newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {
        name: np.array([float(r[name]) if r[name] != "" else math.nan for r in rows])
        for name in TRACE_HEADER
    }
