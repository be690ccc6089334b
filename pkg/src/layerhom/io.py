"""Trajectory export: CSV tables and legacy-VTK structured grids."""
import csv
import os

import numpy as np

TRAJECTORY_HEADER = ("t", "x1", "x3", "u1", "u3", "v1", "v3")
MICRO_HEADER = ("t", "x1", "x3", "y3", "u01", "u03")


def _fmt(x):
    return repr(float(x))


def write_trajectory_csv(path, times, u, v, x1, x3):
    """One row per (sample, x1 node, x3 node); u and v are (n_t, 2, N1, N3)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    X1, X3 = np.meshgrid(x1, x3, indexing="ij")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORY_HEADER)
        for k, t in enumerate(times):
            cols = (X1.ravel(), X3.ravel(), u[k, 0].ravel(), u[k, 1].ravel(),
                    v[k, 0].ravel(), v[k, 1].ravel())
            ts = _fmt(t)
            for row in zip(*cols):
                w.writerow((ts,) + tuple(_fmt(c) for c in row))
    return path


def read_trajectory_csv(path):
    """Inverse of ``write_trajectory_csv``: (times, u, v, x1, x3)."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    times = np.unique(data[:, 0])
    x1 = np.unique(data[:, 1])
    x3 = np.unique(data[:, 2])
    shape = (times.size, x1.size, x3.size)
    u = np.stack([data[:, 3].reshape(shape), data[:, 4].reshape(shape)], axis=1)
    v = np.stack([data[:, 5].reshape(shape), data[:, 6].reshape(shape)], axis=1)
    return times, u, v, x1, x3


def write_vtk(path, x1, x3, u, v=None, title="layerhom"):
    """Legacy ASCII VTK STRUCTURED_GRID for one sample (x2 = 0 plane).

    Points run with x1 fastest, as the format requires.
    """
    u = np.asarray(u, dtype=float)
    N1, N3 = len(x1), len(x3)
    X1, X3 = np.meshgrid(x1, x3, indexing="xy")  # (N3, N1): x1 varies fastest
    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET STRUCTURED_GRID",
             f"DIMENSIONS {N1} {N3} 1", f"POINTS {N1 * N3} double"]
    lines += [f"{_fmt(a)} {_fmt(b)} 0.0" for a, b in zip(X1.ravel(), X3.ravel())]
    lines.append(f"POINT_DATA {N1 * N3}")

    def vectors(name, f):
        out = [f"VECTORS {name} double"]
        a = f[0].T.ravel()
        b = f[1].T.ravel()
        out += [f"{_fmt(p)} 0.0 {_fmt(q)}" for p, q in zip(a, b)]
        return out

    lines += vectors("displacement", u)
    if v is not None:
        lines += vectors("velocity", np.asarray(v, dtype=float))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def write_vtk_series(directory, stem, times, u, v, x1, x3):
    """One VTK file per sample, named ``<stem>_<k>.vtk``."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for k, t in enumerate(times):
        p = os.path.join(directory, f"{stem}_{k:05d}.vtk")
        write_vtk(p, x1, x3, u[k], v[k], title=f"{stem} t={_fmt(t)}")
        paths.append(p)
    return paths


def write_micro_profiles_csv(path, ts, every=1):
    """Cell profiles of a two-scale state: one row per (sample, x1, line, s).

    ``y3`` is the cell coordinate measured from the layer center, so soft
    points run over [theta/2, 1 - theta/2].
    """
    y3 = 0.5 * ts.theta + np.asarray(ts.s)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MICRO_HEADER)
        for k in range(0, ts.times.size, every):
            t = _fmt(ts.times[k])
            U = ts.micro[k]
            for i, a in enumerate(ts.x1):
                for j, c in enumerate(ts.lines):
                    for q, y in enumerate(y3):
                        w.writerow((t, _fmt(a), _fmt(c), _fmt(y), _fmt(U[0, i, j, q]),
                                    _fmt(U[1, i, j, q])))
    return path
