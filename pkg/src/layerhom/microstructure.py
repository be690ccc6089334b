"""Deterministic layer geometries, the layer-count density and layer weights.

Layers are slabs ``(c - r/2, c + r/2)`` in x3 around sorted centers ``c`` in
``(0, L)``. The count density assigns to every ε-cell
``(εi - ε/2, εi + ε/2]`` lying inside ``(0, L)`` the number of centers it
contains; the leftover boundary pieces carry zero.
"""
import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BoundaryViolation,
    GapViolation,
    ThicknessViolation,
    ValidationError,
    WindowTooSmall,
)

_TOL = 1e-12


@dataclass(frozen=True)
class LayerSet:
    centers: np.ndarray
    thickness: float
    epsilon: float
    domain_length: float
    delta: float
    periodic: bool = False
    # False when explicit centers are spaced more widely than epsilon
    exact_gap: bool = True

    def __post_init__(self):
        c = np.array(self.centers, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "centers", c)

    def __len__(self):
        return self.centers.size

    @property
    def min_gap(self):
        if self.centers.size < 2:
            return math.inf
        return float(np.min(np.diff(self.centers)))

    @property
    def volume_fraction(self):
        return self.centers.size * self.thickness / self.domain_length

    def layer_bounds(self):
        """(lower, upper) x3 bounds of every stiff layer."""
        half = 0.5 * self.thickness
        return self.centers - half, self.centers + half


def cell_indices(epsilon, L):
    """Integers i with (εi - ε/2, εi + ε/2] inside (0, L)."""
    i_max = int(math.floor(L / epsilon - 0.5 - 1e-9))
    return np.arange(1, i_max + 1)


def build_layers(mode, epsilon, thickness, L, delta, centers=None):
    """Build a validated LayerSet.

    ``mode`` is ``"periodic"`` (centers at εi for every admissible cell) or
    ``"explicit"`` (``centers`` given, sorted). Explicit sets are accepted with
    a minimum gap >= ε and flagged through ``exact_gap``.
    """
    if epsilon <= 0 or thickness <= 0 or L <= 0 or delta <= 0:
        raise ValidationError("epsilon, thickness, L and delta must be positive")
    if epsilon <= thickness * (1.0 + delta):
        raise ThicknessViolation(
            f"epsilon={epsilon:g} must exceed r*(1+delta)={thickness * (1 + delta):g}"
        )
    if mode == "periodic":
        c = epsilon * cell_indices(epsilon, L)
        return LayerSet(c, thickness, epsilon, L, delta, periodic=True, exact_gap=True)
    if mode != "explicit":
        raise ValidationError(f"unknown layer mode {mode!r}")
    if centers is None:
        raise ValidationError("explicit mode needs a list of centers")
    c = np.asarray(centers, dtype=float).ravel()
    if c.size > 1 and np.any(np.diff(c) <= 0):
        raise ValidationError("explicit centers must be strictly increasing")
    tol = _TOL * max(L, 1.0)
    exact = True
    if c.size > 1:
        gap = float(np.min(np.diff(c)))
        if gap < epsilon - tol:
            raise GapViolation(f"min gap {gap:g} < epsilon {epsilon:g}")
        exact = abs(gap - epsilon) <= tol
    if c.size and (c[0] <= 0.5 * epsilon + tol or L - c[-1] <= 0.5 * epsilon + tol):
        raise BoundaryViolation("layer centers must be farther than epsilon/2 from 0 and L")
    return LayerSet(c, thickness, epsilon, L, delta, periodic=False, exact_gap=exact)


@dataclass(frozen=True)
class StepDensity:
    """Piecewise-constant field on a partition of (0, L).

    ``cell_index[k]`` is the ε-cell label of piece ``k``; the two boundary
    pieces (not in Z_ε) carry labels ``0`` and ``i_max + 1`` and value 0.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    cell_index: np.ndarray = field(default=None)
    epsilon: float = None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k = np.clip(np.searchsorted(self.breakpoints, x, side="left") - 1, 0, self.values.size - 1)
        return self.values[k]

    @property
    def domain_length(self):
        return float(self.breakpoints[-1])

    def cell_average(self, edges):
        """Exact averages over the intervals given by ``edges``."""
        edges = np.asarray(edges, dtype=float)
        F = _cumulative(self.breakpoints, self.values, edges)
        return np.diff(F) / np.diff(edges)


def count_density(centers, epsilon, L):
    """Per-ε-cell counts of ``centers`` as a StepDensity on (0, L)."""
    idx = cell_indices(epsilon, L)
    left = epsilon * idx - 0.5 * epsilon
    right = epsilon * idx + 0.5 * epsilon
    c = np.sort(np.asarray(centers, dtype=float))
    counts = np.searchsorted(c, right, side="right") - np.searchsorted(c, left, side="right")
    if idx.size == 0:
        return StepDensity(np.array([0.0, L]), np.zeros(1, dtype=np.int64), np.array([0]), epsilon)
    bp = np.concatenate(([0.0], left, [right[-1], L]))
    vals = np.concatenate(([0], counts, [0])).astype(np.int64)
    labels = np.concatenate(([0], idx, [idx[-1] + 1]))
    # drop zero-width boundary pieces
    keep = np.diff(bp) > 0
    bp = np.concatenate(([0.0], bp[1:][keep]))
    return StepDensity(bp, vals[keep], labels[keep], epsilon)


def n_eps_field(ls):
    return count_density(ls.centers, ls.epsilon, ls.domain_length)


def layer_query(ls, x3):
    """Stiff-layer membership, measure weight and local layer coordinate at x3.

    Returns ``(in_stiff, weight, y_local)`` where ``weight = ε/r`` inside a
    layer and ``y_local = (x3 - c)/r`` inside the widened window
    ``c + r(1+δ)(-1/2, 1/2)`` (0 elsewhere). Accepts scalars or arrays.
    """
    scalar = np.ndim(x3) == 0
    x = np.atleast_1d(np.asarray(x3, dtype=float))
    in_stiff = np.zeros(x.shape, dtype=bool)
    weight = np.zeros(x.shape)
    y = np.zeros(x.shape)
    c = ls.centers
    if c.size:
        k = np.searchsorted(c, x)
        lo = np.clip(k - 1, 0, c.size - 1)
        hi = np.clip(k, 0, c.size - 1)
        near = np.where(np.abs(x - c[lo]) <= np.abs(x - c[hi]), c[lo], c[hi])
        d = x - near
        r = ls.thickness
        in_stiff = np.abs(d) < 0.5 * r
        weight = np.where(in_stiff, ls.epsilon / r, 0.0)
        window = np.abs(d) < 0.5 * r * (1.0 + ls.delta)
        y = np.where(window, d / r, 0.0)
    if scalar:
        return bool(in_stiff[0]), float(weight[0]), float(y[0])
    return in_stiff, weight, y


def nearest_center(ls, x3):
    """Index of the closest layer center for each x3."""
    c = ls.centers
    x = np.asarray(x3, dtype=float)
    k = np.searchsorted(c, x)
    lo = np.clip(k - 1, 0, c.size - 1)
    hi = np.clip(k, 0, c.size - 1)
    return np.where(np.abs(x - c[lo]) <= np.abs(x - c[hi]), lo, hi)


def _cumulative(breakpoints, values, x):
    F = np.concatenate(([0.0], np.cumsum(np.diff(breakpoints) * values)))
    return np.interp(x, breakpoints, F)


def coarse_average(f, window, points=None):
    """Moving-window average of a piecewise-constant field.

    ``f`` is a StepDensity or a ``(breakpoints, values)`` pair. The window is
    clipped at the domain ends and the average taken over the clipped part,
    so constants are reproduced exactly everywhere. Evaluated at ``points``
    (default: the piece midpoints).
    """
    if isinstance(f, StepDensity):
        bp, vals = f.breakpoints, np.asarray(f.values, dtype=float)
        scale = f.epsilon if f.epsilon is not None else float(np.max(np.diff(bp)))
    else:
        bp, vals = (np.asarray(a, dtype=float) for a in f)
        scale = float(np.max(np.diff(bp)))
    if window < scale * (1.0 - 1e-12):
        raise WindowTooSmall(f"window {window:g} is smaller than the cell size {scale:g}")
    if points is None:
        points = 0.5 * (bp[1:] + bp[:-1])
    x = np.asarray(points, dtype=float)
    a = np.clip(x - 0.5 * window, bp[0], bp[-1])
    b = np.clip(x + 0.5 * window, bp[0], bp[-1])
    return (_cumulative(bp, vals, b) - _cumulative(bp, vals, a)) / (b - a)


def write_layers_csv(path, ls):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["center", "thickness"])
        for c in ls.centers:
            w.writerow([repr(float(c)), repr(float(ls.thickness))])


def read_layer_centers(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    centers = np.array([float(r["center"]) for r in rows])
    thickness = {float(r["thickness"]) for r in rows}
    if len(thickness) > 1:
        raise ValidationError("all layers must share one thickness")
    return centers, (thickness.pop() if thickness else None)


def write_density_csv(path, density):
    bp = density.breakpoints
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["cell_index", "cell_left", "cell_right", "count"])
        for k in range(density.values.size):
            w.writerow([int(density.cell_index[k]), repr(float(bp[k])), repr(float(bp[k + 1])),
                        int(density.values[k])])
