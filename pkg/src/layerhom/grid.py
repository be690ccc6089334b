"""Tensor-product grids on (0, W) x (0, L) and plane fields living on them.

Node arrays are 1D; a displacement field is an array of shape
``(2, N1, N3)`` holding (u1, u3) at node ``(i, j)`` with coordinates
``(x1[i], x3[j])``.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, UnresolvedLayer, ValidationError


@dataclass(frozen=True)
class TensorGrid:
    x1: np.ndarray
    x3: np.ndarray
    periodic_x1: bool = False

    def __post_init__(self):
        for name in ("x1", "x3"):
            a = np.array(getattr(self, name), dtype=float)
            if a.ndim != 1 or a.size < 2 or np.any(np.diff(a) <= 0):
                raise ValidationError(f"{name} nodes must be strictly increasing, at least 2")
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def shape(self):
        return (self.x1.size, self.x3.size)

    @property
    def n_nodes(self):
        return self.x1.size * self.x3.size

    @property
    def width(self):
        return float(self.x1[-1] - self.x1[0])

    @property
    def length(self):
        return float(self.x3[-1] - self.x3[0])

    @property
    def h1(self):
        return np.diff(self.x1)

    @property
    def h3(self):
        return np.diff(self.x3)

    def cell_centers(self):
        return 0.5 * (self.x1[1:] + self.x1[:-1]), 0.5 * (self.x3[1:] + self.x3[:-1])

    def mesh(self):
        return np.meshgrid(self.x1, self.x3, indexing="ij")

    def zeros(self):
        return np.zeros((2,) + self.shape)

    def sample(self, fn, *args):
        """Evaluate ``fn(X1, X3, *args)`` on the nodes; result broadcast to (2, N1, N3)."""
        X1, X3 = self.mesh()
        out = np.asarray(fn(X1, X3, *args), dtype=float)
        return np.broadcast_to(out, (2,) + self.shape).copy()

    def trapezoid_weights(self):
        """Nodal trapezoid weights in x1 and x3."""
        return _trap(self.x1), _trap(self.x3)

    def same_as(self, other):
        return (
            self.x1.shape == other.x1.shape
            and self.x3.shape == other.x3.shape
            and np.allclose(self.x1, other.x1, rtol=0, atol=1e-14)
            and np.allclose(self.x3, other.x3, rtol=0, atol=1e-14)
        )


def _trap(x):
    h = np.diff(x)
    w = np.zeros_like(x)
    w[:-1] += 0.5 * h
    w[1:] += 0.5 * h
    return w


def uniform_nodes(a, b, n_cells):
    if n_cells < 1:
        raise ValidationError("need at least one cell")
    return np.linspace(a, b, int(n_cells) + 1)


def segment_nodes(breaks, cells):
    """Concatenate uniform subdivisions of consecutive segments."""
    parts = [np.array([breaks[0]])]
    for a, b, n in zip(breaks[:-1], breaks[1:], cells):
        parts.append(np.linspace(a, b, int(n) + 1)[1:])
    return np.concatenate(parts)


def layered_x3_nodes(ls, h_soft, cells_per_layer=4, min_soft_cells=1):
    """x3 nodes with layer faces as nodes.

    Each stiff layer gets ``cells_per_layer`` uniform cells; every soft gap is
    cut uniformly into ``max(min_soft_cells, ceil(len/h_soft))`` cells.
    """
    if cells_per_layer < 4:
        raise UnresolvedLayer(f"{cells_per_layer} cells per layer, need at least 4")
    if h_soft <= 0:
        raise ValidationError("h_soft must be positive")
    L = ls.domain_length
    lo, hi = ls.layer_bounds()
    breaks = np.concatenate(([0.0], np.ravel(np.column_stack((lo, hi))), [L]))
    cells = []
    for k in range(breaks.size - 1):
        seg = breaks[k + 1] - breaks[k]
        if k % 2 == 1:
            cells.append(int(cells_per_layer))
        else:
            cells.append(max(int(min_soft_cells), int(math.ceil(seg / h_soft - 1e-9))))
    return segment_nodes(breaks, cells)


def check_layer_resolution(ls, x3, min_cells=4):
    """Raise UnresolvedLayer unless every layer face is a node and each layer has >= min_cells cells."""
    x3 = np.asarray(x3, dtype=float)
    lo, hi = ls.layer_bounds()
    tol = 1e-9 * ls.thickness
    for a, b in zip(lo, hi):
        ia = np.argmin(np.abs(x3 - a))
        ib = np.argmin(np.abs(x3 - b))
        if abs(x3[ia] - a) > tol or abs(x3[ib] - b) > tol:
            raise UnresolvedLayer(f"layer ({a:g}, {b:g}) faces are not grid nodes")
        if ib - ia < min_cells:
            raise UnresolvedLayer(f"layer ({a:g}, {b:g}) has {ib - ia} cells, need {min_cells}")


def interp_x3(field, x3_from, x3_to):
    """Linear interpolation along the last axis onto new x3 nodes."""
    field = np.asarray(field, dtype=float)
    flat = field.reshape(-1, field.shape[-1])
    out = np.empty((flat.shape[0], np.size(x3_to)))
    for k in range(flat.shape[0]):
        out[k] = np.interp(x3_to, x3_from, flat[k])
    return out.reshape(field.shape[:-1] + (np.size(x3_to),))


def transfer(field, src, dst):
    """Move a nodal field between grids sharing x1 nodes (x3 interpolated linearly)."""
    if src.x1.shape != dst.x1.shape or not np.allclose(src.x1, dst.x1, atol=1e-14):
        raise GridMismatch("grids must share x1 nodes")
    return interp_x3(field, src.x3, dst.x3)
