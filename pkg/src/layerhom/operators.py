"""Stress, membrane and bending operators of the layered limit models.

Everything is written for the x2-invariant plane-strain section: fields
depend on (x1, x3) and carry the components (u1, u3).
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import RegimeMismatch, ValidationError
from .fem import cell_to_node_x3

_EXP_TOL = 1e-12


@dataclass(frozen=True)
class SoftClass:
    """Soft-matrix scaling: ``unit`` (fixed moduli), ``intermediate`` (ε^s)
    or ``critical`` (ε²)."""

    kind: str = "unit"
    mu: float = 1.0
    lam: float = 1.0
    s: float = 1.0

    def __post_init__(self):
        if self.kind not in ("unit", "intermediate", "critical"):
            raise ValidationError(f"unknown soft class {self.kind!r}")
        if self.mu <= 0 or self.lam < 0:
            raise ValidationError("soft moduli need mu > 0, lam >= 0")
        if self.kind == "intermediate" and not 0.0 < self.s < 2.0:
            raise ValidationError("intermediate exponent s must lie in (0, 2)")

    def factor(self, eps):
        if self.kind == "unit":
            return 1.0
        if self.kind == "critical":
            return eps**2
        return eps**self.s


@dataclass(frozen=True)
class MaterialScaling:
    """mu1 = c1 ε^-a, lam1 = l mu1, r = c2 ε^b, soft moduli per ``soft``."""

    a: float
    b: float
    c1: float = 1.0
    c2: float = 1.0
    l: float = 0.0
    soft: SoftClass = SoftClass()
    rho: float = 1.0
    rho_bar: float = 1.0

    def __post_init__(self):
        if self.b < 1.0 - _EXP_TOL:
            raise ValidationError("thickness exponent b must be >= 1")
        if self.c1 <= 0 or self.c2 <= 0:
            raise ValidationError("c1 and c2 must be positive")
        if self.l < 0:
            raise ValidationError("l must be >= 0")
        if self.rho <= 0 or self.rho_bar <= 0:
            raise ValidationError("densities must be positive")
        if abs(self.b - 1.0) <= _EXP_TOL and self.c2 >= 1.0:
            raise ValidationError("with b = 1 the layer fraction c2 must be < 1")

    def mu1(self, eps):
        return self.c1 * eps ** (-self.a)

    def lam1(self, eps):
        return self.l * self.mu1(eps)

    def r(self, eps):
        return self.c2 * eps**self.b

    def mu0(self, eps):
        return self.soft.mu * self.soft.factor(eps)

    def lam0(self, eps):
        return self.soft.lam * self.soft.factor(eps)

    def contrast(self, eps):
        return self.mu1(eps) / self.mu0(eps)

    def layer_density(self, eps):
        """Fine-scale density inside the layers, (ε/r) rho_bar."""
        return eps / self.r(eps) * self.rho_bar


def membrane_coefficient(l):
    return 4.0 * (l + 1.0) / (l + 2.0)


def bending_coefficient(l):
    """11-entry factor of H^σ relative to d11 psi."""
    return 2.0 * (l + 1.0) / (l + 2.0)


@dataclass
class StrainField:
    e11: np.ndarray
    e13: np.ndarray
    e33: np.ndarray


@dataclass
class StressField:
    s11: np.ndarray
    s13: np.ndarray
    s33: np.ndarray


def isotropic_stress(lam, mu, e):
    tr = e.e11 + e.e33
    return StressField(lam * tr + 2.0 * mu * e.e11, 2.0 * mu * e.e13, lam * tr + 2.0 * mu * e.e33)


def cell_strain(u, grid):
    """Strain of a nodal Q1 field at cell centers."""
    u = np.asarray(u, dtype=float)
    h1 = grid.h1[:, None]
    h3 = grid.h3[None, :]

    def d1(f):
        df = (f[1:, :] - f[:-1, :]) / h1
        return 0.5 * (df[:, 1:] + df[:, :-1])

    def d3(f):
        df = (f[:, 1:] - f[:, :-1]) / h3
        return 0.5 * (df[1:, :] + df[:-1, :])

    return StrainField(d1(u[0]), 0.5 * (d3(u[0]) + d1(u[1])), d3(u[1]))


def sigma_xprime_general(l, e11, e12, e22):
    """In-plane membrane stress 2 e' + (2l/(l+2)) tr(e') I'."""
    t = 2.0 * l / (l + 2.0) * (e11 + e22)
    return 2.0 * e11 + t, 2.0 * e12, 2.0 * e22 + t


def sigma_xprime(l, psi, grid):
    """Membrane stress of an x2-invariant field with psi2 = 0, per cell.

    Returns (s11, s12, s22). Only s11 = 4(l+1)/(l+2) d1 psi1 pairs with a
    plane-strain e'; s22 = (2l/(l+2)) d1 psi1 is returned for completeness.
    """
    e = cell_strain(psi, grid)
    z = np.zeros_like(e.e11)
    return sigma_xprime_general(l, e.e11, z, z)


def second_derivative_x1(f, x1):
    """d2/dx1^2 along axis 0, centered inside, second-order one-sided at the ends."""
    f = np.asarray(f, dtype=float)
    h = np.diff(x1)
    if not np.allclose(h, h[0], rtol=1e-10):
        raise ValidationError("second derivative needs a uniform x1 grid")
    h = h[0]
    if f.shape[0] < 4:
        raise ValidationError("need at least 4 x1 nodes")
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / h**2
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h**2
    out[-1] = (2.0 * f[-1] - 5.0 * f[-2] + 4.0 * f[-3] - f[-4]) / h**2
    return out


@dataclass
class BendingPair:
    H11: np.ndarray
    Hs11: np.ndarray
    Hs22: np.ndarray

    @property
    def H22(self):
        return np.zeros_like(self.H11)


def bending_pair(l, psi3, x1):
    """(H, H^σ) of a field depending on x1 (axis 0), nodal values."""
    d11 = second_derivative_x1(psi3, x1)
    return BendingPair(d11, bending_coefficient(l) * d11, l / (l + 2.0) * d11)


def _n_cells(n, grid):
    shape = (grid.shape[0] - 1, grid.shape[1] - 1)
    n = np.asarray(n, dtype=float)
    if n.ndim == 0:
        return np.full(shape, float(n))
    if n.shape == (grid.shape[1] - 1,):
        return np.broadcast_to(n[None, :], shape)
    if n.shape == (grid.shape[1],):
        return np.broadcast_to(0.5 * (n[1:] + n[:-1])[None, :], shape)
    if n.shape == shape:
        return n
    raise ValidationError(f"density of shape {n.shape} does not fit the grid")


def _n_nodes(n, grid):
    n = np.asarray(n, dtype=float)
    if n.ndim == 0:
        return np.full(grid.shape, float(n))
    if n.shape == (grid.shape[1],):
        return np.broadcast_to(n[None, :], grid.shape)
    if n.shape == (grid.shape[1] - 1,):
        return np.broadcast_to(cell_to_node_x3(n)[None, :], grid.shape)
    if n.shape == grid.shape:
        return n
    raise ValidationError(f"density of shape {n.shape} does not fit the grid")


def effective_bilinear(form, coeff, l, n, u, psi, grid):
    """Layer contribution of the limit form, with n inside the integral.

    ``form="membrane"``: coeff * int n e'(u):σ'(psi) over cells (midpoint
    rule), u and psi plane fields of shape (2, N1, N3).
    ``form="bending"``: coeff/6 * int n H(u):H^σ(psi), u and psi scalar
    nodal fields of shape (N1, N3) (trapezoid rule).
    """
    u = np.asarray(u, dtype=float)
    psi = np.asarray(psi, dtype=float)
    if form == "membrane":
        if u.shape != (2,) + grid.shape or psi.shape != u.shape:
            raise RegimeMismatch("membrane form takes plane fields of shape (2, N1, N3)")
        nc = _n_cells(n, grid)
        eu = cell_strain(u, grid).e11
        s11, _, _ = sigma_xprime(l, psi, grid)
        area = grid.h1[:, None] * grid.h3[None, :]
        return float(coeff * np.sum(nc * eu * s11 * area))
    if form == "bending":
        if u.shape != grid.shape or psi.shape != grid.shape:
            raise RegimeMismatch("bending form takes scalar fields of shape (N1, N3)")
        nn = _n_nodes(n, grid)
        Hu = bending_pair(l, u, grid.x1)
        Hp = bending_pair(l, psi, grid.x1)
        w1, w3 = grid.trapezoid_weights()
        integrand = Hu.H11 * Hp.Hs11 + Hu.H22 * Hp.Hs22
        return float(coeff / 6.0 * np.sum(nn * integrand * w1[:, None] * w3[None, :]))
    raise RegimeMismatch(f"unknown form {form!r}")


@dataclass
class MicroProfile:
    """1D cell profiles on the soft interval, s in [0, ell].

    ``s = 0`` is the soft side just above a layer, ``s = ell`` the side just
    below the next one (the cell wraps periodically). ``u1``/``u3`` have the
    s-grid as last axis.
    """

    s: np.ndarray
    u1: np.ndarray
    u3: np.ndarray


def _end_slopes(s, f):
    f = np.asarray(f, dtype=float)
    h0 = s[1] - s[0]
    hN = s[-1] - s[-2]
    if s.size >= 3 and np.isclose(h0, s[2] - s[1]) and np.isclose(hN, s[-2] - s[-3]):
        lo = (-3.0 * f[..., 0] + 4.0 * f[..., 1] - f[..., 2]) / (2.0 * h0)
        hi = (3.0 * f[..., -1] - 4.0 * f[..., -2] + f[..., -3]) / (2.0 * hN)
    else:
        lo = (f[..., 1] - f[..., 0]) / h0
        hi = (f[..., -1] - f[..., -2]) / hN
    return lo, hi


def traction_jump_1d(micro, mu0, lam0, theta=0.0):
    """Net soft-phase traction on a layer, (g1, g2, g3).

    g = c (u'(above) - u'(below)) with c = mu0 for u1 and lam0 + 2 mu0 for u3.
    ``theta`` only fixes the interval length and is not otherwise used.
    """
    s = np.asarray(micro.s, dtype=float)
    if not math.isclose(s[-1] - s[0], 1.0 - theta, rel_tol=1e-9, abs_tol=1e-12) and theta:
        raise ValidationError("micro grid does not span the soft interval")
    p1, m1 = _end_slopes(s, micro.u1)
    p3, m3 = _end_slopes(s, micro.u3)
    g1 = mu0 * (p1 - m1)
    g3 = (lam0 + 2.0 * mu0) * (p3 - m3)
    return np.stack([g1, np.zeros_like(g1), g3])
