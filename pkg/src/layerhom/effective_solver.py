"""Regime classification and the homogenized solvers.

* stiff interlayers (soft moduli of order one): isotropic elasticity plus an
  n-weighted membrane or bending term, with DOF elimination where the layer
  limit is rigid;
* intermediate soft moduli: the same layer terms without the isotropic part;
* critical soft moduli (order ε²): macro layer displacement v on x1 lines
  coupled to a 1D cell wave problem at every macro node.
"""
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.integrate import trapezoid

from . import kernels
from .errors import GridMismatch, NotPeriodic, RegimeMismatch, UnsupportedScaling, ValidationError
from .fem import (
    DofMap,
    assemble_bending,
    assemble_mass,
    assemble_stiffness,
    bending_matrix_1d,
    cell_to_node_x3,
)
from .fine_solver import Loads
from .grid import TensorGrid
from .newmark import LinearSolver, Trajectory, march
from .operators import MaterialScaling, MicroProfile, membrane_coefficient, traction_jump_1d

INF = math.inf
_EXP_TOL = 1e-12


@dataclass(frozen=True)
class Regime:
    interlayer_class: str
    k: float
    kappa: float
    theta: float
    l: float

    @property
    def membrane(self):
        return math.isfinite(self.k)

    @property
    def bending(self):
        return 0.0 < self.kappa < INF

    @property
    def inplane_rigid(self):
        return not math.isfinite(self.k)

    @property
    def fully_rigid(self):
        return self.kappa == INF

    def bending_weight(self):
        """kappa/3 (l+1)/(l+2), the d11-d11 coefficient of the bending form."""
        return self.kappa / 3.0 * (self.l + 1.0) / (self.l + 2.0)

    def as_dict(self):
        return {"class": self.interlayer_class, "k": _num(self.k), "kappa": _num(self.kappa),
                "theta": self.theta, "l": self.l}


def _num(x):
    return "inf" if x == INF else x


def _limit(coeff, exponent):
    if exponent > _EXP_TOL:
        return 0.0
    if exponent < -_EXP_TOL:
        return INF
    return coeff


def classify_regime(sc):
    """Limits k = lim (r/ε) mu1, kappa = lim (r³/ε) mu1, theta = lim r/ε."""
    e_k = sc.b - 1.0 - sc.a
    if e_k > _EXP_TOL:
        raise UnsupportedScaling(f"k = 0 (b - 1 - a = {e_k:g} > 0) is excluded")
    k = _limit(sc.c1 * sc.c2, e_k)
    kappa = _limit(sc.c1 * sc.c2**3, 3.0 * sc.b - 1.0 - sc.a)
    theta = sc.c2 if abs(sc.b - 1.0) <= _EXP_TOL else 0.0
    return Regime(sc.soft.kind, k, kappa, theta, sc.l)


@dataclass
class EffectiveProblem:
    """Macro problem on a tensor grid; ``n`` is the layer density per x3 cell."""

    regime: Regime
    scaling: MaterialScaling
    grid: TensorGrid
    n: np.ndarray
    loads: Loads = field(default_factory=Loads)
    T: float = 1.0
    dt: float = None
    solver: str = "direct"
    tol: float = 1e-10

    def __post_init__(self):
        n = np.asarray(self.n, dtype=float)
        ncell = self.grid.shape[1] - 1
        if n.ndim == 0:
            n = np.full(ncell, float(n))
        if n.shape != (ncell,):
            raise ValidationError(f"n must have one value per x3 cell ({ncell})")
        if np.any(n < 0):
            raise ValidationError("n must be non-negative")
        self.n = n
        if self.dt is None:
            self.dt = self.T / 1024

    @property
    def n_nodes(self):
        return cell_to_node_x3(self.n)

    def constraint_mask(self):
        """DOFs held at zero on {n > 0}: u1 when k = inf, both when kappa = inf."""
        mask = np.zeros((2,) + self.grid.shape, dtype=bool)
        on = np.broadcast_to(self.n_nodes[None, :] > 0, self.grid.shape)
        if self.regime.inplane_rigid:
            mask[0] |= on
        if self.regime.fully_rigid:
            mask[1] |= on
        return mask


def make_effective_problem(sc, grid, n=1.0, loads=None, T=1.0, dt=None, solver="direct", tol=1e-10):
    return EffectiveProblem(classify_regime(sc), sc, grid, n, loads or Loads(), T, dt, solver, tol)


def _layer_terms(ep):
    """Membrane stiffness per cell and the bending matrix (or None)."""
    reg = ep.regime
    memb = None
    if reg.membrane:
        memb = np.broadcast_to((reg.k * membrane_coefficient(reg.l) * ep.n)[None, :],
                               (ep.grid.shape[0] - 1, ep.grid.shape[1] - 1))
    bend = None
    if reg.bending:
        _, w3 = ep.grid.trapezoid_weights()
        bend = assemble_bending(ep.grid, reg.bending_weight() * w3 * ep.n_nodes)
    return memb, bend


def stiff_operators(ep):
    """Full (unreduced) K and M of the stiff-interlayer limit plus its DofMap."""
    if ep.regime.interlayer_class != "unit":
        raise RegimeMismatch("stiff solver needs the unit soft class")
    if ep.regime.theta != 0.0:
        raise RegimeMismatch("stiff solver needs vanishing layer fraction (b > 1)")
    sc = ep.scaling
    memb, bend = _layer_terms(ep)
    K = assemble_stiffness(ep.grid, sc.soft.lam, sc.soft.mu, memb)
    if bend is not None:
        K = K + bend
    rho = np.broadcast_to((sc.rho + ep.n * sc.rho_bar)[None, :],
                          (ep.grid.shape[0] - 1, ep.grid.shape[1] - 1))
    M = assemble_mass(ep.grid, rho)
    dm = DofMap(ep.grid, dirichlet_x1=not ep.grid.periodic_x1, constrained=ep.constraint_mask())
    return K, M, dm


def intermediate_operators(ep):
    """Layer terms only, lumped mass rho(1 - theta n) + n rho_bar.

    No isotropic term means no boundary condition on {n = 0}; the x1 ends
    are clamped only for components carrying a layer term on {n > 0}.
    """
    if ep.regime.interlayer_class != "intermediate":
        raise RegimeMismatch("intermediate solver needs the intermediate soft class")
    sc = ep.scaling
    reg = ep.regime
    grid = ep.grid
    memb, bend = _layer_terms(ep)
    nc = (grid.shape[0] - 1, grid.shape[1] - 1)
    K = assemble_stiffness(grid, np.zeros(nc), np.zeros(nc), memb)
    if bend is not None:
        K = K + bend
    dens = sc.rho * (1.0 - reg.theta * ep.n) + ep.n * sc.rho_bar
    Mc = assemble_mass(grid, np.broadcast_to(dens[None, :], nc))
    M = sp.diags(np.asarray(Mc.sum(axis=1)).ravel(), format="csr")
    mask = ep.constraint_mask()
    on = np.broadcast_to(ep.n_nodes[None, :] > 0, grid.shape)
    if not grid.periodic_x1:
        if reg.membrane:
            mask[0, [0, -1], :] |= on[[0, -1], :]
        if reg.bending:
            mask[1, [0, -1], :] |= on[[0, -1], :]
    dm = DofMap(grid, dirichlet_x1=False, dirichlet_x3=False, constrained=mask)
    return K, M, dm


@dataclass
class EffectiveState(Trajectory):
    grid: TensorGrid = None
    regime: Regime = None


def _run(ep, K, M, dm, sample_every):
    n_steps = int(round(ep.T / ep.dt))
    if n_steps < 1:
        raise ValidationError("T must cover at least one time step")
    Kr = dm.reduce(K)
    Mr = dm.reduce(M)
    a0, b0 = ep.loads.initial(ep.grid)
    load = None
    if ep.loads.f is not None:
        def load(t):
            return dm.restrict(M @ ep.loads.force(ep.grid, t).ravel())
    tr = march(Mr, Kr, ep.dt, n_steps, dm.pick(a0), dm.pick(b0), load,
               sample_every=sample_every or n_steps, method=ep.solver, tol=ep.tol, expand=dm.expand)
    return EffectiveState(tr.times, tr.u, tr.v, tr.step_times, tr.energy, tr.work,
                          meta={"n_steps": n_steps, "dt": ep.dt, "n_free": dm.n_free},
                          grid=ep.grid, regime=ep.regime)


def solve_effective_stiff(ep, sample_every=None):
    K, M, dm = stiff_operators(ep)
    return _run(ep, K, M, dm, sample_every)


def solve_effective_intermediate(ep, sample_every=None):
    K, M, dm = intermediate_operators(ep)
    return _run(ep, K, M, dm, sample_every)


def solve_effective_static(ep, f=None):
    """Equilibrium version of the stiff-interlayer limit: K u = M_1 f."""
    K, _, dm = stiff_operators(ep)
    grid = ep.grid
    if f is None:
        fn = ep.loads.force(grid, 0.0)
    elif callable(f):
        X1, X3 = grid.mesh()
        fn = np.broadcast_to(np.asarray(f(X1, X3), dtype=float), (2,) + grid.shape)
    else:
        fn = np.asarray(f, dtype=float)
    M1 = assemble_mass(grid, 1.0)
    Kr = dm.reduce(K)
    F = dm.restrict(M1 @ np.ravel(fn))
    return dm.expand(LinearSolver(Kr, ep.solver, ep.tol).solve(F))


# ---------------------------------------------------------------- critical


@dataclass
class CriticalProblem:
    """Macro x1 nodes, x3 sample lines (with quadrature weights) and a
    uniform micro grid of ``micro_cells`` cells on the soft interval."""

    regime: Regime
    scaling: MaterialScaling
    x1: np.ndarray
    lines: np.ndarray
    line_weights: np.ndarray
    micro_cells: int = 64
    loads: Loads = field(default_factory=Loads)
    T: float = 1.0
    dt: float = None
    epsilon: float = None
    length: float = None

    def __post_init__(self):
        if self.regime.interlayer_class != "critical":
            raise RegimeMismatch("two-scale solver needs the critical soft class")
        if self.micro_cells < 2:
            raise ValidationError("need at least 2 micro cells")
        if self.dt is None:
            self.dt = self.T / 1024
        self.x1 = np.asarray(self.x1, dtype=float)
        self.lines = np.asarray(self.lines, dtype=float)
        self.line_weights = np.broadcast_to(np.asarray(self.line_weights, dtype=float),
                                            self.lines.shape).copy()

    @property
    def ell(self):
        return 1.0 - self.regime.theta

    @property
    def s(self):
        return np.linspace(0.0, self.ell, self.micro_cells + 1)

    def moduli(self):
        """Micro wave moduli per component (mu0, lam0 + 2 mu0)."""
        soft = self.scaling.soft
        return (soft.mu, soft.lam + 2.0 * soft.mu)


def build_critical_problem(ls, sc, n1=32, micro_cells=64, loads=None, T=1.0, dt=None, width=1.0):
    """Macro lines at the layer centers of a periodic layer set."""
    reg = classify_regime(sc)
    if not ls.periodic:
        eps = ls.epsilon
        from .microstructure import cell_indices
        expected = eps * cell_indices(eps, ls.domain_length)
        if ls.centers.shape != expected.shape or not np.allclose(ls.centers, expected, atol=1e-12):
            raise NotPeriodic("the two-scale solver needs the periodic layer construction")
    x1 = np.linspace(0.0, width, n1 + 1)
    return CriticalProblem(reg, sc, x1, ls.centers.copy(), ls.epsilon, micro_cells,
                           loads or Loads(), T, dt, ls.epsilon, ls.domain_length)


class CriticalLayout:
    """Index bookkeeping between reduced unknowns and two-scale nodal arrays.

    Nodal arrays: V (2, N1, J) and U0 (2, N1, J, m+1); U0 ends equal V.
    Reduced unknowns per component: free v values (interior x1 nodes, unless
    the component is rigid) followed by interior micro values.
    """

    def __init__(self, cp):
        self.cp = cp
        n1 = cp.x1.size
        J = cp.lines.size
        m = cp.micro_cells
        self.n1, self.J, self.m = n1, J, m
        reg = cp.regime
        self.v_free = (not reg.inplane_rigid and not reg.fully_rigid, not reg.fully_rigid)
        interior = np.zeros((n1, J), dtype=bool)
        interior[1:-1, :] = True
        if cp.length is not None:
            interior &= (cp.lines > 0) & (cp.lines < cp.length)
        self.interior = interior
        self.nodes = np.flatnonzero(interior.ravel())  # flat (i*J + j) macro nodes
        nn = self.nodes.size
        self.nn = nn
        nV = n1 * J
        nU = nV * (m + 1)
        self.nV, self.nU = nV, nU
        # nodal layout: [V1, V3, U01, U03]
        rows, cols = [], []
        self.v_slice, self.z_slice = [], []
        off = 0
        for c in range(2):
            if self.v_free[c]:
                vidx = np.arange(nn) + off
                self.v_slice.append(slice(off, off + nn))
                off += nn
                rows.append(c * nV + self.nodes)
                cols.append(vidx)
                for end in (0, m):
                    rows.append(2 * nV + c * nU + self.nodes * (m + 1) + end)
                    cols.append(vidx)
            else:
                self.v_slice.append(None)
            zidx = off + np.arange(nn * (m - 1))
            self.z_slice.append(slice(off, off + nn * (m - 1)))
            off += nn * (m - 1)
            s = np.tile(np.arange(1, m), nn)
            node = np.repeat(self.nodes, m - 1)
            rows.append(2 * nV + c * nU + node * (m + 1) + s)
            cols.append(zidx)
        self.n = off
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        self.P = sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(2 * nV + 2 * nU, off))

    def to_nodal(self, x):
        y = self.P @ x
        V = y[: 2 * self.nV].reshape(2, self.n1, self.J)
        U = y[2 * self.nV:].reshape(2, self.n1, self.J, self.m + 1)
        return V, U

    def from_nodal(self, V, U):
        """Reduced vector picked from nodal arrays (no summation)."""
        y = np.concatenate([np.ravel(V), np.ravel(U)])
        out = np.zeros(self.n)
        coo = self.P.tocoo()
        out[coo.col] = y[coo.row]
        return out

    def node_weights(self):
        """x1 trapezoid weight times line weight, per free macro node."""
        x1 = self.cp.x1
        w1 = np.zeros_like(x1)
        h = np.diff(x1)
        w1[:-1] += 0.5 * h
        w1[1:] += 0.5 * h
        W = w1[:, None] * self.cp.line_weights[None, :]
        return W.ravel()[self.nodes]


def _micro_1d(m, ell):
    h = ell / m
    main = np.full(m + 1, 2.0)
    main[[0, -1]] = 1.0
    Ks = sp.diags([-np.ones(m), main, -np.ones(m)], [-1, 0, 1]) / h
    mm = np.full(m + 1, 2.0 / 3.0)
    mm[[0, -1]] = 1.0 / 3.0
    Ms = sp.diags([np.full(m, 1.0 / 6.0), mm, np.full(m, 1.0 / 6.0)], [-1, 0, 1]) * h
    return sp.csr_matrix(Ks), sp.csr_matrix(Ms)


def _x1_1d(x1):
    h = np.diff(x1)
    n = x1.size
    main = np.zeros(n)
    main[:-1] += 1.0 / h
    main[1:] += 1.0 / h
    K1 = sp.diags([-1.0 / h, main, -1.0 / h], [-1, 0, 1])
    mm = np.zeros(n)
    mm[:-1] += h / 3.0
    mm[1:] += h / 3.0
    M1 = sp.diags([h / 6.0, mm, h / 6.0], [-1, 0, 1])
    return sp.csr_matrix(K1), sp.csr_matrix(M1)


def critical_operators(cp, layout=None):
    """Nodal block matrices and the reduced K, M of the coupled system."""
    lay = layout or CriticalLayout(cp)
    sc = cp.scaling
    reg = cp.regime
    Ks, Ms = _micro_1d(cp.micro_cells, cp.ell)
    K1, M1 = _x1_1d(cp.x1)
    om = sp.diags(cp.line_weights)
    w1 = np.zeros_like(cp.x1)
    h = np.diff(cp.x1)
    w1[:-1] += 0.5 * h
    w1[1:] += 0.5 * h
    Wd = sp.diags(np.kron(w1, cp.line_weights))
    Mv = sc.rho_bar * sp.kron(M1, om)
    Kv1 = reg.k * membrane_coefficient(reg.l) * sp.kron(K1, om) if reg.membrane else 0 * Mv
    if reg.bending:
        Kv3 = reg.bending_weight() * sp.kron(bending_matrix_1d(cp.x1), om)
    else:
        Kv3 = 0 * Mv
    mod = cp.moduli()
    Mu = sc.rho * sp.kron(Wd, Ms)
    Mn = sp.block_diag([Mv, Mv, Mu, Mu], format="csr")
    Kn = sp.block_diag([Kv1, Kv3, mod[0] * sp.kron(Wd, Ks), mod[1] * sp.kron(Wd, Ks)],
                       format="csr")
    P = lay.P
    return lay, Kn, Mn, (P.T @ Kn @ P).tocsr(), (P.T @ Mn @ P).tocsr()


class CriticalSchur:
    """Solve (K + c M) x = b by eliminating interior micro unknowns.

    Every micro block is W_a T with one shared tridiagonal T per component,
    so the interior solves are batched Thomas sweeps and only the macro
    Schur complement is factored.
    """

    def __init__(self, A, layout):
        A = sp.csr_matrix(A)
        self.lay = layout
        m = layout.m
        self.W = layout.node_weights()
        self.parts = []
        for c in range(2):
            zs = layout.z_slice[c]
            z0 = zs.start
            blk = A[z0:z0 + m - 1, z0:z0 + m - 1].toarray() / self.W[0]
            lower = np.concatenate(([0.0], np.diag(blk, -1)))
            diag = np.diag(blk).copy()
            upper = np.concatenate((np.diag(blk, 1), [0.0]))
            vs = layout.v_slice[c]
            part = {"z": zs, "v": vs, "tri": (lower, diag, upper)}
            if vs is not None:
                t_end = A[z0:z0 + m - 1, vs.start].toarray().ravel() / self.W[0]
                q = kernels.tridiag_solve(lower, diag, upper, t_end[None, :])[0]
                sigma = float(t_end @ q)
                Avv = A[vs, vs]
                S = Avv - sp.diags(self.W * sigma)
                part.update(t_end=t_end, q=q, S=LinearSolver(S.tocsc()))
            self.parts.append(part)

    def solve(self, b):
        x = np.empty_like(b)
        m = self.lay.m
        nn = self.lay.nn
        for part in self.parts:
            zs = part["z"]
            bz = b[zs].reshape(nn, m - 1)
            y = kernels.tridiag_solve(*part["tri"], bz)
            if part["v"] is None:
                x[zs] = (y / self.W[:, None]).ravel()
                continue
            vs = part["v"]
            v = part["S"].solve(b[vs] - y @ part["t_end"])
            x[vs] = v
            x[zs] = (y / self.W[:, None] - v[:, None] * part["q"][None, :]).ravel()
        return x


@dataclass
class TwoScaleState(Trajectory):
    x1: np.ndarray = None
    lines: np.ndarray = None
    s: np.ndarray = None
    theta: float = 0.0
    V: np.ndarray = None
    micro: np.ndarray = None
    u_mean: np.ndarray = None
    regime: Regime = None
    # soft (mu0, lam0)
    moduli: tuple = None

    def profile(self, k):
        """MicroProfile at sample ``k`` (arrays indexed [x1, line, s])."""
        return MicroProfile(self.s, self.micro[k, 0], self.micro[k, 1])

    def traction(self, k):
        """Traction jump (g1, g2, g3) per macro node at sample ``k``."""
        return traction_jump_1d(self.profile(k), self.moduli[0], self.moduli[1], self.theta)


def _mean_profile(theta, s, V, U):
    return theta * V + trapezoid(U, s, axis=-1)


def solve_effective_critical(cp, sample_every=None, method="schur"):
    """Newmark march of the coupled macro/micro system.

    ``method="schur"`` eliminates micro unknowns per step (default);
    ``"direct"`` factors the whole coupled matrix.
    """
    n_steps = int(round(cp.T / cp.dt))
    if n_steps < 1:
        raise ValidationError("T must cover at least one time step")
    lay, Kn, Mn, K, M = critical_operators(cp)
    x1 = cp.x1
    X1, X3 = np.meshgrid(x1, cp.lines, indexing="ij")
    s = cp.s
    a0 = b0 = None
    if cp.loads.a0 is not None:
        a0 = _line_sample(cp.loads.a0, X1, X3)
    if cp.loads.b0 is not None:
        b0 = _line_sample(cp.loads.b0, X1, X3)

    def pick(f):
        if f is None:
            return np.zeros(lay.n)
        return lay.from_nodal(f, np.repeat(f[..., None], cp.micro_cells + 1, axis=-1))

    load = None
    if cp.loads.f is not None:
        def load(t):
            f = _line_sample(cp.loads.f, X1, X3, t)
            y = np.concatenate([f.ravel(), np.repeat(f[..., None], cp.micro_cells + 1, axis=-1).ravel()])
            return lay.P.T @ (Mn @ y)

    factory = None
    if method == "schur":
        def factory(A):
            return CriticalSchur(A, lay)
    elif method != "direct":
        raise ValueError(f"unknown method {method!r}")

    def expand(x):
        V, U = lay.to_nodal(x)
        return np.concatenate([V.ravel(), U.ravel()])

    tr = march(M, K, cp.dt, n_steps, pick(a0), pick(b0), load,
               sample_every=sample_every or n_steps, expand=expand, solver_factory=factory)
    nV = 2 * lay.nV
    V = tr.u[:, :nV].reshape(-1, 2, lay.n1, lay.J)
    U = tr.u[:, nV:].reshape(-1, 2, lay.n1, lay.J, cp.micro_cells + 1)
    Vd = tr.v[:, :nV].reshape(-1, 2, lay.n1, lay.J)
    theta = cp.regime.theta
    return TwoScaleState(tr.times, V, Vd, tr.step_times, tr.energy, tr.work,
                         meta={"n_steps": n_steps, "dt": cp.dt, "n_unknowns": lay.n,
                               "method": method},
                         x1=x1, lines=cp.lines, s=s, theta=theta, V=V, micro=U,
                         u_mean=_mean_profile(theta, s, V, U), regime=cp.regime,
                         moduli=(cp.scaling.soft.mu, cp.scaling.soft.lam))


def _line_sample(fn, X1, X3, *args):
    if callable(fn):
        out = np.asarray(fn(X1, X3, *args), dtype=float)
    else:
        out = np.asarray(fn, dtype=float)
    return np.broadcast_to(out, (2,) + X1.shape).copy()


def solve_micro_static(v, f, mu0, lam0, theta=0.0, m=64, rho=1.0):
    """Static cell problem -c u'' = rho f on (0, 1 - theta) with u = v at both ends.

    ``v`` and ``f`` are 2-vectors (components 1 and 3); returns a MicroProfile.
    """
    ell = 1.0 - theta
    Ks, Ms = _micro_1d(m, ell)
    s = np.linspace(0.0, ell, m + 1)
    out = []
    for c, mod in ((0, mu0), (1, lam0 + 2.0 * mu0)):
        A = (mod * Ks).tocsr()
        F = rho * (Ms @ np.full(m + 1, float(f[c])))
        u = np.zeros(m + 1)
        u[[0, m]] = float(v[c])
        rhs = F[1:m] - A[1:m, :] @ u
        u[1:m] = LinearSolver(A[1:m, 1:m].tocsc()).solve(rhs)
        out.append(u)
    return MicroProfile(s, out[0], out[1])


def corrector_field(ts, ls, eps, grid, sample=None):
    """u0(x, t, x3/ε) on a fine grid via the nearest macro line.

    Layer points take v; soft points interpolate the micro profile at the
    wrapped cell coordinate. Returns (n_samples, 2, N1, N3) or one sample.
    """
    if abs(ls.epsilon - eps) > 1e-12 * eps:
        raise GridMismatch("layer set epsilon differs from the requested epsilon")
    if ts.lines.shape != ls.centers.shape or not np.allclose(ts.lines, ls.centers, atol=1e-12):
        raise GridMismatch("two-scale lines must sit at the layer centers")
    if ts.x1.shape != grid.x1.shape or not np.allclose(ts.x1, grid.x1, atol=1e-14):
        raise GridMismatch("fine and macro grids must share x1 nodes")
    idx = np.rint(grid.x3 / eps).astype(int)
    i_first = int(np.rint(ts.lines[0] / eps))
    j = np.clip(idx - i_first, 0, ts.lines.size - 1)
    y = grid.x3 / eps - (j + i_first)
    y = (y + 0.5) % 1.0 - 0.5
    half = 0.5 * ts.theta
    in_layer = np.abs(y) <= half
    sc = np.where(y > 0, y - half, y + 1.0 - half)
    sc = np.clip(sc, 0.0, ts.s[-1])
    ks = range(ts.times.size) if sample is None else [sample]
    out = np.empty((len(ks), 2) + grid.shape)
    for q, k in enumerate(ks):
        U = ts.micro[k][:, :, j, :]  # (2, N1, N3, m+1)
        pos = np.searchsorted(ts.s, sc, side="right") - 1
        pos = np.clip(pos, 0, ts.s.size - 2)
        t = (sc - ts.s[pos]) / (ts.s[pos + 1] - ts.s[pos])
        cols = np.arange(grid.shape[1])
        lo = U[:, :, cols, pos]
        hi = U[:, :, cols, pos + 1]
        val = (1.0 - t) * lo + t * hi
        V = ts.V[k][:, :, j]
        out[q] = np.where(in_layer[None, None, :], V, val)
    return out if sample is None else out[0]


def solve_cell_2d(v, f, mu0, lam0, theta=0.0, m1=8, m3=64, rho=1.0, width=1.0):
    """Static cell problem on (0, width) x (0, 1 - theta), periodic in y1.

    Full 2D isotropic elasticity with u = v on both y3 faces and a constant
    body force ``f``. With y1-independent data the solution must not depend
    on y1 and must coincide with ``solve_micro_static``. Returns
    (grid, field of shape (2, m1 + 1, m3 + 1)).
    """
    ell = 1.0 - theta
    grid = TensorGrid(np.linspace(0.0, width, m1 + 1), np.linspace(0.0, ell, m3 + 1),
                      periodic_x1=True)
    dm = DofMap(grid, dirichlet_x1=False, dirichlet_x3=True)
    K = assemble_stiffness(grid, lam0, mu0)
    fn = np.empty((2,) + grid.shape)
    fn[0] = float(f[0])
    fn[1] = float(f[1])
    # u = v + w with w = 0 on the faces; constant v is a rigid translation, so K v = 0
    F = dm.restrict(assemble_mass(grid, rho) @ fn.ravel())
    w = dm.expand(LinearSolver(dm.reduce(K)).solve(F))
    u = w + np.asarray(v, dtype=float)[:, None, None]
    return grid, u
