"""Heterogeneous fine-scale problem on a grid that resolves every stiff layer."""
from dataclasses import dataclass, field

import numpy as np

from .errors import SolveFailure, UnresolvedLayer, ValidationError
from .fem import DofMap, assemble_mass, assemble_stiffness
from .grid import TensorGrid, check_layer_resolution, layered_x3_nodes, uniform_nodes
from .microstructure import layer_query
from .newmark import LinearSolver, Trajectory, march

BOUNDARY_CONDITIONS = ("dirichlet_all", "dirichlet_x3_periodic_x1")


@dataclass(frozen=True)
class GridSpec:
    """x1: ``n1`` uniform cells on (0, width). x3: layer faces are nodes,
    ``cells_per_layer`` cells per layer and soft gaps cut at spacing ``h3``
    (at least ``min_soft_cells``), unless ``x3_nodes`` is given explicitly."""

    n1: int = 32
    width: float = 1.0
    h3: float = 1.0 / 64
    cells_per_layer: int = 4
    min_soft_cells: int = 1
    x3_nodes: tuple = None


@dataclass
class Loads:
    """Body force ``f(X1, X3, t)`` and initial data ``a0(X1, X3)``,
    ``b0(X1, X3)``; each returns something broadcastable to (2, N1, N3)."""

    f: object = None
    a0: object = None
    b0: object = None

    def force(self, grid, t):
        if self.f is None:
            return grid.zeros()
        return _sample(grid, self.f, t)

    def initial(self, grid):
        a = grid.zeros() if self.a0 is None else _sample(grid, self.a0)
        b = grid.zeros() if self.b0 is None else _sample(grid, self.b0)
        return a, b


def _sample(grid, fn, *args):
    if not callable(fn):
        return np.broadcast_to(np.asarray(fn, dtype=float), (2,) + grid.shape).copy()
    X1, X3 = grid.mesh()
    return np.broadcast_to(np.asarray(fn(X1, X3, *args), dtype=float), (2,) + grid.shape).copy()


@dataclass
class FineProblem:
    layer_set: object
    scaling: object
    epsilon: float
    grid: TensorGrid
    lam: np.ndarray
    mu: np.ndarray
    rho: np.ndarray
    stiff: np.ndarray
    loads: Loads = field(default_factory=Loads)
    T: float = 1.0
    dt: float = None
    bc: str = "dirichlet_all"
    solver: str = "direct"
    tol: float = 1e-10

    def __post_init__(self):
        if self.bc not in BOUNDARY_CONDITIONS:
            raise ValidationError(f"unknown boundary condition {self.bc!r}")
        if self.dt is None:
            self.dt = self.T / 1024

    @property
    def contrast(self):
        """mu_1ε / mu_0ε."""
        return self.scaling.contrast(self.epsilon)

    @property
    def cell_counts(self):
        return {"stiff": int(self.stiff.sum()), "soft": int((~self.stiff).sum()),
                "nodes": self.grid.n_nodes}

    def dofmap(self):
        return DofMap(self.grid, dirichlet_x1=(self.bc == "dirichlet_all"))

    def stiffness(self):
        return assemble_stiffness(self.grid, self.lam, self.mu)

    def mass(self, unit=False):
        return assemble_mass(self.grid, 1.0 if unit else self.rho)


def build_grid(ls, spec, periodic_x1=False):
    x1 = uniform_nodes(0.0, spec.width, spec.n1)
    if spec.x3_nodes is not None:
        x3 = np.asarray(spec.x3_nodes, dtype=float)
        check_layer_resolution(ls, x3, min_cells=4)
    else:
        if spec.cells_per_layer < 4:
            raise UnresolvedLayer(f"{spec.cells_per_layer} cells per layer, need at least 4")
        x3 = layered_x3_nodes(ls, spec.h3, spec.cells_per_layer, spec.min_soft_cells)
    return TensorGrid(x1, x3, periodic_x1=periodic_x1)


def build_fine_problem(ls, sc, eps, grid_spec=None, loads=None, T=1.0, dt=None,
                       bc="dirichlet_all", solver="direct", tol=1e-10):
    """Cell-wise coefficients: layers get (lam1, mu1, (ε/r) rho_bar), the rest (lam0, mu0, rho)."""
    grid_spec = grid_spec or GridSpec()
    if abs(ls.epsilon - eps) > 1e-12 * eps:
        raise ValidationError("layer set was built for a different epsilon")
    if len(ls) and abs(ls.thickness - sc.r(eps)) > 1e-9 * ls.thickness:
        raise ValidationError("layer thickness does not match the scaling r_ε")
    grid = build_grid(ls, grid_spec, periodic_x1=(bc == "dirichlet_x3_periodic_x1"))
    _, z3 = grid.cell_centers()
    stiff3, _, _ = layer_query(ls, z3)
    stiff3 = np.asarray(stiff3, dtype=bool)
    shape = (grid.shape[0] - 1, grid.shape[1] - 1)
    stiff = np.broadcast_to(stiff3[None, :], shape).copy()
    lam = np.where(stiff, sc.lam1(eps), sc.lam0(eps))
    mu = np.where(stiff, sc.mu1(eps), sc.mu0(eps))
    rho = np.where(stiff, sc.layer_density(eps), sc.rho)
    return FineProblem(ls, sc, eps, grid, lam, mu, rho, stiff, loads or Loads(), T, dt, bc,
                       solver, tol)


def solve_static_fine(p, f=None):
    """Solve K u = M_1 f with the problem's boundary conditions.

    ``f`` is a nodal array (2, N1, N3), a callable ``f(X1, X3)`` or None
    (then the problem's load at t = 0 is used).
    """
    grid = p.grid
    if f is None:
        fn = p.loads.force(grid, 0.0)
    else:
        fn = _sample(grid, f)
    dm = p.dofmap()
    K = dm.reduce(p.stiffness())
    F = dm.restrict(p.mass(unit=True) @ fn.ravel())
    u = LinearSolver(K, p.solver, p.tol).solve(F)
    nF = np.linalg.norm(F)
    if nF > 0 and np.linalg.norm(K @ u - F) > max(1e-8, 10 * p.tol) * nF:
        raise SolveFailure("static residual above tolerance")
    return dm.expand(u)


@dataclass
class FineState(Trajectory):
    grid: TensorGrid = None


def solve_dynamic_fine(p, sample_every=None):
    """Newmark average-acceleration march to T; samples every ``sample_every`` steps."""
    n_steps = int(round(p.T / p.dt))
    if n_steps < 1:
        raise ValidationError("T must cover at least one time step")
    dm = p.dofmap()
    K = dm.reduce(p.stiffness())
    M_full = p.mass()
    M = dm.reduce(M_full)
    a0, b0 = p.loads.initial(p.grid)
    load = None
    if p.loads.f is not None:
        def load(t):
            return dm.restrict(M_full @ p.loads.force(p.grid, t).ravel())
    tr = march(M, K, p.dt, n_steps, dm.pick(a0), dm.pick(b0), load,
               sample_every=sample_every or n_steps, method=p.solver, tol=p.tol, expand=dm.expand)
    return FineState(tr.times, tr.u, tr.v, tr.step_times, tr.energy, tr.work,
                     meta={"n_steps": n_steps, "dt": p.dt}, grid=p.grid)
