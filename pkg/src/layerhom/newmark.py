"""Newmark time stepping for M a + K u = F(t) on reduced (free) unknowns.

With the average-acceleration parameters (beta=1/4, gamma=1/2) the scheme
satisfies E_{n+1} - E_n = (F_n + F_{n+1})/2 . (u_{n+1} - u_n) exactly, where
E = v.Mv/2 + u.Ku/2; ``march`` records both sides of this balance.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NonFiniteState, SolveFailure


class LinearSolver:
    """Factor once, solve many. ``method`` is ``"direct"`` (sparse LU) or ``"cg"``."""

    def __init__(self, A, method="direct", tol=1e-10, maxiter=None):
        self.n = A.shape[0]
        self.method = method
        self.tol = tol
        self.maxiter = maxiter
        if self.n == 0:
            return
        if method == "direct":
            try:
                self._lu = spla.splu(sp.csc_matrix(A))
            except RuntimeError as exc:
                raise SolveFailure(f"factorization failed: {exc}") from exc
        elif method == "cg":
            self._A = sp.csr_matrix(A)
            d = self._A.diagonal()
            if np.any(d <= 0):
                raise SolveFailure("CG needs a positive diagonal")
            self._prec = sp.diags(1.0 / d)
        else:
            raise ValueError(f"unknown solver method {method!r}")

    def solve(self, b):
        b = np.asarray(b, dtype=float)
        if self.n == 0:
            return np.zeros_like(b)
        if self.method == "direct":
            x = self._lu.solve(b)
        else:
            x, info = spla.cg(self._A, b, rtol=self.tol, atol=0.0, M=self._prec,
                              maxiter=self.maxiter)
            if info != 0:
                raise SolveFailure(f"CG did not converge (info={info})")
        if not np.all(np.isfinite(x)):
            raise NonFiniteState("linear solve produced non-finite values")
        return x


@dataclass
class Trajectory:
    """Sampled states plus the per-step energy/work record."""

    times: np.ndarray
    u: np.ndarray
    v: np.ndarray
    step_times: np.ndarray
    energy: np.ndarray
    work: np.ndarray
    meta: dict = field(default_factory=dict)

    def energy_residual(self):
        """|E(t) - E(0) - W(t)| / max(E(0), E(t), floor) at every step."""
        floor = np.finfo(float).tiny
        scale = np.maximum(np.maximum(self.energy[0], self.energy), floor)
        return np.abs(self.energy - self.energy[0] - self.work) / scale


def energy(M, K, u, v):
    return 0.5 * float(v @ (M @ v)) + 0.5 * float(u @ (K @ u))


class Newmark:
    def __init__(self, M, K, dt, beta=0.25, gamma=0.5, method="direct", tol=1e-10,
                 solver_factory=None):
        if dt <= 0:
            raise ValueError("dt must be positive")
        self.M = sp.csr_matrix(M)
        self.K = sp.csr_matrix(K)
        self.dt = dt
        self.beta = beta
        self.gamma = gamma
        self.c0 = 1.0 / (beta * dt * dt)
        self.c2 = 1.0 / (beta * dt)
        self.c3 = 0.5 / beta - 1.0
        A = self.K + self.c0 * self.M
        self._eff = solver_factory(A) if solver_factory else LinearSolver(A, method, tol)
        self._mass = None
        self._method = method
        self._tol = tol

    def initial_acceleration(self, u, F):
        if self._mass is None:
            self._mass = LinearSolver(self.M, self._method, self._tol)
        return self._mass.solve(F - self.K @ u)

    def step(self, u, v, a, F_next):
        rhs = F_next + self.M @ (self.c0 * u + self.c2 * v + self.c3 * a)
        u1 = self._eff.solve(rhs)
        a1 = self.c0 * (u1 - u) - self.c2 * v - self.c3 * a
        v1 = v + self.dt * ((1.0 - self.gamma) * a + self.gamma * a1)
        if not (np.all(np.isfinite(u1)) and np.all(np.isfinite(v1))):
            raise NonFiniteState("non-finite state in time step")
        return u1, v1, a1


def march(M, K, dt, n_steps, u0, v0, load=None, sample_every=1, method="direct", tol=1e-10,
          expand=None, solver_factory=None):
    """Integrate from t=0 over ``n_steps`` steps.

    ``load(t)`` returns the reduced load vector (None means F = 0).
    ``expand`` maps reduced vectors to stored fields (default: identity).
    ``solver_factory(A)`` may supply a custom solver for K + M/(beta dt^2).
    """
    nm = Newmark(M, K, dt, method=method, tol=tol, solver_factory=solver_factory)
    n = M.shape[0]
    zero = np.zeros(n)

    def F(t):
        return zero if load is None else np.asarray(load(t), dtype=float)

    def keep(x):
        return np.array(x if expand is None else expand(x))

    u = np.array(u0, dtype=float)
    v = np.array(v0, dtype=float)
    F0 = F(0.0)
    a = nm.initial_acceleration(u, F0) if n else zero
    E = np.empty(n_steps + 1)
    W = np.zeros(n_steps + 1)
    E[0] = energy(nm.M, nm.K, u, v)
    times, us, vs = [0.0], [keep(u)], [keep(v)]
    Fp = F0
    for k in range(1, n_steps + 1):
        t = k * dt
        Fn = F(t)
        u_new, v, a = nm.step(u, v, a, Fn)
        W[k] = W[k - 1] + 0.5 * float((Fp + Fn) @ (u_new - u))
        u = u_new
        Fp = Fn
        E[k] = energy(nm.M, nm.K, u, v)
        if k % sample_every == 0 or k == n_steps:
            times.append(t)
            us.append(keep(u))
            vs.append(keep(v))
    return Trajectory(np.array(times), np.array(us), np.array(vs),
                      dt * np.arange(n_steps + 1), E, W)
