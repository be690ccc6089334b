"""Quick internal consistency checks, run by ``layerhom selftest``.

Each check returns (name, passed, message). They are small versions of the
property tests and finish in a few seconds.
"""
import numpy as np

from . import _kernels_py, kernels
from .fem import assemble_mass, assemble_stiffness, DofMap
from .grid import TensorGrid, uniform_nodes
from .newmark import march
from .operators import bending_coefficient, membrane_coefficient, sigma_xprime_general
from .stochastic import ProcessModel, sample_process


def _kernel_parity():
    rng = np.random.default_rng(0)
    hx = rng.uniform(0.1, 1.0, 8)
    hz = rng.uniform(0.1, 1.0, 8)
    lam = rng.uniform(0.0, 2.0, 8)
    mu = rng.uniform(0.1, 2.0, 8)
    memb = rng.uniform(0.0, 2.0, 8)
    a = kernels.q1_element_stiffness(hx, hz, lam, mu, memb)
    b = _kernels_py.q1_element_stiffness(hx, hz, lam, mu, memb)
    err = float(np.max(np.abs(a - b)) / np.max(np.abs(b)))
    return err < 1e-12, f"backend={kernels.BACKEND} rel.diff={err:.1e}"


def _operator_identities():
    worst = 0.0
    for l in (0.0, 1.0, 2.0, 10.0):
        worst = max(worst, abs(membrane_coefficient(l) - 4 * (l + 1) / (l + 2)),
                    abs(bending_coefficient(l) - 2 * (l + 1) / (l + 2)))
    s = sigma_xprime_general(0.0, 0.3, 0.2, -0.1)
    ok = worst < 1e-15 and s == (0.6, 0.4, -0.2)
    return ok, f"max coefficient error {worst:.1e}"


def _rigid_motion():
    g = TensorGrid(uniform_nodes(0, 1, 4), uniform_nodes(0, 1, 5))
    K = assemble_stiffness(g, 1.0, 1.0)
    X1, X3 = g.mesh()
    rot = np.stack([-X3, X1]).ravel()
    err = float(np.abs(K @ rot).max())
    return err < 1e-12, f"|K r| = {err:.1e}"


def _energy_balance():
    g = TensorGrid(uniform_nodes(0, 1, 6), uniform_nodes(0, 1, 6))
    dm = DofMap(g)
    K = dm.reduce(assemble_stiffness(g, 1.0, 1.0))
    M = dm.reduce(assemble_mass(g, 1.0))
    X1, X3 = g.mesh()
    u0 = dm.pick(np.stack([np.sin(np.pi * X1) * np.sin(np.pi * X3)] * 2))
    tr = march(M, K, 1e-2, 200, u0, np.zeros_like(u0))
    drift = float(tr.energy_residual().max())
    return drift < 1e-8, f"energy drift {drift:.1e}"


def _rng_determinism():
    m = ProcessModel("bernoulli_lattice", p=0.5, seed=7)
    a = sample_process(m, (0.0, 500.0), replica=3).points
    b = sample_process(m, (0.0, 500.0), replica=3).points
    c = sample_process(m, (100.0, 300.0), replica=3).points
    sub = a[(a > 100.0) & (a < 300.0)]
    ok = np.array_equal(a, b) and np.array_equal(sub, c)
    return ok, f"{a.size} points"


CHECKS = {
    "kernel_parity": _kernel_parity,
    "operator_identities": _operator_identities,
    "rigid_motion": _rigid_motion,
    "energy_balance": _energy_balance,
    "rng_determinism": _rng_determinism,
}


def run_all():
    out = []
    for name, fn in CHECKS.items():
        try:
            ok, msg = fn()
        except Exception as exc:  # report, don't abort the remaining checks
            ok, msg = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), msg))
    return out
