import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from layerhom.analysis import l2_error
from layerhom.errors import GridMismatch, NotPeriodic, RegimeMismatch, UnsupportedScaling
from layerhom.effective_solver import (
    INF,
    CriticalSchur,
    build_critical_problem,
    classify_regime,
    corrector_field,
    critical_operators,
    intermediate_operators,
    make_effective_problem,
    solve_cell_2d,
    solve_effective_critical,
    solve_effective_intermediate,
    solve_effective_static,
    solve_effective_stiff,
    solve_micro_static,
)
from layerhom.fine_solver import Loads
from layerhom.grid import TensorGrid, uniform_nodes
from layerhom.microstructure import build_layers
from layerhom.operators import MaterialScaling, SoftClass, membrane_coefficient

CRIT = MaterialScaling(a=0, b=1, c1=1.0, c2=0.25, l=1.0, soft=SoftClass("critical", 1.0, 0.5))


def _grid(n1, n3=None, periodic=False):
    return TensorGrid(uniform_nodes(0, 1, n1), uniform_nodes(0, 1, n3 or n1), periodic_x1=periodic)


def test_classify_examples():
    r = classify_regime(MaterialScaling(a=0, b=1, c1=2.0, c2=0.5))
    assert (r.k, r.kappa, r.theta) == (1.0, 0.0, 0.5)
    r = classify_regime(MaterialScaling(a=2, b=1, c1=2.0, c2=0.5))
    assert r.k == INF and r.kappa == pytest.approx(0.25) and r.theta == 0.5
    r = classify_regime(MaterialScaling(a=1, b=2, c1=3.0, c2=2.0))
    assert (r.k, r.kappa, r.theta) == (6.0, 0.0, 0.0)
    r = classify_regime(MaterialScaling(a=5, b=2, c1=1.0, c2=2.0))
    assert r.k == INF and r.kappa == 8.0
    with pytest.raises(UnsupportedScaling):
        classify_regime(MaterialScaling(a=0, b=2))


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 6), st.floats(1, 4))
def test_classify_consistent_with_exponents(a, b):
    sc = MaterialScaling(a=a, b=b, c2=0.5)
    if b - 1 - a > 1e-12:
        with pytest.raises(UnsupportedScaling):
            classify_regime(sc)
        return
    r = classify_regime(sc)
    # kappa <= k always; rigidity in bending implies in-plane rigidity
    assert r.kappa <= r.k
    assert r.fully_rigid <= r.inplane_rigid or r.k == INF


def _mms(m, lam=1.0, mu=1.0):
    pi2 = math.pi**2

    def u(X1, X3):
        p = np.sin(math.pi * X1) * np.sin(math.pi * X3)
        return np.stack([p, p])

    def f(X1, X3, t=0.0):
        s1, s3 = np.sin(math.pi * X1), np.sin(math.pi * X3)
        c1, c3 = np.cos(math.pi * X1), np.cos(math.pi * X3)
        p = s1 * s3
        grad_div = pi2 * (c1 * c3 - s1 * s3)
        base = 2 * pi2 * mu * p - (lam + mu) * grad_div
        return np.stack([base + m * pi2 * p, base])

    return u, f


def test_static_membrane_manufactured_second_order():
    sc = MaterialScaling(a=1, b=2, c1=1.0, c2=1.0, l=2.0)
    m = classify_regime(sc).k * membrane_coefficient(2.0)
    u_ex, f = _mms(m)
    errs = []
    for n in (8, 16, 32):
        g = _grid(n)
        u = solve_effective_static(make_effective_problem(sc, g, n=1.0), f)
        errs.append(l2_error(u, g.sample(u_ex), g))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 1.8)


def test_zero_density_is_homogeneous():
    u_ex, f = _mms(0.0)
    g = _grid(16)
    for sc in (MaterialScaling(a=1, b=2), MaterialScaling(a=2, b=2), MaterialScaling(a=5, b=2)):
        u = solve_effective_static(make_effective_problem(sc, g, n=0.0), f)
        ref = solve_effective_static(make_effective_problem(MaterialScaling(a=1, b=2), g, n=0.0), f)
        np.testing.assert_allclose(u, ref, atol=1e-13)


def test_rigid_limits_mask_exactly():
    g = _grid(8)
    n = np.zeros(8)
    n[3:5] = 1.0
    f = lambda X1, X3: np.stack([np.ones_like(X1), np.ones_like(X1)])
    # k = inf, kappa finite: u1 vanishes where n > 0
    ep = make_effective_problem(MaterialScaling(a=3, b=2), g, n=n)
    u = solve_effective_static(ep, f)
    on = ep.n_nodes > 0
    assert np.all(u[0][:, on] == 0.0) and np.abs(u[1][1:-1][:, on]).max() > 0
    # kappa = inf everywhere: full zero
    ep = make_effective_problem(MaterialScaling(a=3, b=1, c2=0.5), g, n=1.0)
    ep_ok = make_effective_problem(MaterialScaling(a=4, b=1.5, c1=1.0, c2=0.5, l=0.0,
                                                    soft=SoftClass("unit")), g, n=1.0)
    assert classify_regime(ep.scaling).fully_rigid
    with pytest.raises(RegimeMismatch):
        solve_effective_static(ep, f)
    assert ep_ok.regime.fully_rigid
    assert np.all(solve_effective_static(ep_ok, f) == 0.0)


def test_stiff_energy_conserved_and_zero_data():
    sc = MaterialScaling(a=1, b=2, l=1.0)
    g = _grid(8)
    ep = make_effective_problem(sc, g, n=1.0, T=0.1, dt=1e-3)
    tr = solve_effective_stiff(ep)
    assert np.all(tr.u == 0)
    a0 = lambda X1, X3: np.stack([np.sin(np.pi * X1) * X3 * (1 - X3), np.sin(2 * np.pi * X3) * X1 * (1 - X1)])
    ep = make_effective_problem(sc, g, n=1.0, loads=Loads(a0=a0), T=1.0, dt=1e-3)
    tr = solve_effective_stiff(ep)
    assert tr.energy_residual().max() <= 1e-8


def test_stiff_rejects_other_classes():
    g = _grid(4)
    with pytest.raises(RegimeMismatch):
        solve_effective_stiff(make_effective_problem(CRIT, g, n=1.0))


def test_intermediate_free_flight_without_layers():
    sc = MaterialScaling(a=1, b=2, soft=SoftClass("intermediate", 1.0, 1.0, s=1.0))
    g = _grid(4)
    a0, b0, f0 = np.array([0.3, -0.2]), np.array([0.1, 0.5]), np.array([1.0, -2.0])
    loads = Loads(f=lambda X1, X3, t: f0[:, None, None] + 0 * X1,
                  a0=a0[:, None, None], b0=b0[:, None, None])
    ep = make_effective_problem(sc, g, n=0.0, loads=loads, T=0.5, dt=0.01)
    tr = solve_effective_intermediate(ep)
    t = tr.times[-1]
    expect = a0 + b0 * t + 0.5 * f0 * t**2
    np.testing.assert_allclose(tr.u[-1], np.broadcast_to(expect[:, None, None], tr.u[-1].shape), atol=1e-12)


def test_intermediate_membrane_mode():
    sc = MaterialScaling(a=1, b=2, c1=1.0, c2=1.0, l=0.0, soft=SoftClass("intermediate", 1.0, 1.0))
    k = classify_regime(sc).k  # c1 c2 = 1
    assert k == 1.0
    g = _grid(32, 4)
    omega = math.pi * math.sqrt(k * membrane_coefficient(0.0) / (sc.rho + sc.rho_bar))
    a0 = lambda X1, X3: np.stack([np.sin(np.pi * X1), 0 * X1])
    T = 2 * math.pi / omega
    ep = make_effective_problem(sc, g, n=1.0, loads=Loads(a0=a0), T=T, dt=T / 400)
    tr = solve_effective_intermediate(ep, sample_every=100)
    X1, _ = g.mesh()
    for t, u in zip(tr.times, tr.u):
        np.testing.assert_allclose(u[0], np.cos(omega * t) * np.sin(np.pi * X1), atol=5e-3)
    assert tr.energy_residual().max() <= 1e-8
    K, M, dm = intermediate_operators(ep)
    # clamped x1 ends for the membrane component only
    assert dm.n_free == 31 * 5 + 33 * 5


def _crit(eps=0.25, sc=CRIT, n1=8, m=8, loads=None, T=0.5, dt=0.01):
    ls = build_layers("periodic", eps, sc.r(eps), 1.0, 0.5)
    return ls, build_critical_problem(ls, sc, n1=n1, micro_cells=m, loads=loads, T=T, dt=dt)


def test_critical_zero_data_stays_zero():
    _, cp = _crit()
    ts = solve_effective_critical(cp, sample_every=10)
    assert np.all(ts.V == 0) and np.all(ts.micro == 0)


def _bump(X1, X3, t=0.0):
    b = np.exp(-((X1 - 0.5) ** 2 + (X3 - 0.5) ** 2) / 0.05)
    return np.stack([b * np.sin(3 * t + 0.3), b * np.cos(2 * t)])


def test_critical_schur_matches_direct_and_conserves_energy():
    _, cp = _crit(loads=Loads(f=_bump))
    a = solve_effective_critical(cp, sample_every=5, method="schur")
    b = solve_effective_critical(cp, sample_every=5, method="direct")
    np.testing.assert_allclose(a.V, b.V, atol=1e-12)
    np.testing.assert_allclose(a.micro, b.micro, atol=1e-12)
    assert np.abs(a.V).max() > 1e-4
    assert a.energy_residual().max() <= 1e-6
    # micro ends coincide with the macro lines
    np.testing.assert_array_equal(a.micro[..., 0], a.V)
    np.testing.assert_array_equal(a.micro[..., -1], a.V)


def test_critical_operators_symmetric_and_schur_exact():
    _, cp = _crit()
    lay, _, _, K, M = critical_operators(cp)
    assert abs(K - K.T).max() < 1e-12 and abs(M - M.T).max() < 1e-12
    A = (K + 4 / 0.01**2 * M).tocsr()
    b = np.random.default_rng(2).normal(size=lay.n)
    x = CriticalSchur(A, lay).solve(b)
    np.testing.assert_allclose(A @ x, b, atol=1e-9)


def test_critical_energy_free_vibration():
    a0 = lambda X1, X3: np.stack([np.sin(np.pi * X1), np.sin(2 * np.pi * X1)]) * X3 * (1 - X3)
    _, cp = _crit(loads=Loads(a0=a0), T=10.0, dt=0.01)
    ts = solve_effective_critical(cp)
    assert ts.energy[0] > 0
    assert ts.energy_residual().max() <= 1e-8


def test_critical_fully_rigid_lines_stay_still():
    sc = MaterialScaling(a=3, b=1, c1=1.0, c2=0.25, soft=SoftClass("critical", 1.0, 0.5))
    _, cp = _crit(sc=sc, loads=Loads(f=_bump))
    ts = solve_effective_critical(cp, sample_every=10)
    assert np.all(ts.V == 0)
    assert np.abs(ts.micro).max() > 0


def test_critical_needs_periodic_layers():
    eps = 0.25
    ls = build_layers("explicit", eps, CRIT.r(eps), 1.0, 0.5, centers=[0.3, 0.6])
    with pytest.raises(NotPeriodic):
        build_critical_problem(ls, CRIT)


def test_micro_static_constant_and_parabola():
    p = solve_micro_static((0.7, -0.2), (0.0, 0.0), 1.0, 0.5, theta=0.25, m=16)
    assert np.allclose(p.u1, 0.7) and np.allclose(p.u3, -0.2)
    mu, lam, th = 2.0, 1.0, 0.25
    p = solve_micro_static((0.1, 0.2), (1.0, 3.0), mu, lam, theta=th, m=16)
    ell = 1 - th
    s = p.s
    np.testing.assert_allclose(p.u1, 0.1 + 1.0 / (2 * mu) * s * (ell - s), atol=1e-13)
    np.testing.assert_allclose(p.u3, 0.2 + 3.0 / (2 * (lam + 2 * mu)) * s * (ell - s), atol=1e-13)


def test_cell_2d_matches_1d():
    grid, u = solve_cell_2d((0.3, -0.1), (1.0, 2.0), 1.5, 0.5, theta=0.2, m1=6, m3=32)
    assert np.abs(u - u[:, :1, :]).max() <= 1e-8
    p = solve_micro_static((0.3, -0.1), (1.0, 2.0), 1.5, 0.5, theta=0.2, m=32)
    np.testing.assert_allclose(u[0, 0], p.u1, atol=1e-12)
    np.testing.assert_allclose(u[1, 0], p.u3, atol=1e-12)


def test_corrector_field():
    eps = 0.25
    ls, cp = _crit(eps, loads=Loads(f=_bump))
    ts = solve_effective_critical(cp, sample_every=25)
    x3 = np.unique(np.concatenate([uniform_nodes(0, 1, 64), ls.centers]))
    g = TensorGrid(cp.x1, x3)
    uc = corrector_field(ts, ls, eps, g)
    assert uc.shape == (ts.times.size, 2) + g.shape
    for j, c in enumerate(ls.centers):
        col = int(np.flatnonzero(np.isclose(x3, c))[0])
        np.testing.assert_array_equal(uc[:, :, :, col], ts.V[:, :, :, j])
    # constant profiles reproduce the constant everywhere
    ts.micro[:] = 1.25
    ts.V[:] = 1.25
    assert np.all(corrector_field(ts, ls, eps, g, sample=0) == 1.25)
    with pytest.raises(GridMismatch):
        corrector_field(ts, ls, 0.125, g)
    with pytest.raises(GridMismatch):
        corrector_field(ts, ls, eps, TensorGrid(uniform_nodes(0, 1, 5), x3))
