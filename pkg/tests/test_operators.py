import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from layerhom.errors import RegimeMismatch, ValidationError
from layerhom.grid import TensorGrid, uniform_nodes
from layerhom.operators import (
    MaterialScaling,
    MicroProfile,
    SoftClass,
    StrainField,
    bending_coefficient,
    bending_pair,
    cell_strain,
    effective_bilinear,
    isotropic_stress,
    membrane_coefficient,
    second_derivative_x1,
    sigma_xprime,
    sigma_xprime_general,
    traction_jump_1d,
)


def _grid(n1=8, n3=6):
    return TensorGrid(uniform_nodes(0, 1, n1), uniform_nodes(0, 1, n3))


def _strain(e11, e13, e33):
    return StrainField(np.asarray(e11, float), np.asarray(e13, float), np.asarray(e33, float))


def test_isotropic_stress_examples():
    s = isotropic_stress(0.0, 1.0, _strain(1, 0, 1))
    assert (s.s11, s.s13, s.s33) == (2, 0, 2)
    s = isotropic_stress(1.0, 1.0, _strain(1, 0, 0))
    assert (s.s11, s.s13, s.s33) == (3, 0, 1)
    s = isotropic_stress(1.0, 1.0, _strain(0, 0, 0))
    assert (s.s11, s.s13, s.s33) == (0, 0, 0)


@pytest.mark.parametrize("l, expected", [(0.0, 2.0), (2.0, 3.0)])
def test_sigma_xprime_linear_psi(l, expected):
    g = _grid()
    X1, _ = g.mesh()
    psi = np.stack([X1, np.zeros_like(X1)])
    s11, s12, _ = sigma_xprime(l, psi, g)
    np.testing.assert_allclose(s11, expected, rtol=1e-14)
    assert np.all(s12 == 0)


def test_sigma_xprime_constant_is_zero():
    g = _grid()
    psi = np.full((2,) + g.shape, 0.7)
    s11, _, _ = sigma_xprime(1.0, psi, g)
    np.testing.assert_allclose(s11, 0, atol=1e-14)


def test_sigma_xprime_general_at_l0_is_twice_strain():
    rng = np.random.default_rng(0)
    e = rng.normal(size=(3, 5))
    s = sigma_xprime_general(0.0, *e)
    np.testing.assert_array_equal(np.stack(s), 2 * e)


def test_bending_pair_examples():
    x = np.linspace(0, 1, 21)
    bp = bending_pair(2.0, x**2, x)
    np.testing.assert_allclose(bp.H11, 2, rtol=1e-10)
    np.testing.assert_allclose(bp.Hs11, 3, rtol=1e-10)
    np.testing.assert_allclose(bp.Hs22, 1, rtol=1e-10)
    bl = bending_pair(1.0, 3 * x - 1, x)
    np.testing.assert_allclose(bl.H11, 0, atol=1e-10)
    np.testing.assert_allclose(bl.Hs11, 0, atol=1e-10)


def test_bending_pair_l0_collapses():
    x = np.linspace(0, 1, 17)
    bp = bending_pair(0.0, np.sin(3 * x), x)
    np.testing.assert_array_equal(bp.Hs11, bp.H11)
    np.testing.assert_array_equal(bp.Hs22, bp.H22)


def test_second_derivative_exact_on_cubic_interior():
    x = np.linspace(0, 2, 11)
    d = second_derivative_x1(x**3, x)
    np.testing.assert_allclose(d[1:-1], 6 * x[1:-1], rtol=1e-10)
    with pytest.raises(ValidationError):
        second_derivative_x1(x**2, x**2)


@pytest.mark.parametrize("l", [0.0, 1.0, 2.0, 10.0])
def test_membrane_form_linear_psi(l):
    g = _grid()
    X1, _ = g.mesh()
    u = np.stack([X1, np.zeros_like(X1)])
    val = effective_bilinear("membrane", 1.0, l, 1.0, u, u, g)
    assert val == pytest.approx(4 * (l + 1) / (l + 2), rel=1e-13)


def test_n_zero_gives_zero():
    g = _grid()
    rng = np.random.default_rng(1)
    u = rng.normal(size=(2,) + g.shape)
    assert effective_bilinear("membrane", 1.0, 1.0, 0.0, u, u, g) == 0.0
    assert effective_bilinear("bending", 1.0, 1.0, 0.0, u[0], u[0], g) == 0.0


def test_bending_form_quadratic():
    g = TensorGrid(uniform_nodes(0, 1, 20), uniform_nodes(0, 1, 4))
    X1, _ = g.mesh()
    val = effective_bilinear("bending", 6.0, 0.0, 1.0, X1**2, X1**2, g)
    assert val == pytest.approx(4.0, rel=1e-10)


def test_form_shape_checks():
    g = _grid()
    with pytest.raises(RegimeMismatch):
        effective_bilinear("bending", 1.0, 0.0, 1.0, np.zeros((2,) + g.shape), np.zeros((2,) + g.shape), g)
    with pytest.raises(RegimeMismatch):
        effective_bilinear("membrane", 1.0, 0.0, 1.0, np.zeros(g.shape), np.zeros(g.shape), g)
    with pytest.raises(RegimeMismatch):
        effective_bilinear("torsion", 1.0, 0.0, 1.0, np.zeros(g.shape), np.zeros(g.shape), g)


def test_traction_examples():
    s = np.linspace(0, 1, 11)
    const = MicroProfile(s, np.full_like(s, 2.0), np.full_like(s, -1.0))
    np.testing.assert_allclose(traction_jump_1d(const, 1.0, 1.0), 0, atol=1e-13)
    # slope +1 on the side above the layer (s = 0), -1 below the next one (s = ell)
    v = np.where(s < 0.5, s, 1 - s)
    g = traction_jump_1d(MicroProfile(s, v, v), 1.0, 0.0)
    assert g[0] == pytest.approx(2.0)  # mu0 (1 - (-1))
    assert g[2] == pytest.approx(4.0)  # (lam0 + 2 mu0)(1 - (-1))
    g = traction_jump_1d(MicroProfile(s, s.copy(), np.zeros_like(s)), 1.0, 0.0)
    assert g[0] == pytest.approx(0.0, abs=1e-13)
    assert g[1] == 0.0


def test_coefficient_values():
    for l in (0.0, 1.0, 2.0, 10.0):
        assert membrane_coefficient(l) == 4 * (l + 1) / (l + 2)
        assert bending_coefficient(l) == 2 * (l + 1) / (l + 2)


def test_scaling_validation():
    with pytest.raises(ValidationError):
        MaterialScaling(a=0, b=0.5)
    with pytest.raises(ValidationError):
        MaterialScaling(a=0, b=1, c2=1.0)
    with pytest.raises(ValidationError):
        SoftClass("intermediate", s=2.5)
    sc = MaterialScaling(a=1, b=2, c1=2.0, c2=0.5, l=1.0, rho_bar=3.0)
    eps = 0.1
    assert sc.mu1(eps) == pytest.approx(20.0)
    assert sc.lam1(eps) == pytest.approx(20.0)
    assert sc.r(eps) == pytest.approx(0.005)
    assert sc.layer_density(eps) == pytest.approx(eps / 0.005 * 3.0)
    crit = MaterialScaling(a=0, b=1, c2=0.25, soft=SoftClass("critical", 2.0, 1.0))
    assert crit.mu0(0.1) == pytest.approx(0.02)


def test_cell_strain_linear_field():
    g = _grid()
    X1, X3 = g.mesh()
    u = np.stack([2 * X1 + 3 * X3, -X1 + 0.5 * X3])
    e = cell_strain(u, g)
    np.testing.assert_allclose(e.e11, 2)
    np.testing.assert_allclose(e.e13, 1)
    np.testing.assert_allclose(e.e33, 0.5)


fields = st.integers(0, 2**31)


@settings(max_examples=40, deadline=None)
@given(fields, st.floats(0, 10), st.sampled_from(["const", "cells", "nodes"]))
def test_forms_symmetric_and_psd(seed, l, nkind):
    g = TensorGrid(uniform_nodes(0, 1, 9), uniform_nodes(0, 1, 5))
    rng = np.random.default_rng(seed)
    n = {"const": 1.0, "cells": rng.uniform(0, 2, g.shape[1] - 1),
         "nodes": rng.uniform(0, 2, g.shape[1])}[nkind]
    u, v = rng.normal(size=(2, 2) + g.shape)
    a = effective_bilinear("membrane", 1.3, l, n, u, v, g)
    b = effective_bilinear("membrane", 1.3, l, n, v, u, g)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-12)
    assert effective_bilinear("membrane", 1.3, l, n, u, u, g) >= 0
    a = effective_bilinear("bending", 0.7, l, n, u[0], v[0], g)
    b = effective_bilinear("bending", 0.7, l, n, v[0], u[0], g)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-12)
    assert effective_bilinear("bending", 0.7, l, n, u[0], u[0], g) >= 0


@settings(max_examples=40, deadline=None)
@given(fields, st.floats(-3, 3), st.floats(0.1, 3), st.floats(0, 3))
def test_traction_is_linear(seed, c, mu0, lam0):
    rng = np.random.default_rng(seed)
    s = np.linspace(0, 0.75, 13)
    a = MicroProfile(s, *rng.normal(size=(2, 13)))
    b = MicroProfile(s, *rng.normal(size=(2, 13)))
    ab = MicroProfile(s, a.u1 + c * b.u1, a.u3 + c * b.u3)
    np.testing.assert_allclose(traction_jump_1d(ab, mu0, lam0, 0.25),
                               traction_jump_1d(a, mu0, lam0, 0.25) + c * traction_jump_1d(b, mu0, lam0, 0.25),
                               atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 50), st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_membrane_integrand_nonnegative(l, e11, e12, e22):
    s = sigma_xprime_general(l, e11, e12, e22)
    val = e11 * s[0] + 2 * e12 * s[1] + e22 * s[2]
    expected = 2 * (e11**2 + 2 * e12**2 + e22**2) + 2 * l / (l + 2) * (e11 + e22) ** 2
    assert val == pytest.approx(expected, rel=1e-12, abs=1e-12)
    assert val >= -1e-12
