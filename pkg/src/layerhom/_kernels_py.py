"""Pure-NumPy versions of the hot kernels.

Same signatures and results as the compiled ``_kernels`` extension; used when
the extension is not built or ``LAYERHOM_PURE_PYTHON=1`` is set.
"""
import numpy as np

# 1D linear-element reference integrals on [0, 1]
_K1 = np.array([[1.0, -1.0], [-1.0, 1.0]])
_M1 = np.array([[1.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 1.0 / 3.0]])
# _G[p, q] = int X_p' X_q
_G = np.array([[-0.5, -0.5], [0.5, 0.5]])

# local node a = 2*ia + ja
_IA = np.array([0, 0, 1, 1])
_JA = np.array([0, 1, 0, 1])

R11 = _K1[_IA[:, None], _IA[None, :]] * _M1[_JA[:, None], _JA[None, :]]
R33 = _M1[_IA[:, None], _IA[None, :]] * _K1[_JA[:, None], _JA[None, :]]
R13 = _G[_IA[:, None], _IA[None, :]] * _G[_JA[None, :], _JA[:, None]]
RM = _M1[_IA[:, None], _IA[None, :]] * _M1[_JA[:, None], _JA[None, :]]


def q1_element_stiffness(hx, hz, lam, mu, memb):
    """Element stiffness blocks for bilinear plane-strain elements.

    All inputs are 1D arrays over cells. ``memb`` is an extra coefficient on
    the u1-u1 ``d1 d1`` term (layer membrane stiffness). Returns an array of
    shape (ncell, 8, 8) with local DOFs ordered [u1 at 4 nodes, u3 at 4 nodes].
    """
    hx = np.asarray(hx, dtype=float)
    hz = np.asarray(hz, dtype=float)
    lam = np.asarray(lam, dtype=float)
    mu = np.asarray(mu, dtype=float)
    memb = np.asarray(memb, dtype=float)
    ra = (hz / hx)[:, None, None]
    rb = (hx / hz)[:, None, None]
    lam_ = lam[:, None, None]
    mu_ = mu[:, None, None]
    i11 = ra * R11
    i33 = rb * R33
    i13 = np.broadcast_to(R13, i11.shape)
    ke = np.empty((hx.size, 8, 8))
    ke[:, :4, :4] = (lam_ + 2.0 * mu_ + memb[:, None, None]) * i11 + mu_ * i33
    ke[:, 4:, 4:] = (lam_ + 2.0 * mu_) * i33 + mu_ * i11
    k13 = lam_ * i13 + mu_ * np.swapaxes(i13, 1, 2)
    ke[:, :4, 4:] = k13
    ke[:, 4:, :4] = np.swapaxes(k13, 1, 2)
    return ke


def q1_element_mass(hx, hz, rho):
    """Consistent scalar mass matrices, shape (ncell, 4, 4)."""
    w = np.asarray(rho, dtype=float) * np.asarray(hx, dtype=float) * np.asarray(hz, dtype=float)
    return w[:, None, None] * RM


def tridiag_solve(lower, diag, upper, rhs):
    """Solve one tridiagonal system against many right-hand sides.

    ``lower[i]`` multiplies x[i-1] in row i (lower[0] unused), ``upper[i]``
    multiplies x[i+1] (upper[-1] unused). ``rhs`` has shape (batch, n).
    """
    lower = np.asarray(lower, dtype=float)
    diag = np.asarray(diag, dtype=float)
    upper = np.asarray(upper, dtype=float)
    d = np.array(rhs, dtype=float, copy=True)
    n = diag.size
    cp = np.empty(n)
    cp[0] = upper[0] / diag[0] if n > 1 else 0.0
    d[:, 0] /= diag[0]
    for i in range(1, n):
        m = diag[i] - lower[i] * cp[i - 1]
        if i < n - 1:
            cp[i] = upper[i] / m
        d[:, i] = (d[:, i] - lower[i] * d[:, i - 1]) / m
    for i in range(n - 2, -1, -1):
        d[:, i] -= cp[i] * d[:, i + 1]
    return d


def tridiag_solve_batched(lower, diag, upper, rhs):
    """Thomas algorithm with per-system coefficients; all arrays (batch, n)."""
    lower = np.asarray(lower, dtype=float)
    diag = np.asarray(diag, dtype=float)
    upper = np.asarray(upper, dtype=float)
    d = np.array(rhs, dtype=float, copy=True)
    n = diag.shape[1]
    cp = np.zeros_like(diag)
    if n > 1:
        cp[:, 0] = upper[:, 0] / diag[:, 0]
    d[:, 0] /= diag[:, 0]
    for i in range(1, n):
        m = diag[:, i] - lower[:, i] * cp[:, i - 1]
        if i < n - 1:
            cp[:, i] = upper[:, i] / m
        d[:, i] = (d[:, i] - lower[:, i] * d[:, i - 1]) / m
    for i in range(n - 2, -1, -1):
        d[:, i] -= cp[:, i] * d[:, i + 1]
    return d
