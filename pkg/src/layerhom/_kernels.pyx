# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: Q1 element matrices and tridiagonal sweeps."""
import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef double K1[2][2]
cdef double M1[2][2]
cdef double G[2][2]
K1[0][0] = 1.0; K1[0][1] = -1.0; K1[1][0] = -1.0; K1[1][1] = 1.0
M1[0][0] = 1.0 / 3.0; M1[0][1] = 1.0 / 6.0; M1[1][0] = 1.0 / 6.0; M1[1][1] = 1.0 / 3.0
G[0][0] = -0.5; G[0][1] = -0.5; G[1][0] = 0.5; G[1][1] = 0.5


def q1_element_stiffness(hx, hz, lam, mu, memb):
    cdef const double[::1] hx_ = np.ascontiguousarray(hx, dtype=np.float64)
    cdef const double[::1] hz_ = np.ascontiguousarray(hz, dtype=np.float64)
    cdef const double[::1] lam_ = np.ascontiguousarray(lam, dtype=np.float64)
    cdef const double[::1] mu_ = np.ascontiguousarray(mu, dtype=np.float64)
    cdef const double[::1] memb_ = np.ascontiguousarray(memb, dtype=np.float64)
    cdef Py_ssize_t nc = hx_.shape[0]
    out = np.empty((nc, 8, 8), dtype=np.float64)
    cdef double[:, :, ::1] ke = out
    cdef Py_ssize_t e, a, b
    cdef int ia, ja, ib, jb
    cdef double ra, rb, r11, r33, r13, r31, l, m, c11
    for e in range(nc):
        ra = hz_[e] / hx_[e]
        rb = hx_[e] / hz_[e]
        l = lam_[e]
        m = mu_[e]
        c11 = l + 2.0 * m
        for a in range(4):
            ia = a // 2
            ja = a % 2
            for b in range(4):
                ib = b // 2
                jb = b % 2
                r11 = ra * K1[ia][ib] * M1[ja][jb]
                r33 = rb * M1[ia][ib] * K1[ja][jb]
                r13 = G[ia][ib] * G[jb][ja]
                r31 = G[ib][ia] * G[ja][jb]
                ke[e, a, b] = (c11 + memb_[e]) * r11 + m * r33
                ke[e, 4 + a, 4 + b] = c11 * r33 + m * r11
                ke[e, a, 4 + b] = l * r13 + m * r31
                ke[e, 4 + b, a] = l * r13 + m * r31
    return out


def q1_element_mass(hx, hz, rho):
    cdef const double[::1] hx_ = np.ascontiguousarray(hx, dtype=np.float64)
    cdef const double[::1] hz_ = np.ascontiguousarray(hz, dtype=np.float64)
    cdef const double[::1] rho_ = np.ascontiguousarray(rho, dtype=np.float64)
    cdef Py_ssize_t nc = hx_.shape[0]
    out = np.empty((nc, 4, 4), dtype=np.float64)
    cdef double[:, :, ::1] me = out
    cdef Py_ssize_t e, a, b
    cdef double w
    for e in range(nc):
        w = rho_[e] * hx_[e] * hz_[e]
        for a in range(4):
            for b in range(4):
                me[e, a, b] = w * M1[a // 2][b // 2] * M1[a % 2][b % 2]
    return out


def tridiag_solve(lower, diag, upper, rhs):
    cdef const double[::1] lo = np.ascontiguousarray(lower, dtype=np.float64)
    cdef const double[::1] di = np.ascontiguousarray(diag, dtype=np.float64)
    cdef const double[::1] up = np.ascontiguousarray(upper, dtype=np.float64)
    out = np.array(rhs, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] d = out
    cdef Py_ssize_t n = di.shape[0]
    cdef Py_ssize_t nb = d.shape[0]
    cdef double[::1] cp = np.empty(n, dtype=np.float64)
    cdef double[::1] inv = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t i, k
    cdef double m
    inv[0] = 1.0 / di[0]
    cp[0] = up[0] * inv[0] if n > 1 else 0.0
    for i in range(1, n):
        m = di[i] - lo[i] * cp[i - 1]
        inv[i] = 1.0 / m
        cp[i] = up[i] * inv[i] if i < n - 1 else 0.0
    for k in range(nb):
        d[k, 0] *= inv[0]
        for i in range(1, n):
            d[k, i] = (d[k, i] - lo[i] * d[k, i - 1]) * inv[i]
        for i in range(n - 2, -1, -1):
            d[k, i] -= cp[i] * d[k, i + 1]
    return out


def tridiag_solve_batched(lower, diag, upper, rhs):
    cdef const double[:, ::1] lo = np.ascontiguousarray(lower, dtype=np.float64)
    cdef const double[:, ::1] di = np.ascontiguousarray(diag, dtype=np.float64)
    cdef const double[:, ::1] up = np.ascontiguousarray(upper, dtype=np.float64)
    out = np.array(rhs, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] d = out
    cdef Py_ssize_t nb = di.shape[0]
    cdef Py_ssize_t n = di.shape[1]
    cdef double[::1] cp = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t i, k
    cdef double m
    for k in range(nb):
        cp[0] = up[k, 0] / di[k, 0] if n > 1 else 0.0
        d[k, 0] /= di[k, 0]
        for i in range(1, n):
            m = di[k, i] - lo[k, i] * cp[i - 1]
            if i < n - 1:
                cp[i] = up[k, i] / m
            d[k, i] = (d[k, i] - lo[k, i] * d[k, i - 1]) / m
        for i in range(n - 2, -1, -1):
            d[k, i] -= cp[i] * d[k, i + 1]
    return out
