# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementation of the hot kernels.

The tridiagonal solve keeps the M-matrix sign structure explicit
(multipliers and updates are sums/quotients of nonnegatives), so a
nonnegative right-hand side yields a nonnegative solution even in
floating point.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def diffusion_solve(const double[::1] f, const double[::1] coeff_faces, double dt, double h):
    cdef Py_ssize_t n = f.shape[0]
    if coeff_faces.shape[0] != n - 1:
        raise ValueError("need one coefficient per interior face")
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] x = out
    cdef double[::1] d = np.empty(n, dtype=np.float64)
    cdef double[::1] g = np.empty(n, dtype=np.float64)
    cdef double scale = dt / (h * h)
    cdef double theta_prev, theta_next, m
    cdef Py_ssize_t i

    theta_prev = 0.0
    d[0] = 1.0 + (scale * coeff_faces[0] if n > 1 else 0.0)
    g[0] = f[0]
    for i in range(1, n):
        theta_prev = scale * coeff_faces[i - 1]
        theta_next = scale * coeff_faces[i] if i < n - 1 else 0.0
        m = theta_prev / d[i - 1]
        d[i] = 1.0 + theta_next + theta_prev * (1.0 - m)
        g[i] = f[i] + m * g[i - 1]
    x[n - 1] = g[n - 1] / d[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = (g[i] + scale * coeff_faces[i] * x[i + 1]) / d[i]
    return out


def chemotaxis_rates(const double[::1] u, const double[::1] v, double chi, double h):
    cdef Py_ssize_t n = u.shape[0]
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] rates = out
    cdef double inv_h = 1.0 / h
    cdef double w, q
    cdef Py_ssize_t i
    for i in range(n - 1):
        w = chi * (v[i + 1] - v[i]) * inv_h
        if w >= 0.0:
            q = u[i] * w
        else:
            q = u[i + 1] * w
        rates[i] -= q * inv_h
        rates[i + 1] += q * inv_h
    return out


def laplacian_neumann(const double[::1] f, double h):
    cdef Py_ssize_t n = f.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] lap = out
    cdef double inv_h2 = 1.0 / (h * h)
    cdef Py_ssize_t i
    lap[0] = (f[1] - f[0]) * inv_h2
    for i in range(1, n - 1):
        lap[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * inv_h2
    lap[n - 1] = (f[n - 2] - f[n - 1]) * inv_h2
    return out
