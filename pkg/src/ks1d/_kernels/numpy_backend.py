"""numpy/scipy reference implementation of the hot kernels."""

import numpy as np
from scipy.linalg import solve_banded


def diffusion_solve(f, coeff_faces, dt, h):
    f = np.ascontiguousarray(f, dtype=np.float64)
    c = np.ascontiguousarray(coeff_faces, dtype=np.float64)
    n = f.shape[0]
    if c.shape[0] != n - 1:
        raise ValueError("need one coefficient per interior face")
    theta = (dt / (h * h)) * c
    ab = np.zeros((3, n))
    ab[0, 1:] = -theta          # superdiagonal
    ab[2, :-1] = -theta         # subdiagonal
    ab[1, :] = 1.0
    ab[1, :-1] += theta
    ab[1, 1:] += theta
    return solve_banded((1, 1), ab, f)


def chemotaxis_rates(u, v, chi, h):
    u = np.ascontiguousarray(u, dtype=np.float64)
    v = np.ascontiguousarray(v, dtype=np.float64)
    n = u.shape[0]
    w = (chi / h) * np.diff(v)                    # drift speed at faces
    q = u[:-1] * np.maximum(w, 0.0) + u[1:] * np.minimum(w, 0.0)
    rates = np.zeros(n)
    rates[:-1] -= q / h
    rates[1:] += q / h
    return rates


def laplacian_neumann(f, h):
    f = np.ascontiguousarray(f, dtype=np.float64)
    out = np.empty_like(f)
    inv_h2 = 1.0 / (h * h)
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) * inv_h2
    out[0] = (f[1] - f[0]) * inv_h2
    out[-1] = (f[-2] - f[-1]) * inv_h2
    return out
