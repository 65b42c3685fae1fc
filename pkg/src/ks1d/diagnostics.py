"""Scalar functionals sampled along trajectories.

Quadrature conventions
----------------------
Integrals of cell quantities use the midpoint rule h * sum(.).  Gradient
integrals use one-sided face differences.  Two face weightings appear:

* ``zero``      -- only interior faces, each weighted h.  The boundary
  faces contribute nothing, mirroring the no-flux dynamics.
* ``extended``  -- interior faces weighted h, with the first/last face
  additionally covering the boundary half-cells (weight 3h/2; both
  halves fall on the single face when n = 2).  This keeps the quadrature
  second order for data that does not satisfy the no-flux condition,
  and is what the energy functional and norm checks use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discretization import assemble_v_rhs
from .errors import InputDomainError
from .model import GridSpec, Params, State, as_cell_field, cumulative_integral

__all__ = [
    "mass", "v_mean", "lp_norm", "llogl", "gradient_energy",
    "grad_log_energy", "w12_norm_sq", "moment_L", "lyapunov", "vt_l2",
    "DiagnosticsRecord", "sample_diagnostics", "DissipationReport",
    "dissipation_check", "vt_l2_time_integral",
]


def mass(u, grid: GridSpec) -> float:
    return grid.h * float(np.sum(as_cell_field(u, grid.n_cells)))


def v_mean(v, grid: GridSpec) -> float:
    return grid.h * float(np.sum(as_cell_field(v, grid.n_cells)))


def lp_norm(f, p: float, grid: GridSpec) -> float:
    """Discrete L^p norm, p >= 1."""
    if p < 1:
        raise InputDomainError("p must be >= 1")
    f = as_cell_field(f, grid.n_cells)
    return float((grid.h * np.sum(np.abs(f) ** p)) ** (1.0 / p))


def llogl(u, grid: GridSpec) -> float:
    """integral (u+1) log(u+1) for nonnegative u."""
    u = as_cell_field(u, grid.n_cells)
    if np.any(u < 0):
        raise InputDomainError("llogl needs nonnegative density")
    return grid.h * float(np.sum((u + 1.0) * np.log1p(u)))


def _face_weights(n: int, h: float, convention: str) -> np.ndarray:
    w = np.full(n - 1, h)
    if convention == "extended":
        w[0] += 0.5 * h
        w[-1] += 0.5 * h
    elif convention != "zero":
        raise InputDomainError(f"unknown gradient convention {convention!r}")
    return w


def gradient_energy(f, grid: GridSpec, convention: str = "extended") -> float:
    """integral |f_x|^2 from face differences (see module docstring)."""
    f = as_cell_field(f, grid.n_cells)
    slopes = np.diff(f) / grid.h
    w = _face_weights(grid.n_cells, grid.h, convention)
    return float(np.sum(w * slopes * slopes))


def grad_log_energy(u, grid: GridSpec) -> float:
    """integral |(log(1+u))_x|^2 for nonnegative u."""
    u = as_cell_field(u, grid.n_cells)
    if np.any(u < 0):
        raise InputDomainError("grad_log_energy needs nonnegative density")
    return gradient_energy(np.log1p(u), grid, convention="extended")


def w12_norm_sq(f, grid: GridSpec) -> float:
    """Squared W^{1,2} norm: integral f^2 + integral |f_x|^2."""
    f = as_cell_field(f, grid.n_cells)
    return (grid.h * float(np.sum(f * f))
            + gradient_energy(f, grid, convention="extended"))


def moment_L(u, q: float, grid: GridSpec) -> float:
    """(1/q) * integral |U|^q where U is the running integral of u,
    evaluated at right cell edges (first-order quadrature)."""
    if q <= 1:
        raise InputDomainError("q must be > 1")
    U = cumulative_integral(u, grid)
    return float(grid.h * np.sum(np.abs(U) ** q)) / q


def lyapunov(state: State, profile, grid: GridSpec) -> float:
    """Energy functional: integral (b(u) - u v) + (1/2) integral |v_x|^2."""
    b_vals = profile.b(np.maximum(state.u, 0.0))
    bulk = grid.h * float(np.sum(b_vals - state.u * state.v))
    return bulk + 0.5 * gradient_energy(state.v, grid, convention="extended")


def vt_l2(state: State, params: Params, grid: GridSpec) -> float:
    """L^2 norm of the chemoattractant rate, from the assembled rhs."""
    rates = assemble_v_rhs(state, params, grid)
    return float(np.sqrt(grid.h * np.sum(rates * rates)))


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One sampled row of trajectory diagnostics."""

    t: float
    dt: float
    mass: float
    v_mean: float
    u_max: float
    lyapunov: float
    moment: float
    lp2: float
    lp3: float
    llogl: float
    grad_log_energy: float
    vt_l2: float
    dissipation_residual: float
    b_floor_hits: int


def sample_diagnostics(state: State, dt: float, params: Params, profile,
                       grid: GridSpec, q: float,
                       prev: DiagnosticsRecord | None = None) -> DiagnosticsRecord:
    """Evaluate all tracked functionals at a state.

    The dissipation residual compares the energy slope since the
    previous sample against -eps * min of the two squared v-rate norms;
    positive values flag potential monotonicity violations (subject to
    the tolerance applied by dissipation_check).
    """
    lam = lyapunov(state, profile, grid)
    vt = vt_l2(state, params, grid)
    residual = 0.0
    if prev is not None and state.t > prev.t:
        slope = (lam - prev.lyapunov) / (state.t - prev.t)
        residual = slope + params.eps * min(prev.vt_l2 ** 2, vt ** 2)
    return DiagnosticsRecord(
        t=state.t,
        dt=dt,
        mass=mass(state.u, grid),
        v_mean=v_mean(state.v, grid),
        u_max=float(np.max(state.u)),
        lyapunov=lam,
        moment=moment_L(state.u, q, grid),
        lp2=lp_norm(state.u, 2, grid),
        lp3=lp_norm(state.u, 3, grid),
        llogl=llogl(state.u, grid),
        grad_log_energy=grad_log_energy(state.u, grid),
        vt_l2=vt,
        dissipation_residual=residual,
        b_floor_hits=profile.floor_hits(state.u),
    )


@dataclass(frozen=True)
class DissipationReport:
    """Indices of samples violating energy monotonicity or the lower bound."""

    slope_violations: tuple
    floor_violations: tuple

    @property
    def clean(self) -> bool:
        return not self.slope_violations and not self.floor_violations


def dissipation_check(records, params: Params, c_tol: float = 10.0,
                      floor_tol: float = 1e-8) -> DissipationReport:
    """Audit sampled energies against the decay inequality.

    Between consecutive samples k, k+1 the slope must satisfy

        (lam_{k+1} - lam_k) / (t_{k+1} - t_k)
            <= -eps * min(vt_k^2, vt_{k+1}^2) + tol_k

    with tol_k = c_tol * (1 + |lam_k|) * dt_k absorbing the first-order
    time discretization error.  Also flags lam_k < -mass^2/2 - floor_tol.
    """
    slope_bad = []
    floor_bad = []
    lam_floor = -0.5 * params.mass ** 2 - floor_tol
    for k in range(len(records) - 1):
        r0, r1 = records[k], records[k + 1]
        span = r1.t - r0.t
        if span <= 0:
            continue
        slope = (r1.lyapunov - r0.lyapunov) / span
        bound = -params.eps * min(r0.vt_l2 ** 2, r1.vt_l2 ** 2)
        tol = c_tol * (1.0 + abs(r0.lyapunov)) * r0.dt
        if slope > bound + tol:
            slope_bad.append(k)
    for k, r in enumerate(records):
        if r.lyapunov < lam_floor:
            floor_bad.append(k)
    return DissipationReport(tuple(slope_bad), tuple(floor_bad))


def vt_l2_time_integral(records) -> float:
    """Trapezoid rule for integral |v_t|_2^2 dt over the sampled times."""
    if len(records) < 2:
        return 0.0
    t = np.array([r.t for r in records])
    y = np.array([r.vt_l2 ** 2 for r in records])
    return float(np.trapezoid(y, t))
