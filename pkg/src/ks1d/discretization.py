"""Conservative finite-volume spatial discretization.

Cell rates come from face fluxes that vanish at both boundaries, so
summed rates telescope to zero exactly and total mass is conserved by
construction.  The face flux for the density equation is

    F_{i+1/2} = a(mean(u_i, u_{i+1})) * (u_{i+1} - u_i)/h
                - chi * u_upwind * (v_{i+1} - v_i)/h

with the upwind cell chosen by the sign of the drift speed
chi * (v_{i+1} - v_i)/h, and cell rates (F_{i+1/2} - F_{i-1/2})/h.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .errors import NumericStateError
from .model import GridSpec, Params, State, as_cell_field

__all__ = [
    "face_coefficients", "assemble_u_rhs", "assemble_v_rhs",
    "laplacian_neumann", "implicit_diffusion_solve",
]


def face_coefficients(u, model, grid: GridSpec) -> np.ndarray:
    """Diffusion coefficients at interior faces, from arithmetic face means."""
    u = as_cell_field(u, n_cells=grid.n_cells)
    return model.a(0.5 * (u[:-1] + u[1:]))


def assemble_u_rhs(state: State, params: Params, model, grid: GridSpec):
    """Semi-discrete rates for the density equation at the given state."""
    u, v = state.u, state.v
    if np.any(u < 0):
        raise NumericStateError("density rates requested for negative u")
    coeff = face_coefficients(u, model, grid)
    h = grid.h
    diff_flux = coeff * (u[1:] - u[:-1]) / h
    rates = np.zeros(grid.n_cells)
    rates[:-1] += diff_flux / h
    rates[1:] -= diff_flux / h
    # rates sign: u_t = (F)_x, boundary fluxes are zero
    rates += _kernels.chemotaxis_rates(u, v, params.chi, h)
    return rates


def assemble_v_rhs(state: State, params: Params, grid: GridSpec):
    """Semi-discrete rates for the chemoattractant equation:

        eps * v_t = D * lap(v) + u - mass + gamma * v
    """
    lap = _kernels.laplacian_neumann(state.v, grid.h)
    return (params.D * lap + state.u - params.mass
            + params.gamma * state.v) / params.eps


def laplacian_neumann(f, grid: GridSpec):
    """Second-difference Laplacian with reflecting boundary ghosts."""
    f = as_cell_field(f, n_cells=grid.n_cells)
    return _kernels.laplacian_neumann(f, grid.h)


def implicit_diffusion_solve(f, coeff_faces, dt: float, grid: GridSpec):
    """Solve (I - dt * L_c) x = f for the flux-form diffusion operator
    with the given interior-face coefficients and no-flux boundaries.

    The system matrix has unit column sums, so sum(x) = sum(f) up to
    roundoff; it is an M-matrix, so nonnegative f yields nonnegative x.
    """
    f = as_cell_field(f, n_cells=grid.n_cells)
    coeff = np.ascontiguousarray(coeff_faces, dtype=np.float64)
    if coeff.shape[0] != grid.n_cells - 1:
        raise NumericStateError("need one coefficient per interior face")
    if np.any(coeff < 0):
        raise NumericStateError("negative face diffusion coefficient")
    if dt < 0:
        raise NumericStateError("negative time step")
    return _kernels.diffusion_solve(f, coeff, dt, grid.h)
