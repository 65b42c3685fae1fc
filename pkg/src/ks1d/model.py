"""Continuous model data: grid, parameters, state, and diffusion laws.

The PDE system lives on the unit interval with no-flux boundaries:

    u_t = (a(u) u_x - chi * u * v_x)_x
    eps * v_t = D * v_xx + u - M + gamma * v

with cell mass M = integral of u conserved in time.  Fields are stored
as cell averages on a uniform grid of n cells.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import (DivergentTailError, InputDomainError, NumericStateError,
                     ResolutionError, TableRangeError)

__all__ = [
    "GridSpec", "Params", "State", "PowerLawDiffusion", "TabulatedDiffusion",
    "load_diffusion_table", "cumulative_integral", "as_cell_field",
]


def as_cell_field(values, n_cells=None):
    """Coerce to a float64 array of cell averages and validate it.

    Raises NumericStateError on non-finite entries or length mismatch.
    """
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise NumericStateError(f"cell field must be 1-D, got shape {arr.shape}")
    if n_cells is not None and arr.shape[0] != n_cells:
        raise NumericStateError(
            f"cell field has {arr.shape[0]} entries, grid has {n_cells} cells")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise NumericStateError(f"non-finite entry at cell {bad}")
    return arr


@dataclass(frozen=True)
class GridSpec:
    """Uniform cell-centered grid on (0, 1)."""

    n_cells: int

    def __post_init__(self):
        if self.n_cells < 2:
            raise InputDomainError("grid needs at least 2 cells")

    @property
    def h(self) -> float:
        return 1.0 / self.n_cells

    def centers(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.h

    def edges(self) -> np.ndarray:
        return np.arange(self.n_cells + 1) * self.h


@dataclass(frozen=True)
class Params:
    """Physical parameters.  mass is the conserved integral of u."""

    chi: float
    eps: float
    mass: float
    D: float = 1.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.chi < 0:
            raise InputDomainError("chi must be nonnegative")
        if self.eps <= 0:
            raise InputDomainError("eps must be positive")
        if self.D <= 0:
            raise InputDomainError("D must be positive")
        if self.mass <= 0:
            raise InputDomainError("mass must be positive")


@dataclass(frozen=True)
class State:
    """Solution snapshot: time plus cell averages of u and v.

    Arrays are frozen on construction; treat them as read-only.
    """

    t: float
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = as_cell_field(self.u)
        v = as_cell_field(self.v, n_cells=u.shape[0])
        u.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def n_cells(self) -> int:
        return self.u.shape[0]

    def validate(self, grid: GridSpec, params: Params,
                 mass_tol: float = 1e-10, v_mean_tol: float = 1e-10):
        """Check structural invariants of an initial state."""
        if self.n_cells != grid.n_cells:
            raise NumericStateError("state does not match grid size")
        if np.any(self.u < 0):
            bad = int(np.flatnonzero(self.u < 0)[0])
            raise NumericStateError(f"negative density at cell {bad}")
        mass = grid.h * float(np.sum(self.u))
        if abs(mass - params.mass) > mass_tol * max(1.0, params.mass):
            raise NumericStateError(
                f"initial mass {mass} does not match declared mass {params.mass}")
        if params.gamma == 0.0:
            v_mean = grid.h * float(np.sum(self.v))
            if abs(v_mean) > v_mean_tol:
                raise NumericStateError(
                    f"initial v has nonzero mean {v_mean}")


def cumulative_integral(f, grid: GridSpec) -> np.ndarray:
    """Running integral of a cell field, evaluated at right cell edges.

    Entry i is h * sum(f[0..i]); the final entry is the full integral.
    """
    f = as_cell_field(f, n_cells=grid.n_cells)
    return np.cumsum(f) * grid.h


class PowerLawDiffusion:
    """Density-dependent diffusion a(u) = (1 + u)^(-alpha), alpha >= 0."""

    def __init__(self, alpha: float):
        if alpha < 0:
            raise InputDomainError("alpha must be nonnegative")
        self.alpha = float(alpha)

    def __repr__(self):
        return f"PowerLawDiffusion(alpha={self.alpha})"

    def a(self, u):
        """Evaluate the diffusion coefficient at nonnegative densities."""
        u = np.asarray(u, dtype=np.float64)
        if np.any(u < 0):
            raise InputDomainError("diffusion evaluated at negative density")
        return (1.0 + u) ** (-self.alpha)

    def tail_mass(self, r) -> np.ndarray:
        """g(r) = r * integral_r^inf a(s) ds, in closed form.

        Converges only for alpha > 1; otherwise the tail diverges.
        """
        if self.alpha <= 1.0:
            raise DivergentTailError(
                f"tail integral diverges for alpha = {self.alpha} <= 1")
        r = np.asarray(r, dtype=np.float64)
        if np.any(r < 0):
            raise InputDomainError("tail mass evaluated at negative radius")
        return r * (1.0 + r) ** (1.0 - self.alpha) / (self.alpha - 1.0)


class TabulatedDiffusion:
    """Diffusion given by linear interpolation of (r, a) nodes.

    Beyond the last node the coefficient continues as a power law
    a(s) = a_last * (s / r_last)^(-tail_exponent).
    """

    def __init__(self, r_nodes, a_nodes, tail_exponent: float):
        r = np.asarray(r_nodes, dtype=np.float64)
        a = np.asarray(a_nodes, dtype=np.float64)
        if r.ndim != 1 or r.shape != a.shape or r.size < 2:
            raise InputDomainError("need matching 1-D node arrays, length >= 2")
        if np.any(np.diff(r) <= 0):
            raise InputDomainError("r nodes must be strictly increasing")
        if r[0] != 0.0:
            raise InputDomainError("tabulation must start at r = 0")
        if np.any(a <= 0):
            raise InputDomainError("tabulated a must be positive")
        self.r_nodes = r
        self.a_nodes = a
        self.tail_exponent = float(tail_exponent)

    def __repr__(self):
        return (f"TabulatedDiffusion({self.r_nodes.size} nodes, "
                f"tail_exponent={self.tail_exponent})")

    def a(self, u):
        u = np.asarray(u, dtype=np.float64)
        if np.any(u < 0):
            raise InputDomainError("diffusion evaluated at negative density")
        out = np.interp(u, self.r_nodes, self.a_nodes)
        r_last = self.r_nodes[-1]
        beyond = u > r_last
        if np.any(beyond):
            out = np.where(
                beyond,
                self.a_nodes[-1] * (np.maximum(u, r_last) / r_last)
                ** (-self.tail_exponent),
                out)
        return out

    def tail_mass(self, r) -> np.ndarray:
        """g(r) = r * integral_r^inf a: adaptive quadrature over the nodes
        plus the analytic power-law tail."""
        if self.tail_exponent <= 1.0:
            raise DivergentTailError(
                f"tail exponent {self.tail_exponent} <= 1: tail diverges")
        scalar = np.isscalar(r) or np.ndim(r) == 0
        rs = np.atleast_1d(np.asarray(r, dtype=np.float64))
        if np.any(rs < 0):
            raise InputDomainError("tail mass evaluated at negative radius")
        r_last = self.r_nodes[-1]
        a_last = self.a_nodes[-1]
        # analytic tail: integral_x^inf a_last*(s/r_last)^-tau
        tail_from = lambda x: (a_last * x * (x / r_last) ** (-self.tail_exponent)
                               / (self.tail_exponent - 1.0))
        out = np.empty_like(rs)
        for i, ri in enumerate(rs):
            if ri >= r_last:
                integral = tail_from(ri)
            else:
                pts = self.r_nodes[(self.r_nodes > ri) & (self.r_nodes < r_last)]
                integral, _ = quad(self.a, ri, r_last,
                                   points=pts.tolist() or None,
                                   limit=max(50, 2 * pts.size + 10),
                                   epsabs=1e-12, epsrel=1e-12)
                integral += tail_from(r_last)
            out[i] = ri * integral
        return out[0] if scalar else out


def load_diffusion_table(source) -> TabulatedDiffusion:
    """Read a tabulated diffusion from CSV text or a file path.

    Format: header line "r,a", one "r,a" row per node, and a trailing
    comment line "# tail_exponent=<real>".
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    lines = [ln.strip() for ln in io.StringIO(text) if ln.strip()]
    if not lines or lines[0].replace(" ", "") != "r,a":
        raise InputDomainError("diffusion table must start with header 'r,a'")
    tail_exponent = None
    rows = []
    for ln in lines[1:]:
        if ln.startswith("#"):
            body = ln.lstrip("#").strip()
            if body.startswith("tail_exponent"):
                tail_exponent = float(body.split("=", 1)[1])
            continue
        parts = ln.split(",")
        if len(parts) != 2:
            raise InputDomainError(f"malformed table row: {ln!r}")
        rows.append((float(parts[0]), float(parts[1])))
    if tail_exponent is None:
        raise InputDomainError("missing trailing '# tail_exponent=' line")
    r = np.array([p[0] for p in rows])
    a = np.array([p[1] for p in rows])
    return TabulatedDiffusion(r, a, tail_exponent)
