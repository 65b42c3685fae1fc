"""Entropy density b associated with a diffusion law.

b is the convex function with b''(s) = a(s)/s normalized by
b(1) = b'(1) = 0, equivalently the signed double integral

    b(x) = integral_1^x  integral_1^r  a(s)/s  ds  dr.

Power-law diffusions at alpha = 0 and alpha = 1 admit closed forms;
every other law is handled by a precomputed log-spaced table with
monotone cubic pieces between nodes.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline

from .errors import TableRangeError
from .model import PowerLawDiffusion

__all__ = ["EntropyProfile", "TABLE_FLOOR", "TABLE_CEIL"]

TABLE_FLOOR = 1e-6
TABLE_CEIL = 1e8
_NODES_PER_DECADE = 160
_QUAD_TOL = 1e-12


def _b_alpha0(x):
    # a == 1: b(x) = x log x - x + 1, with the limit value 1 at x = 0
    x = np.asarray(x, dtype=np.float64)
    out = np.ones_like(x)
    pos = x > 0
    xp = x[pos]
    out[pos] = xp * np.log(xp) - xp + 1.0
    return out


def _b_alpha1(x):
    # a = 1/(1+s): b(x) = x log(2x/(1+x)) - log((1+x)/2), limit log 2 at 0
    x = np.asarray(x, dtype=np.float64)
    out = np.full_like(x, np.log(2.0))
    pos = x > 0
    xp = x[pos]
    out[pos] = xp * np.log(2.0 * xp / (1.0 + xp)) - np.log((1.0 + xp) / 2.0)
    return out


class EntropyProfile:
    """Evaluator for b (and b') for a given diffusion law.

    Parameters
    ----------
    model : diffusion law with a vectorized ``a`` method
    clamp : if True (default), arguments below the table floor are
        clamped to it and counted instead of raising; arguments above
        the ceiling always raise.

    Notes
    -----
    Closed forms are used for power laws with alpha in {0, 1}.  The
    generic path tabulates b and b' on a log grid over
    [TABLE_FLOOR, TABLE_CEIL] via per-segment adaptive quadrature
    (abs tol 1e-12) and interpolates with cubic Hermite pieces, which
    are monotone on each side of the minimum at x = 1 because the
    tabulated slopes are.
    """

    def __init__(self, model, clamp: bool = True):
        self.model = model
        self.clamp = clamp
        self._closed = None
        if isinstance(model, PowerLawDiffusion):
            if model.alpha == 0.0:
                self._closed = _b_alpha0
            elif model.alpha == 1.0:
                self._closed = _b_alpha1
        if self._closed is None:
            self._build_table()

    def _build_table(self):
        decades = np.log10(TABLE_CEIL) - np.log10(TABLE_FLOOR)
        n = int(round(decades * _NODES_PER_DECADE)) + 1
        x = np.logspace(np.log10(TABLE_FLOOR), np.log10(TABLE_CEIL), n)
        # pin an exact node at 1 so that b(1) = b'(1) = 0 holds exactly
        k = int(np.argmin(np.abs(x - 1.0)))
        x[k] = 1.0
        a_over_s = lambda s: float(self.model.a(s)) / s

        bp = np.zeros(n)   # b'
        bv = np.zeros(n)   # b
        # march right from the anchor at x[k] = 1:
        #   b(x_{j+1}) = b(x_j) + b'(x_j) dx + int_{x_j}^{x_{j+1}} a(s)/s (x_{j+1}-s) ds
        for j in range(k, n - 1):
            xl, xr = x[j], x[j + 1]
            dbp, _ = quad(a_over_s, xl, xr, epsabs=_QUAD_TOL, epsrel=_QUAD_TOL)
            dbl, _ = quad(lambda s: a_over_s(s) * (xr - s), xl, xr,
                          epsabs=_QUAD_TOL, epsrel=_QUAD_TOL)
            bp[j + 1] = bp[j] + dbp
            bv[j + 1] = bv[j] + bp[j] * (xr - xl) + dbl
        # march left: same identity with signed increments
        for j in range(k, 0, -1):
            xl, xr = x[j - 1], x[j]
            dbp, _ = quad(a_over_s, xl, xr, epsabs=_QUAD_TOL, epsrel=_QUAD_TOL)
            dbl, _ = quad(lambda s: a_over_s(s) * (s - xl), xl, xr,
                          epsabs=_QUAD_TOL, epsrel=_QUAD_TOL)
            bp[j - 1] = bp[j] - dbp
            bv[j - 1] = bv[j] - bp[j] * (xr - xl) + dbl
        self._x = x
        self._spline = CubicHermiteSpline(x, bv, bp)
        self._dspline = self._spline.derivative()

    def b(self, x):
        """Entropy values; returns an array matching the input shape."""
        x = np.asarray(x, dtype=np.float64)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        if np.any(x < 0):
            raise TableRangeError(float(x[x < 0][0]), 0.0, TABLE_CEIL)
        if self._closed is not None:
            out = self._closed(x)
            return float(out[0]) if scalar else out
        if np.any(x > TABLE_CEIL):
            raise TableRangeError(float(x[x > TABLE_CEIL][0]),
                                  TABLE_FLOOR, TABLE_CEIL)
        below = x < TABLE_FLOOR
        if np.any(below) and not self.clamp:
            raise TableRangeError(float(x[below][0]), TABLE_FLOOR, TABLE_CEIL)
        out = self._spline(np.maximum(x, TABLE_FLOOR))
        return float(out[0]) if scalar else out

    def floor_hits(self, x) -> int:
        """How many entries would be clamped to the table floor."""
        if self._closed is not None:
            return 0
        return int(np.count_nonzero(np.asarray(x) < TABLE_FLOOR))

    def b_prime(self, x):
        x = np.asarray(x, dtype=np.float64)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        if self._closed is not None:
            if self.model.alpha == 0.0:
                out = np.log(x)
            else:
                out = np.log(2.0 * x / (1.0 + x))
            return float(out[0]) if scalar else out
        out = self._dspline(np.clip(x, TABLE_FLOOR, TABLE_CEIL))
        return float(out[0]) if scalar else out
