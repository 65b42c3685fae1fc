"""Finite-time blowup certificates for the moment functional.

The certificate evaluates

    A(L) = (q-1) B(M)^{2/q} [M^{q+1}/(q+1)]^{(q-2)/q}
               * beta^{(q-2)/q}( M^{q+1} / (L q (q+1)) )
         + M L [1 + eps M^{q-1} / (4 q)]
         - M^{q+1} / (q (q+1))

where B is a concave, nondecreasing majorant of the diffusion tail mass
g(r) = r * integral_r^inf a and beta(x) = B(x)/x.  If A is negative at
Phi(0) = L(0) + lambda(0) + M^2/2 for the concentrated ramp data, the
moment differential inequality forces loss of regularity in finite time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diagnostics import lyapunov, moment_L
from .entropy import EntropyProfile
from .errors import InputDomainError, NumericStateError, ResolutionError
from .model import GridSpec, State

__all__ = [
    "ConcaveEnvelope", "concave_majorant", "zero_envelope", "beta_eval",
    "certificate_A", "blowup_initial_data", "CertificateReport", "certify",
    "build_tail_envelope", "SearchResult", "search_mass_threshold",
    "monitor_phi",
]


@dataclass(frozen=True)
class ConcaveEnvelope:
    """Piecewise-linear concave nondecreasing function through breakpoints,
    extended beyond the last breakpoint with its final slope."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if x.ndim != 1 or x.shape != y.shape or x.size < 2:
            raise InputDomainError("need matching breakpoint arrays, size >= 2")
        if x[0] != 0.0:
            raise InputDomainError("envelope must start at x = 0")
        if np.any(np.diff(x) <= 0):
            raise InputDomainError("breakpoints must be strictly increasing")
        slopes = np.diff(y) / np.diff(x)
        if np.any(np.diff(slopes) > 1e-12 * (1.0 + np.abs(slopes[:-1]))):
            raise InputDomainError("breakpoints are not concave")
        if slopes[-1] < 0:
            raise InputDomainError("last slope must be nonnegative")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def last_slope(self) -> float:
        return float((self.y[-1] - self.y[-2]) / (self.x[-1] - self.x[-2]))

    def __call__(self, xq):
        xq = np.asarray(xq, dtype=np.float64)
        scalar = xq.ndim == 0
        xq = np.atleast_1d(xq)
        if np.any(xq < 0):
            raise InputDomainError("envelope evaluated at negative argument")
        out = np.interp(xq, self.x, self.y)
        beyond = xq > self.x[-1]
        if np.any(beyond):
            out = np.where(beyond,
                           self.y[-1] + self.last_slope * (xq - self.x[-1]),
                           out)
        return float(out[0]) if scalar else out


def zero_envelope() -> ConcaveEnvelope:
    """The trivial majorant B = 0 (vanishing tail)."""
    return ConcaveEnvelope(np.array([0.0, 1.0]), np.array([0.0, 0.0]))


def concave_majorant(r_samples, g_samples) -> ConcaveEnvelope:
    """Least concave nondecreasing majorant of sampled tail-mass values.

    The running maximum is taken first so the result is nondecreasing:
    any valid majorant of g >= 0 on the half line must be (a concave
    function that ever decreases eventually goes negative).  For
    nondecreasing concave samples this coincides with the plain least
    concave majorant and interpolates the data exactly.
    """
    r = np.asarray(r_samples, dtype=np.float64)
    g = np.asarray(g_samples, dtype=np.float64)
    if r.ndim != 1 or r.shape != g.shape or r.size < 1:
        raise InputDomainError("need matching sample arrays")
    if np.any(np.diff(r) <= 0):
        raise InputDomainError("sample abscissae must be strictly increasing")
    if np.any(r < 0) or np.any(~np.isfinite(g)) or np.any(g < 0):
        raise InputDomainError("samples must be finite, nonnegative, r >= 0")
    if r[0] != 0.0:
        r = np.concatenate([[0.0], r])
        g = np.concatenate([[0.0], g])
    elif g[0] != 0.0:
        raise InputDomainError("tail mass at r = 0 must vanish")
    g = np.maximum.accumulate(g)

    hull_x, hull_y = [], []
    for xi, yi in zip(r, g):
        while len(hull_x) >= 2:
            cross = ((hull_x[-1] - hull_x[-2]) * (yi - hull_y[-2])
                     - (hull_y[-1] - hull_y[-2]) * (xi - hull_x[-2]))
            if cross >= 0.0:
                hull_x.pop()
                hull_y.pop()
            else:
                break
        hull_x.append(xi)
        hull_y.append(yi)
    if len(hull_x) == 1:
        hull_x.append(hull_x[0] + 1.0)
        hull_y.append(hull_y[0])
    return ConcaveEnvelope(np.array(hull_x), np.array(hull_y))


def beta_eval(envelope: ConcaveEnvelope, x) -> float | np.ndarray:
    """beta(x) = B(x)/x, continued at 0 by its limit (the first slope).

    Nonincreasing because B is concave with B(0) = 0.
    """
    xq = np.asarray(x, dtype=np.float64)
    scalar = xq.ndim == 0
    xq = np.atleast_1d(xq)
    if np.any(xq < 0):
        raise InputDomainError("beta evaluated at negative argument")
    first_slope = float((envelope.y[1] - envelope.y[0])
                        / (envelope.x[1] - envelope.x[0]))
    out = np.empty_like(xq)
    zero = xq == 0.0
    out[zero] = first_slope
    out[~zero] = envelope(xq[~zero]) / xq[~zero]
    return float(out[0]) if scalar else out


def certificate_A(envelope: ConcaveEnvelope, q: float, M: float,
                  eps: float, L: float) -> float:
    """Definition of the certificate drift A_{B,q}(L); see module docstring.

    L = 0 uses the convention beta(inf) = 0, since the envelope grows
    sublinearly, leaving only the negative constant term.
    """
    if q <= 2:
        raise InputDomainError("q must exceed 2")
    if M <= 0 or eps <= 0:
        raise InputDomainError("M and eps must be positive")
    if L < 0:
        raise InputDomainError("L must be nonnegative")
    const = M ** (q + 1) / (q * (q + 1))
    if L == 0.0:
        return -const
    BM = float(envelope(M))
    beta = beta_eval(envelope, M ** (q + 1) / (L * q * (q + 1)))
    first = ((q - 1.0) * BM ** (2.0 / q)
             * (M ** (q + 1) / (q + 1)) ** ((q - 2.0) / q)
             * beta ** ((q - 2.0) / q))
    second = M * L * (1.0 + eps * M ** (q - 1) / (4.0 * q))
    return first + second - const


def blowup_initial_data(M: float, grid: GridSpec) -> State:
    """Concentrated ramp data used by the certificate:

        u0 = 2 M^3 (x + 1/M - 1) on [1 - 1/M, 1], zero elsewhere
        v0 = M x - M/2

    Cell averages of u0 are exact integrals of the ramp, so mass is M
    to roundoff; v0 is linear, so midpoint values are exact averages.
    Requires at least 8 cells inside the support.
    """
    if M <= 1.0:
        raise InputDomainError("ramp data needs M > 1 so the support fits")
    h = grid.h
    if 1.0 / M < 8.0 * h:
        raise ResolutionError(
            f"support width {1.0 / M:.3g} needs >= 8 cells, h = {h:.3g}")
    edges = grid.edges()
    s = 1.0 - 1.0 / M
    ramp = np.maximum(edges - s, 0.0)
    # cell average of 2 M^3 (x - s)_+ is M^3 ((xr-s)_+^2 - (xl-s)_+^2) / h
    u = (M ** 3) * (ramp[1:] ** 2 - ramp[:-1] ** 2) / h
    v = M * grid.centers() - M / 2.0
    v = v - h * np.sum(v)
    return State(0.0, u, v)


@dataclass(frozen=True)
class CertificateReport:
    q: float
    M: float
    eps_choice: float
    L0: float
    lambda0: float
    Phi0: float
    A_at_Phi0: float
    certified: bool
    M0_search_trace: tuple | None = None

    def as_dict(self) -> dict:
        out = {
            "q": self.q, "M": self.M, "eps_choice": self.eps_choice,
            "L0": self.L0, "lambda0": self.lambda0, "Phi0": self.Phi0,
            "A_at_Phi0": self.A_at_Phi0, "certified": self.certified,
        }
        if self.M0_search_trace is not None:
            out["M0_search_trace"] = [list(row) for row in self.M0_search_trace]
        return out


def build_tail_envelope(model, r_max_hint: float = 10.0,
                        points_per_decade: int = 64,
                        beta_target: float = 1e-6) -> ConcaveEnvelope:
    """Sample g(r) = r * integral_r^inf a on a log grid wide enough that
    g(r)/r < beta_target at the far end, then take its majorant."""
    r_hi = max(10.0, r_max_hint)
    for _ in range(60):
        if float(model.tail_mass(r_hi)) / r_hi < beta_target:
            break
        r_hi *= 10.0
    else:
        raise InputDomainError("tail decays too slowly to reach the "
                               f"beta target {beta_target}")
    decades = np.log10(r_hi) - np.log10(1e-3)
    n = int(np.ceil(decades * points_per_decade)) + 1
    r = np.logspace(-3, np.log10(r_hi), n)
    g = np.asarray(model.tail_mass(r), dtype=np.float64)
    return concave_majorant(r, g)


def certify(M: float, q: float, model, grid: GridSpec, eps: float | None = None,
            profile: EntropyProfile | None = None,
            envelope: ConcaveEnvelope | None = None) -> CertificateReport:
    """Evaluate the blowup certificate at mass M for the ramp data.

    eps defaults to the mass scaling M^(1-q).  certified means
    A(Phi(0)) < 0, which rules out global existence for the continuum
    system with these parameters.
    """
    if M <= 0:
        raise InputDomainError("M must be positive")
    eps_choice = M ** (1.0 - q) if eps is None else float(eps)
    if eps_choice <= 0:
        raise InputDomainError("eps must be positive")
    if profile is None:
        profile = EntropyProfile(model)
    if envelope is None:
        envelope = build_tail_envelope(model, r_max_hint=10.0 * M)
    state0 = blowup_initial_data(M, grid)
    L0 = moment_L(state0.u, q, grid)
    lambda0 = lyapunov(state0, profile, grid)
    Phi0 = L0 + lambda0 + M ** 2 / 2.0
    if Phi0 < 0:
        raise NumericStateError(f"Phi(0) = {Phi0} negative; data inconsistent")
    A0 = certificate_A(envelope, q, M, eps_choice, Phi0)
    return CertificateReport(q=q, M=M, eps_choice=eps_choice, L0=L0,
                             lambda0=lambda0, Phi0=Phi0, A_at_Phi0=A0,
                             certified=bool(A0 < 0.0))


@dataclass(frozen=True)
class SearchResult:
    found: bool
    M0: float | None
    trace: tuple            # (M, A_at_Phi0, certified) triples, eval order
    monotone_ok: bool
    reason: str = ""


def search_mass_threshold(q: float, model, grid: GridSpec,
                          m_range: tuple[float, float],
                          eps: float | None = None,
                          rtol: float = 1e-8,
                          validation_points: int = 16,
                          profile: EntropyProfile | None = None,
                          envelope: ConcaveEnvelope | None = None) -> SearchResult:
    """Bisect for the smallest certified mass in m_range.

    The per-mass eps follows the same rule as certify (scaling unless a
    fixed eps is given).  The bracket requires not-certified at the low
    end and certified at the high end; otherwise the result is
    inconclusive.  A 16-point mass grid above the threshold validates
    that certification is monotone there.
    """
    m_lo, m_hi = m_range
    if not (0 < m_lo < m_hi):
        raise InputDomainError("need 0 < m_lo < m_hi")
    if profile is None:
        profile = EntropyProfile(model)
    if envelope is None:
        envelope = build_tail_envelope(model, r_max_hint=10.0 * m_hi)
    trace = []

    def eval_at(M):
        rep = certify(M, q, model, grid, eps=eps, profile=profile,
                      envelope=envelope)
        trace.append((M, rep.A_at_Phi0, rep.certified))
        return rep.certified

    lo_cert = eval_at(m_lo)
    hi_cert = eval_at(m_hi)
    if lo_cert or not hi_cert:
        return SearchResult(False, None, tuple(trace), False,
                            "no sign change across the mass range")
    lo, hi = m_lo, m_hi
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if eval_at(mid):
            hi = mid
        else:
            lo = mid
    M0 = hi
    grid_masses = np.geomspace(M0 * (1.0 + 1e-6), m_hi, validation_points)
    monotone_ok = all(eval_at(m) for m in grid_masses)
    return SearchResult(True, M0, tuple(trace), monotone_ok,
                        "" if monotone_ok else
                        "certificate not monotone above threshold")


def monitor_phi(records, envelope: ConcaveEnvelope, q: float, M: float,
                eps: float, c_tol: float = 10.0):
    """Audit sampled trajectories against the moment drift inequality.

    Phi_k = moment + energy + M^2/2 per sample.  Flags windows where the
    discrete slope exceeds A(Phi_k) + tol with
    tol = c_tol * (1 + |Phi_k|) * dt_k, and samples where Phi_k < 0.

    Returns (slope_violations, negative_phi) index tuples.
    """
    phis = [r.moment + r.lyapunov + M ** 2 / 2.0 for r in records]
    slope_bad = []
    negative = [k for k, p in enumerate(phis) if p < 0]
    for k in range(len(records) - 1):
        span = records[k + 1].t - records[k].t
        if span <= 0:
            continue
        slope = (phis[k + 1] - phis[k]) / span
        bound = certificate_A(envelope, q, M, eps, max(phis[k], 0.0))
        tol = c_tol * (1.0 + abs(phis[k])) * records[k].dt
        if slope > bound + tol:
            slope_bad.append(k)
    return tuple(slope_bad), tuple(negative)
