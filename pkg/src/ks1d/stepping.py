"""IMEX time integration with an adaptive step controller.

Each step treats diffusion implicitly (backward Euler, coefficients
frozen at the old state) and the chemotactic drift and chemoattractant
sources explicitly.  Both implicit solves are tridiagonal.  Explicit
upwinding under the CFL restriction plus the M-matrix solve keep the
density nonnegative; total mass is re-anchored multiplicatively each
step so rounding noise cannot accumulate, and v is projected back to
mean zero whenever gamma = 0.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .diagnostics import sample_diagnostics
from .discretization import face_coefficients
from .entropy import EntropyProfile
from .errors import InputDomainError, NumericStateError
from .model import GridSpec, Params, State

__all__ = [
    "StepController", "StepReport", "Outcome", "Trajectory",
    "step", "adapt_dt", "detect_blowup", "run",
]


@dataclass(frozen=True)
class StepController:
    """Adaptive time-step policy and safety limits."""

    dt_init: float = 1e-4
    dt_min: float = 1e-12
    dt_max: float = 1e-2
    cfl_safety: float = 0.4
    growth_cap: float = 0.1          # max relative change of u_max per step
    max_growth_factor: float = 1.2   # dt may grow at most 20% per step
    blowup_threshold: float = 1e8
    undershoot_tol: float = 1e-13
    max_rejects: int = 5

    def __post_init__(self):
        if not (0 < self.cfl_safety <= 0.5):
            raise InputDomainError("cfl_safety must lie in (0, 0.5] for "
                                   "positivity of the explicit drift")
        if self.dt_min <= 0 or self.dt_max < self.dt_min:
            raise InputDomainError("need 0 < dt_min <= dt_max")
        if self.growth_cap <= 0:
            raise InputDomainError("growth_cap must be positive")


@dataclass(frozen=True)
class StepReport:
    accepted: bool
    dt_used: float
    undershoot: float      # most negative density seen before clipping
    clips: int             # cells clipped to zero
    reason: str = ""


class Outcome(enum.Enum):
    COMPLETED = "completed"
    BLOWUP = "numerical_blowup"
    STEP_LIMIT = "step_limit"


def step(state: State, dt: float, params: Params, model, grid: GridSpec,
         controller: StepController):
    """Attempt one IMEX step; returns (new_state_or_None, StepReport)."""
    u, v = state.u, state.v
    h = grid.h

    adv = _kernels.chemotaxis_rates(u, v, params.chi, h)
    u_star = u + dt * adv
    undershoot = min(0.0, float(np.min(u_star)))
    if undershoot < -controller.undershoot_tol:
        return None, StepReport(False, dt, undershoot, 0, "drift undershoot")

    coeff = face_coefficients(np.maximum(u, 0.0), model, grid)
    u_new = _kernels.diffusion_solve(np.maximum(u_star, 0.0), coeff, dt, h)
    u_floor = min(0.0, float(np.min(u_new)))
    undershoot = min(undershoot, u_floor)
    if u_floor < -controller.undershoot_tol:
        return None, StepReport(False, dt, undershoot, 0, "solve undershoot")

    clips = int(np.count_nonzero(u_star < 0) + np.count_nonzero(u_new < 0))
    u_new = np.maximum(u_new, 0.0)
    total = h * float(np.sum(u_new))
    if not np.isfinite(total) or total <= 0:
        return None, StepReport(False, dt, undershoot, clips, "non-finite density")
    u_new *= params.mass / total

    source = (u - params.mass + params.gamma * v) / params.eps
    v_star = v + dt * source
    ones = np.full(grid.n_cells - 1, params.D / params.eps)
    v_new = _kernels.diffusion_solve(v_star, ones, dt, h)
    if not np.all(np.isfinite(v_new)):
        return None, StepReport(False, dt, undershoot, clips, "non-finite v")
    if params.gamma == 0.0:
        v_new = v_new - h * np.sum(v_new)

    new_state = State(state.t + dt, u_new, v_new)
    return new_state, StepReport(True, dt, undershoot, clips)


def _cfl_limit(v, params: Params, grid: GridSpec,
               controller: StepController) -> float:
    w_max = params.chi * float(np.max(np.abs(np.diff(v)))) / grid.h
    if w_max <= 0.0:
        return np.inf
    return controller.cfl_safety * grid.h / w_max


def adapt_dt(report: StepReport, state: State, u_max_before: float,
             params: Params, grid: GridSpec,
             controller: StepController) -> float:
    """Next step size after an attempted step.

    Rejections halve dt (floored at dt_min).  Accepted steps grow dt by
    at most max_growth_factor, shrink it when u_max moved faster than
    growth_cap allows, and always respect the drift CFL limit and dt_max.
    """
    if not report.accepted:
        return max(controller.dt_min, 0.5 * report.dt_used)
    u_max_after = float(np.max(state.u))
    rel = abs(u_max_after - u_max_before) / max(u_max_before, 1e-300)
    if rel > 0:
        factor = min(controller.max_growth_factor, controller.growth_cap / rel)
    else:
        factor = controller.max_growth_factor
    dt = report.dt_used * factor
    dt = min(dt, _cfl_limit(state.v, params, grid, controller),
             controller.dt_max)
    return max(dt, controller.dt_min)


def detect_blowup(u_max: float, dt: float, consecutive_rejects: int,
                  controller: StepController) -> bool:
    """Numerical blowup: density past the threshold, or the controller
    pinned at dt_min while steps keep failing."""
    if u_max >= controller.blowup_threshold:
        return True
    return (dt <= controller.dt_min * (1.0 + 1e-12)
            and consecutive_rejects >= controller.max_rejects)


@dataclass(frozen=True)
class Trajectory:
    records: tuple
    final_state: State
    outcome: Outcome
    t_estimate: float | None
    steps_accepted: int
    steps_rejected: int
    clip_total: int


def run(initial: State, params: Params, model, grid: GridSpec,
        controller: StepController, t_end: float,
        sample_cadence: float, q: float = 3.0,
        max_steps: int = 10_000_000, profile=None,
        validate: bool = True) -> Trajectory:
    """Integrate to t_end (or blowup / step limit), sampling diagnostics.

    Deterministic: identical inputs produce identical trajectories.
    """
    if t_end <= initial.t:
        raise InputDomainError("t_end must exceed the initial time")
    if sample_cadence <= 0:
        raise InputDomainError("sample_cadence must be positive")
    if validate:
        initial.validate(grid, params)
    if profile is None:
        profile = EntropyProfile(model)

    state = initial
    dt = min(controller.dt_init, _cfl_limit(state.v, params, grid, controller),
             controller.dt_max)
    dt = max(dt, controller.dt_min)

    records = [sample_diagnostics(state, dt, params, profile, grid, q)]
    next_sample = initial.t + sample_cadence
    accepted = rejected = clip_total = 0
    rejects_in_row = 0
    outcome = Outcome.COMPLETED
    t_estimate = None

    while state.t < t_end * (1.0 - 1e-14):
        dt_try = min(dt, t_end - state.t)
        new_state, report = step(state, dt_try, params, model, grid, controller)
        if report.accepted:
            u_max_before = float(np.max(state.u))
            state = new_state
            accepted += 1
            clip_total += report.clips
            rejects_in_row = 0
            if state.t >= next_sample * (1.0 - 1e-12) or state.t >= t_end * (1.0 - 1e-14):
                records.append(sample_diagnostics(
                    state, report.dt_used, params, profile, grid, q,
                    prev=records[-1]))
                while next_sample <= state.t * (1.0 + 1e-12):
                    next_sample += sample_cadence
            if detect_blowup(float(np.max(state.u)), dt_try, 0, controller):
                outcome = Outcome.BLOWUP
                t_estimate = state.t
                break
            dt = adapt_dt(report, state, u_max_before, params, grid, controller)
        else:
            rejected += 1
            rejects_in_row += 1
            if detect_blowup(0.0, dt_try, rejects_in_row, controller):
                outcome = Outcome.BLOWUP
                t_estimate = state.t
                break
            dt = max(controller.dt_min, 0.5 * dt_try)
        if accepted + rejected >= max_steps:
            if state.t < t_end * (1.0 - 1e-14):
                outcome = Outcome.STEP_LIMIT
            break

    if records[-1].t < state.t:
        records.append(sample_diagnostics(
            state, records[-1].dt, params, profile, grid, q, prev=records[-1]))
    return Trajectory(tuple(records), state, outcome, t_estimate,
                      accepted, rejected, clip_total)
