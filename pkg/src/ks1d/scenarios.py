"""Scenario execution: build the pieces described by a ScenarioConfig,
run the matching pipeline, and write artifacts (trajectory CSV, summary
JSON, certificate / inequality reports) to the output directory.

Artifact layout per run directory:
    trajectory.csv   one row per diagnostic sample (simulation scenarios)
    summary.json     RunSummary fields plus the full config echo
    certificate.json certificate scenarios and blowup runs
    inequalities.json inequality scenario
CSV files open with a `# generated <timestamp>` comment line and are
otherwise byte-identical across reruns of the same config.
"""

from __future__ import annotations

import dataclasses
import json
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import _kernels
from .certificate import (blowup_initial_data, build_tail_envelope,
                          certificate_A, certify, monitor_phi,
                          search_mass_threshold)
from .config import ScenarioConfig
from .diagnostics import dissipation_check, vt_l2_time_integral
from .entropy import EntropyProfile
from .errors import ConfigError, InputDomainError, KS1DError
from .inequalities import (counterexample_family, counterexample_sweep,
                           cor4_nu, critical_mass_threshold, random_field,
                           random_nonneg_field, sobolev_embedding_check,
                           verify_exp_embedding, verify_llogl_interpolation)
from .model import (GridSpec, Params, PowerLawDiffusion, State,
                    load_diffusion_table)
from .stepping import Outcome, StepController, run

__all__ = ["build_model", "build_initial_state", "run_scenario",
           "run_sweep", "CSV_COLUMNS"]

CSV_COLUMNS = ("t", "dt", "mass", "v_mean", "u_max", "lambda", "L_q",
               "l2", "l3", "llogl", "grad_log_energy", "vt_l2", "phi",
               "a_of_phi")


def build_model(config: ScenarioConfig):
    if config.diffusion_table:
        return load_diffusion_table(Path(config.diffusion_table))
    return PowerLawDiffusion(config.alpha)


def _cosine_cell_averages(mode: int, grid: GridSpec) -> np.ndarray:
    """Exact cell averages of cos(k pi x)."""
    k = mode * np.pi
    edges = grid.edges()
    return (np.sin(k * edges[1:]) - np.sin(k * edges[:-1])) / (k * grid.h)


def build_initial_state(config: ScenarioConfig, grid: GridSpec) -> State:
    M = config.mass
    if config.initial == "constant":
        u = np.full(grid.n_cells, M)
        v = np.zeros(grid.n_cells)
    elif config.initial == "perturbed":
        u = M * (1.0 + config.perturb_amp
                 * _cosine_cell_averages(config.perturb_mode, grid))
        v = np.zeros(grid.n_cells)
    elif config.initial == "ramp":
        return blowup_initial_data(M, grid)
    elif config.initial == "file":
        data = np.loadtxt(config.initial_file, delimiter=",", skiprows=1,
                          ndmin=2)
        if data.shape != (grid.n_cells, 2):
            raise ConfigError(
                f"initial_file must hold {grid.n_cells} rows of u,v; "
                f"got shape {data.shape}")
        u, v = data[:, 0].copy(), data[:, 1].copy()
    else:  # pragma: no cover - config.validate rejects other values
        raise ConfigError(f"unknown initial preset {config.initial!r}")
    return State(t=0.0, u=u, v=v)


def _controller(config: ScenarioConfig, threshold: float) -> StepController:
    return StepController(
        dt_init=config.dt_init, dt_min=config.dt_min, dt_max=config.dt_max,
        cfl_safety=config.cfl_safety, blowup_threshold=threshold)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_trajectory(path: Path, records, M: float, envelope, q: float,
                      eps: float) -> None:
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
    lines = [f"# generated {stamp}", ",".join(CSV_COLUMNS)]
    for rec in records:
        phi = rec.moment + rec.lyapunov + 0.5 * M * M
        a_of_phi = float("nan")
        if envelope is not None and phi >= 0:
            a_of_phi = certificate_A(envelope, q, M, eps, phi)
        row = (rec.t, rec.dt, rec.mass, rec.v_mean, rec.u_max, rec.lyapunov,
               rec.moment, rec.lp2, rec.lp3, rec.llogl, rec.grad_log_energy,
               rec.vt_l2, phi, a_of_phi)
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _extrema(records) -> dict:
    out = {}
    if not records:
        return out
    for name in ("mass", "v_mean", "u_max", "lyapunov", "moment", "lp2",
                 "lp3", "llogl", "grad_log_energy", "vt_l2"):
        vals = [getattr(r, name) for r in records]
        out[name] = {"min": min(vals), "max": max(vals)}
    return out


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, default=_json_default,
                               allow_nan=True) + "\n", encoding="utf-8")


def _simulation(config: ScenarioConfig, out: Path) -> int:
    grid = GridSpec(config.n_cells)
    model = build_model(config)
    profile = EntropyProfile(model)

    mass = config.mass
    certificate_payload = None
    envelope = None
    eps_run = config.eps
    if config.scenario == "blowup":
        envelope = build_tail_envelope(model)
        if mass <= 0:
            search = search_mass_threshold(
                config.q, model, grid, (config.m_lo, config.m_hi),
                rtol=max(config.search_rtol, 1e-6))
            if not search.found:
                raise KS1DError(
                    f"automatic mass selection failed: {search.reason}")
            mass = 1.5 * search.M0
        report = certify(mass, config.q, model, grid,
                         eps=config.cert_eps if config.cert_eps > 0 else None,
                         profile=profile, envelope=envelope)
        certificate_payload = report.as_dict()
        eps_run = report.eps_choice
        config = dataclasses.replace(config, mass=mass, eps=eps_run)

    params = Params(chi=config.chi, eps=eps_run, mass=mass, D=config.d,
                    gamma=config.gamma)
    threshold = config.blowup_threshold
    if threshold <= 0:
        # Concentration proxy: a quarter of the mass in a single cell.
        threshold = 0.25 * mass * config.n_cells
    controller = _controller(config, threshold)
    initial = build_initial_state(config, grid)
    initial.validate(grid, params)

    t0 = time.perf_counter()
    traj = run(initial, params, model, grid, controller, config.t_end,
               config.sample_cadence, q=config.q,
               max_steps=config.max_steps, profile=profile)
    wall = time.perf_counter() - t0

    dissipation = dissipation_check(traj.records, params)
    phi_violations = []
    negative_phi = []
    if envelope is not None:
        phi_violations, negative_phi = monitor_phi(
            traj.records, envelope, config.q, mass, eps_run)

    _write_trajectory(out / "trajectory.csv", traj.records, mass, envelope,
                      config.q, eps_run)
    if certificate_payload is not None:
        _write_json(out / "certificate.json", certificate_payload)

    violations = (len(dissipation.slope_violations)
                  + len(dissipation.floor_violations)
                  + len(phi_violations))
    summary = {
        "scenario": config.scenario,
        "outcome": traj.outcome.value,
        "t_final": traj.final_state.t,
        "t_estimate": traj.t_estimate,
        "steps_accepted": traj.steps_accepted,
        "steps_rejected": traj.steps_rejected,
        "clip_total": traj.clip_total,
        "wall_time_s": wall,
        "backend": _kernels.get_backend(),
        "vt_l2_time_integral": vt_l2_time_integral(traj.records),
        "extrema": _extrema(traj.records),
        "dissipation_violations": {
            "slope": list(dissipation.slope_violations),
            "floor": list(dissipation.floor_violations),
        },
        "phi_monitor": {
            "violations": list(phi_violations),
            "negative_phi": list(negative_phi),
        } if envelope is not None else None,
        "certified": (certificate_payload or {}).get("certified"),
        "config": dataclasses.asdict(config),
    }
    _write_json(out / "summary.json", summary)
    return 2 if violations else 0


def _certificate(config: ScenarioConfig, out: Path) -> int:
    grid = GridSpec(config.n_cells)
    model = build_model(config)
    if config.mass <= 1:
        raise ConfigError("certificate scenario needs mass > 1")
    report = certify(config.mass, config.q, model, grid,
                     eps=config.cert_eps if config.cert_eps > 0 else None)
    payload = report.as_dict()
    payload["config"] = dataclasses.asdict(config)
    _write_json(out / "certificate.json", payload)
    return 0


def _threshold_scan(config: ScenarioConfig, out: Path) -> int:
    grid = GridSpec(config.n_cells)
    model = build_model(config)
    result = search_mass_threshold(
        config.q, model, grid, (config.m_lo, config.m_hi),
        eps=config.cert_eps if config.cert_eps > 0 else None,
        rtol=config.search_rtol)
    payload = {
        "found": result.found,
        "m0": result.M0,
        "monotone_ok": result.monotone_ok,
        "reason": result.reason,
        "trace": [{"mass": m, "a_at_phi0": a, "certified": c}
                  for (m, a, c) in result.trace],
        "config": dataclasses.asdict(config),
    }
    _write_json(out / "threshold.json", payload)
    return 0 if result.found and result.monotone_ok else 2


def _inequalities(config: ScenarioConfig, out: Path,
                  suites=None) -> int:
    grid = GridSpec(config.n_cells)
    rng = np.random.default_rng(config.seed)
    all_suites = ("exp-embedding", "sobolev", "llogl", "counterexample",
                  "critical-mass")
    chosen = tuple(suites) if suites else all_suites
    unknown = set(chosen) - set(all_suites)
    if unknown:
        raise ConfigError(f"unknown inequality suite(s): {sorted(unknown)}")

    payload: dict = {"config": dataclasses.asdict(config), "suites": {}}
    violations = 0

    if "exp-embedding" in chosen:
        worst = np.inf
        count = 0
        for _ in range(config.samples):
            m = random_field(rng, grid)
            rep = verify_exp_embedding(m, config.nu, grid)
            count += 0 if rep.ok else 1
            worst = min(worst, rep.margin)
        payload["suites"]["exp-embedding"] = {
            "samples": config.samples, "nu": config.nu,
            "violations": count, "worst_margin": worst}
        violations += count

    if "sobolev" in chosen:
        count = 0
        worst = np.inf
        for _ in range(config.samples):
            m = random_field(rng, grid)
            rep = sobolev_embedding_check(m, grid)
            count += 0 if rep.ok else 1
            worst = min(worst, rep.margin)
        payload["suites"]["sobolev"] = {
            "samples": config.samples, "violations": count,
            "worst_margin": worst}
        violations += count

    if "llogl" in chosen:
        count = 0
        worst = np.inf
        for _ in range(config.samples):
            w = random_nonneg_field(rng, grid)
            rep = verify_llogl_interpolation(w, config.llogl_n, grid)
            count += 0 if rep.ok else 1
            worst = min(worst, rep.margin)
        payload["suites"]["llogl"] = {
            "samples": config.samples, "N": config.llogl_n,
            "violations": count, "worst_margin": worst}
        violations += count

    if "counterexample" in chosen:
        family = counterexample_family(1.0, 1.0)
        eps_grid = np.geomspace(config.eps_lo, config.eps_hi,
                                config.eps_points)
        sweep = counterexample_sweep(eps_grid, 1.0, config.delta, config.h0)
        payload["suites"]["counterexample"] = {
            "closed_forms": family.closed,
            "quadrature_agreement": family.max_rel_err,
            "delta": config.delta, "h0": config.h0,
            "gaps": sweep["gaps"], "violated": sweep["violated"],
            "slope": sweep["slope"],
        }
        # violated=true is the expected finding, not an invariant failure

    if "critical-mass" in chosen:
        chi = config.chi
        thresh = critical_mass_threshold(chi)
        entry = {"chi": chi, "threshold": thresh}
        if thresh > 0:
            M = 0.9 * thresh
            nu = cor4_nu(M, chi)
            count = 0
            for _ in range(min(config.samples, 100)):
                m = random_field(rng, grid, amp=1.0)
                rep = verify_exp_embedding(m, nu, grid)
                count += 0 if rep.ok else 1
            entry.update({"mass": M, "nu": nu, "violations": count,
                          "samples": min(config.samples, 100)})
            violations += count
        payload["suites"]["critical-mass"] = entry

    _write_json(out / "inequalities.json", payload)
    return 2 if violations else 0


def run_scenario(config: ScenarioConfig, out_dir=None, suites=None) -> int:
    """Execute the configured scenario; returns the process exit code
    (0 clean, 2 when invariant monitors flagged violations)."""
    config.validate()
    out = Path(out_dir if out_dir is not None else config.out_dir)
    if config.label:
        out = out / config.label
    out.mkdir(parents=True, exist_ok=True)
    _kernels.set_backend(config.backend)

    if config.scenario in ("subcritical", "critical", "blowup", "custom"):
        return _simulation(config, out)
    if config.scenario == "certificate":
        return _certificate(config, out)
    if config.scenario == "threshold-scan":
        return _threshold_scan(config, out)
    if config.scenario == "inequalities":
        return _inequalities(config, out, suites=suites)
    raise ConfigError(f"unknown scenario {config.scenario!r}")


def _sweep_one(args):
    config, key, value, out_dir = args
    label = f"{key}={value:g}" if isinstance(value, float) else f"{key}={value}"
    sub = Path(out_dir) / label.replace("/", "_")
    try:
        cfg = dataclasses.replace(config, label="")
        coerced = type(getattr(cfg, key))(value)
        setattr(cfg, key, coerced)
        code = run_scenario(cfg, out_dir=sub)
        return label, {"status": "ok", "exit_code": code,
                       "summary": str(sub / "summary.json")}
    except Exception as exc:
        return label, {"status": "error", "message": str(exc)}


def run_sweep(config: ScenarioConfig, axis_key: str, values, out_dir=None,
              jobs: int = 1) -> int:
    """Run one scenario per axis value in its own subdirectory.

    Results are deterministic per value regardless of worker count; one
    run failing is recorded in the index without aborting the rest.
    """
    if not values:
        raise InputDomainError("axis value list must not be empty")
    if not hasattr(ScenarioConfig, axis_key) or axis_key == "scenario":
        raise ConfigError(f"cannot sweep over key {axis_key!r}")
    for v in values:
        if not np.isfinite(float(v)):
            raise InputDomainError(f"axis value {v!r} is not finite")
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    tasks = [(config, axis_key, v, out) for v in values]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_one, tasks))
    else:
        results = [_sweep_one(t) for t in tasks]

    index = {"axis": axis_key, "values": [float(v) for v in values],
             "runs": dict(results)}
    _write_json(out / "index.json", index)
    statuses = [entry for _, entry in results]
    if all(e["status"] == "error" for e in statuses):
        return 1
    if any(e["status"] == "ok" and e["exit_code"] == 2 for e in statuses):
        return 2
    return 0
