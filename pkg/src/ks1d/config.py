"""Flat key = value scenario configuration.

One pair per line, `#` starts a comment, blank lines ignored.  Unknown
keys, malformed lines, and out-of-range values raise ConfigError with
the offending line number.  Scenario presets fill defaults before user
keys are applied.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError

__all__ = ["ScenarioConfig", "parse_config", "load_config", "SCENARIOS",
           "INITIAL_PRESETS"]

SCENARIOS = ("subcritical", "critical", "blowup", "threshold-scan",
             "certificate", "inequalities", "custom")

INITIAL_PRESETS = ("constant", "perturbed", "ramp", "file")


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass
class ScenarioConfig:
    scenario: str = "custom"
    label: str = ""
    out_dir: str = "ks1d_out"
    backend: str = "auto"
    seed: int = 0

    # model
    n_cells: int = 256
    chi: float = 1.0
    eps: float = 1.0
    mass: float = 1.0
    d: float = 1.0
    gamma: float = 0.0
    alpha: float = 2.0
    diffusion_table: str = ""

    # run
    t_end: float = 1.0
    q: float = 3.0
    sample_cadence: float = 0.01
    max_steps: int = 10_000_000
    initial: str = "constant"
    initial_file: str = ""
    perturb_amp: float = 0.1
    perturb_mode: int = 1

    # step controller
    dt_init: float = 1e-4
    dt_min: float = 1e-12
    dt_max: float = 1e-2
    cfl_safety: float = 0.4
    blowup_threshold: float = 1e8

    # certificate / threshold scan (mass <= 0 means pick automatically)
    cert_eps: float = 0.0
    m_lo: float = 1.01
    m_hi: float = 32.0
    search_rtol: float = 1e-8

    # inequality suites
    samples: int = 200
    nu: float = 1.0
    llogl_n: float = 10.0
    delta: float = 1.0 / 24.0
    h0: float = 10.0
    eps_lo: float = 1e-4
    eps_hi: float = 1e-2
    eps_points: int = 9

    def validate(self) -> None:
        def bad(msg):
            return ConfigError(msg)

        if self.scenario not in SCENARIOS:
            raise bad(f"scenario must be one of {SCENARIOS}, "
                      f"got {self.scenario!r}")
        if self.initial not in INITIAL_PRESETS:
            raise bad(f"initial must be one of {INITIAL_PRESETS}, "
                      f"got {self.initial!r}")
        if self.n_cells < 2:
            raise bad("n_cells must be at least 2")
        for key in ("chi", "eps", "d", "t_end", "sample_cadence",
                    "dt_init", "dt_min", "dt_max"):
            if getattr(self, key) <= 0:
                raise bad(f"{key} must be positive")
        if self.blowup_threshold < 0:
            raise bad("blowup_threshold must be nonnegative "
                      "(0 selects a concentration proxy)")
        if self.alpha < 0:
            raise bad("alpha must be nonnegative")
        if self.gamma < 0:
            raise bad("gamma must be nonnegative")
        if self.q <= 1:
            raise bad("q must exceed 1")
        if not 0 < self.cfl_safety <= 0.5:
            raise bad("cfl_safety must lie in (0, 0.5]")
        if not 0 <= self.perturb_amp < 1:
            raise bad("perturb_amp must lie in [0, 1)")
        if self.perturb_mode < 1:
            raise bad("perturb_mode must be a positive integer")
        if self.initial == "file" and not self.initial_file:
            raise bad("initial = file requires initial_file")
        if self.scenario != "inequalities" and self.initial != "ramp" \
                and self.scenario not in ("threshold-scan", "certificate") \
                and self.mass <= 0:
            raise bad("mass must be positive")
        if self.m_lo <= 1 or self.m_hi <= self.m_lo:
            raise bad("mass bracket needs 1 < m_lo < m_hi")
        if self.samples < 1:
            raise bad("samples must be positive")
        if self.eps_lo <= 0 or self.eps_hi <= self.eps_lo:
            raise bad("epsilon sweep needs 0 < eps_lo < eps_hi")
        if self.eps_points < 2:
            raise bad("eps_points must be at least 2")


_COERCERS = {}
for f in fields(ScenarioConfig):
    if f.type in ("int", int):
        _COERCERS[f.name] = int
    elif f.type in ("float", float):
        _COERCERS[f.name] = float
    elif f.type in ("bool", bool):
        _COERCERS[f.name] = _bool
    else:
        _COERCERS[f.name] = str

# Presets only override defaults; explicit keys in the config file win.
_PRESET_OVERRIDES = {
    "custom": {},
    "subcritical": {
        "alpha": 0.5, "mass": 3.0, "chi": 1.0, "eps": 1.0,
        "t_end": 20.0, "initial": "perturbed", "perturb_amp": 0.2,
        "sample_cadence": 0.05,
    },
    "critical": {
        "alpha": 1.0, "mass": 0.9, "chi": 1.0, "eps": 1.0,
        "t_end": 20.0, "initial": "perturbed", "perturb_amp": 0.2,
        "sample_cadence": 0.05,
    },
    "blowup": {
        "alpha": 2.0, "q": 5.0, "mass": 0.0, "n_cells": 512,
        "initial": "ramp", "t_end": 2.0, "sample_cadence": 1e-3,
        "blowup_threshold": 0.0,
    },
    "threshold-scan": {"alpha": 2.0, "q": 5.0, "mass": 0.0},
    "certificate": {"alpha": 2.0, "q": 5.0, "mass": 50.0, "n_cells": 512},
    "inequalities": {"n_cells": 2048, "samples": 200},
}


def parse_config(text: str) -> ScenarioConfig:
    """Parse key = value lines into a validated ScenarioConfig."""
    pairs: list[tuple[int, str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {raw!r}",
                              line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError("empty key", line=lineno)
        if key not in _COERCERS:
            raise ConfigError(f"unknown key {key!r}", line=lineno)
        pairs.append((lineno, key, value))

    cfg = ScenarioConfig()
    scenario = "custom"
    for lineno, key, value in pairs:
        if key == "scenario":
            scenario = value
    if scenario not in _PRESET_OVERRIDES:
        raise ConfigError(f"scenario must be one of {SCENARIOS}, "
                          f"got {scenario!r}")
    for key, value in _PRESET_OVERRIDES[scenario].items():
        setattr(cfg, key, value)
    cfg.scenario = scenario

    for lineno, key, value in pairs:
        try:
            setattr(cfg, key, _COERCERS[key](value))
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}",
                              line=lineno) from exc
    try:
        cfg.validate()
    except ConfigError as exc:
        if exc.line is None:
            # Attach the line of the offending key when it was set explicitly.
            for lineno, key, _ in pairs:
                if key in str(exc.message):
                    raise ConfigError(exc.message, line=lineno) from None
        raise
    return cfg


def load_config(path) -> ScenarioConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))
