"""Finite-volume laboratory for a 1D chemotaxis system with nonlinear
diffusion: simulation, energy diagnostics, blowup certificates, and
numerical checks of the supporting functional inequalities."""

from .errors import (
    ConfigError,
    DivergentTailError,
    InputDomainError,
    KS1DError,
    NumericStateError,
    ResolutionError,
    TableRangeError,
)
from .model import (
    GridSpec,
    Params,
    PowerLawDiffusion,
    State,
    TabulatedDiffusion,
    load_diffusion_table,
)
from .entropy import EntropyProfile
from .stepping import Outcome, StepController, Trajectory, run
from .certificate import (
    CertificateReport,
    ConcaveEnvelope,
    blowup_initial_data,
    build_tail_envelope,
    certificate_A,
    certify,
    concave_majorant,
    search_mass_threshold,
)

__version__ = "0.1.0"

__all__ = [
    "KS1DError", "InputDomainError", "NumericStateError",
    "DivergentTailError", "TableRangeError", "ResolutionError", "ConfigError",
    "GridSpec", "Params", "State", "PowerLawDiffusion", "TabulatedDiffusion",
    "load_diffusion_table", "EntropyProfile",
    "StepController", "Outcome", "Trajectory", "run",
    "ConcaveEnvelope", "concave_majorant", "certificate_A", "certify",
    "CertificateReport", "blowup_initial_data", "build_tail_envelope",
    "search_mass_threshold",
    "__version__",
]
