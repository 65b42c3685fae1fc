"""Exception types shared across the package."""


class KS1DError(Exception):
    """Base class for all package-specific errors."""


class InputDomainError(KS1DError, ValueError):
    """An argument lies outside the mathematically admissible domain."""


class NumericStateError(KS1DError, ValueError):
    """A field or state violates a structural requirement (negativity,
    non-finite entries, wrong length)."""


class DivergentTailError(InputDomainError):
    """Requested a tail integral of a diffusion whose tail does not converge."""


class TableRangeError(InputDomainError):
    """Evaluation point falls outside a tabulated range.

    Carries the offending value and the violated bound so callers can
    report actionable messages.
    """

    def __init__(self, value, low, high):
        self.value = value
        self.low = low
        self.high = high
        super().__init__(
            f"value {value!r} outside tabulated range [{low!r}, {high!r}]")


class ResolutionError(KS1DError, ValueError):
    """A grid is too coarse to represent the requested data or dynamics."""


class ConfigError(KS1DError, ValueError):
    """Malformed scenario configuration (carries a line number when known)."""

    def __init__(self, message, line=None):
        self.message = message
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
