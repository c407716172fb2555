"""Exception types raised by the laboratory."""


class LabError(Exception):
    """Base class for every error the laboratory raises on purpose."""


class GridError(LabError, ValueError):
    """Invalid grid description or grid mismatch between fields."""


class ParameterError(LabError, ValueError):
    """Exponents, times or sizes outside their admissible range."""


class ConfigError(LabError, ValueError):
    """Run configuration failed schema validation."""

    def __init__(self, path: str, reason: str) -> None:
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


class FitError(LabError, ValueError):
    """Not enough usable samples for a log-log fit."""


class SmallnessError(LabError):
    """Initial data violates the smallness precondition of the fixed-point scheme."""


class DivergenceConstraintError(LabError):
    """Initial data is not divergence-free to the required tolerance."""


class NonContractionError(LabError):
    """Picard iteration stopped contracting; carries the diagnostics of the run."""

    def __init__(self, message: str, diagnostics) -> None:
        self.diagnostics = diagnostics
        super().__init__(message)


class PersistenceError(LabError):
    """A persisted run could not be read back."""
