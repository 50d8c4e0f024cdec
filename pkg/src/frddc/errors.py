"""Exception hierarchy shared across the toolkit."""


class FrddcError(Exception):
    """Base class for all toolkit errors."""


class PoleEvaluationError(FrddcError):
    """Raised when a rational model is evaluated at one of its poles."""

    def __init__(self, s, message=None):
        self.s = s
        super().__init__(message or f"evaluation at pole s = {s}")


class DegeneratePencilError(FrddcError):
    """Raised when the matrix pencil (A, E) is singular for every s."""


class RealificationError(FrddcError):
    """Raised when complex data cannot be transformed to a real realization."""


class CoefficientFormError(FrddcError):
    """Raised when conversion to polynomial coefficients is refused or fails."""


class BranchPointError(FrddcError):
    """Raised when an irrational transfer function is evaluated at a branch point."""


class DatasetFormatError(FrddcError):
    """Raised on malformed dataset files; carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ModelFormatError(FrddcError):
    """Raised on malformed model files or unknown form discriminators."""


class LoopSingularError(FrddcError):
    """Raised when the closed loop 1 + H(s)K(s) vanishes at a requested s."""

    def __init__(self, s):
        self.s = s
        super().__init__(f"loop singular at s = {s}")


class ReferenceSaturationError(FrddcError):
    """Raised when a reference model has (numerically) unit gain at a sample."""

    def __init__(self, omega):
        self.omega = omega
        super().__init__(f"reference saturates at sample omega = {omega}")


class PlantZeroError(FrddcError):
    """Raised when the plant response vanishes at a sample."""

    def __init__(self, omega):
        self.omega = omega
        super().__init__(f"plant zero at sample omega = {omega}")


class ConfigError(FrddcError):
    """Raised on invalid experiment configuration; message lists the fields."""
