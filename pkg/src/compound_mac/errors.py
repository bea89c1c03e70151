"""Exception hierarchy shared by all modules."""


class CompoundMacError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(CompoundMacError, ValueError):
    """Inconsistent shapes, labels or argument combinations."""


class DomainError(CompoundMacError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ValidationError(ConfigurationError):
    """A channel file or other external input failed validation."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class QuantizationInfeasible(CompoundMacError):
    """The rounding scheme could not satisfy both quantization inequalities."""

    def __init__(self, message, state=None, entry=None):
        super().__init__(message)
        self.state = state
        self.entry = entry


class BlocklengthTooSmall(CompoundMacError):
    """No admissible conference parameters exist at the requested blocklength."""

    def __init__(self, message, minimal_n=None):
        super().__init__(message)
        self.minimal_n = minimal_n


class InfeasiblePlan(CompoundMacError):
    """A conference plan violates one of its defining constraints."""


class InstanceTooLarge(CompoundMacError):
    """An exact enumeration was requested beyond its size guard."""
