"""Exception types raised by the simulator."""


class PilotSimError(Exception):
    """Base class for all simulator errors."""


class ConfigError(PilotSimError, ValueError):
    """Invalid or inconsistent system configuration."""


class PilotOverheadExceedsCoherence(ConfigError):
    """The pilot book does not fit inside the coherence block."""


class ShapeMismatch(PilotSimError, ValueError):
    pass


class DegenerateEstimate(PilotSimError, ArithmeticError):
    """A channel estimate has zero variance and cannot be normalized."""


class InsufficientAntennas(PilotSimError, ValueError):
    """Zero-forcing needs strictly more antennas than users."""


class SingularGram(PilotSimError, ArithmeticError):
    """The estimated Gram matrix is too ill-conditioned to invert."""
