"""Exception types shared across the package."""


class LatspecError(Exception):
    """Base class for numerical failures raised by latspec."""


class ConfigError(LatspecError):
    """Invalid run configuration. Carries the offending key when known."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class EigenConvergenceError(LatspecError):
    """Dense eigensolve did not meet the residual contract."""


class OverflowGuardError(LatspecError):
    """A computation would exceed double-precision headroom.

    The remedy is always to shrink the window, the weight rate, or the
    scaling angle, and the message says which.
    """


class BranchProximityWarning(UserWarning):
    """Evaluation close to a branch cut; results may lose accuracy."""


class CutProximityError(LatspecError):
    """Spectral-parameter too close to the essential spectrum [0, 4]."""


class ContourError(LatspecError):
    """Contour integration failed (singular node or non-integer index)."""


class MarginError(LatspecError):
    """Window margin too small: restriction polluted by the boundary."""
