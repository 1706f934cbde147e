"""Exception types shared across the package."""


class StokestringError(Exception):
    """Base class for all package-specific failures."""


class ConfigError(StokestringError):
    """Malformed run configuration (bad key, bad value, bad file)."""


class SingularKernelError(StokestringError):
    """Fundamental solution evaluated at the origin."""


class WellPosednessError(StokestringError):
    """A standing geometric margin was violated.

    Carries the name and value of the offending margin so callers can
    report which assumption broke.
    """

    def __init__(self, margin: str, value: float, message: str = ""):
        self.margin = margin
        self.value = value
        super().__init__(message or f"margin {margin} violated: {value:.3e}")


class WellStretchedViolation(WellPosednessError):
    """min(1 + y_s) dropped to zero or below; coordinate map not invertible."""

    def __init__(self, value: float):
        super().__init__("beta2", value, f"well-stretched margin non-positive: {value:.3e}")


class SelfIntersectionError(WellPosednessError):
    """Chord/arc margin non-positive; boundary integrals lose meaning."""

    def __init__(self, value: float):
        super().__init__("beta1", value, f"chord/arc margin non-positive: {value:.3e}")


class NonClosableInputError(StokestringError):
    """Initial data could not be projected onto the closed-string constraint."""


class SimulationAbort(StokestringError):
    """Time stepping stopped before the horizon.

    reason is one of {"margin-abort", "nan-abort"}; record holds the last
    diagnostics computed before the abort (may be None).
    """

    def __init__(self, reason: str, message: str, record=None):
        self.reason = reason
        self.record = record
        super().__init__(message)
