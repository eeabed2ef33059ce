"""Exception hierarchy shared by the library and the CLI."""


class ShellReconError(Exception):
    """Base class for all library errors."""


class DomainError(ShellReconError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class BesselRangeError(ShellReconError, OverflowError):
    """An unscaled Bessel value is not representable as a float.

    Use the exponentially scaled variants (``scaled=True``) or the
    mantissa/exponent form from :func:`shellrecon.special_fn.ik_scaled`.
    """


class NumericDegeneracyError(ShellReconError, ArithmeticError):
    """A per-mode solve is numerically degenerate (e.g. a vanishing denominator)."""

    def __init__(self, message, mode=None):
        super().__init__(message)
        self.mode = mode


class OracleSingularError(NumericDegeneracyError):
    """The finite-difference system is singular (a Neumann resonance)."""


class TruncationError(ShellReconError):
    """A spectral sup could not be certified within the mode cap."""


class TruncationWarning(UserWarning):
    """The tail of a symbol sequence has not begun decreasing at ``n_max``."""


class IllPosedModeError(ShellReconError):
    """A measurement mode carries no usable information about the core."""


class InconsistentMeasurementError(ShellReconError):
    """The measurement cannot come from any admissible core-shell configuration."""

    def __init__(self, message, estimates=None):
        super().__init__(message)
        self.estimates = estimates or []


class BracketError(ShellReconError):
    """The target value lies outside the range scanned by the root bracket."""


class NoRootError(ShellReconError):
    """No sign change of the nonuniqueness determinant was found."""
