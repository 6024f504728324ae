"""Exception types raised across the package."""


class QbrachError(Exception):
    """Base class for all package errors."""


class DimensionError(QbrachError, ValueError):
    """Operands have inconsistent or unsupported dimensions."""


class NotHermitianError(QbrachError, ValueError):
    """A matrix expected to be Hermitian is not, within tolerance."""


class ValidationError(QbrachError, ValueError):
    """A parameter or state violates its documented invariants."""


class ToleranceError(QbrachError, RuntimeError):
    """A numerical run breached a declared tolerance (drift, norm, consistency)."""
