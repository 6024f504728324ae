"""Time-optimal evolution of open quantum systems under the Lindblad master equation."""

from .errors import DimensionError, NotHermitianError, QbrachError, ToleranceError, ValidationError

__version__ = "0.1.0"

__all__ = [
    "DimensionError",
    "NotHermitianError",
    "QbrachError",
    "ToleranceError",
    "ValidationError",
]
