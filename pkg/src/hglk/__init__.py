"""Numerical toolkit for the half Ginzburg-Landau-Kuramoto equation on a periodic 1-D grid."""

from .errors import (AssumptionError, BlowupDetected, ContractionError, ConvergenceError,
                     GridMismatchError)
from .grid import Field, Grid

__all__ = ["Grid", "Field", "AssumptionError", "BlowupDetected", "ContractionError",
           "ConvergenceError", "GridMismatchError"]
__version__ = "0.1.0"
