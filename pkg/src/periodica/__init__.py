"""Damped waves in periodic media: homogenization, Bloch bands, decay experiments."""

__version__ = "0.1.0"

from . import errors
from .medium import Medium, TorusGrid, build_medium, sample_on_grid

__all__ = [
    "errors",
    "Medium",
    "TorusGrid",
    "build_medium",
    "sample_on_grid",
    "__version__",
]
