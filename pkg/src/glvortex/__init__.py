"""Vortex filament approximation and energy certificates for 3D Ginzburg-Landau fields."""
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
