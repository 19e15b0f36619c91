"""Torus-equivariant geometry of quiver Grassmannians for the equioriented cycle."""

from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
