"""Fine-scale and homogenized elastodynamics of stratified high-contrast composites."""
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
