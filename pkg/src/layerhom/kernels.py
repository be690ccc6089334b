"""Kernel backend selection.

The compiled extension is used when importable; ``LAYERHOM_PURE_PYTHON=1``
forces the NumPy fallback. ``BACKEND`` names the active choice.
"""
import os

from . import _kernels_py

if os.environ.get("LAYERHOM_PURE_PYTHON") == "1":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

q1_element_stiffness = _impl.q1_element_stiffness
q1_element_mass = _impl.q1_element_mass
tridiag_solve = _impl.tridiag_solve
tridiag_solve_batched = _impl.tridiag_solve_batched

__all__ = [
    "BACKEND",
    "q1_element_stiffness",
    "q1_element_mass",
    "tridiag_solve",
    "tridiag_solve_batched",
]
