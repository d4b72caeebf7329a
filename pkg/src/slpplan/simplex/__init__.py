"""Two-phase bounded-variable simplex with swappable dense kernels."""

from .backend import BACKEND_NAME, backend_name
from .core import TOL_DJ, TOL_FEAS, TOL_PIVOT, LpSolution, solve, warm_start_solve

__all__ = [
    "LpSolution",
    "solve",
    "warm_start_solve",
    "backend_name",
    "BACKEND_NAME",
    "TOL_FEAS",
    "TOL_DJ",
    "TOL_PIVOT",
]
