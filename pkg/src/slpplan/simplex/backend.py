"""Kernel backend selection: compiled Cython extension when available, NumPy
fallback otherwise.  SLPPLAN_PURE_PYTHON=1 forces the fallback."""

import os

_force_py = os.environ.get("SLPPLAN_PURE_PYTHON", "").strip().lower() in {"1", "true", "yes"}

if _force_py:
    from . import kernels_py as kernels

    BACKEND_NAME = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]

        BACKEND_NAME = "cython"
    except ImportError:
        from . import kernels_py as kernels  # type: ignore[no-redef]

        BACKEND_NAME = "python"


def backend_name() -> str:
    return BACKEND_NAME
