"""Kernel backend selection.

The compiled extension is used when importable; set ``PNPSTEP_PURE_PYTHON=1``
to force the NumPy fallback (useful for benchmarking and debugging).
"""

import os

if os.environ.get("PNPSTEP_PURE_PYTHON"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _speedups as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

BACKEND = _impl.BACKEND
PIVOT_FLOOR = _impl.PIVOT_FLOOR
thomas_solve = _impl.thomas_solve
thomas_factor = _impl.thomas_factor
thomas_solve_factored = _impl.thomas_solve_factored
advection_rhs = _impl.advection_rhs
