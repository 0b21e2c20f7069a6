"""Pure-NumPy implementations of the per-step hot kernels.

``pnpstep._speedups`` (Cython) implements the same functions with identical
semantics; ``pnpstep.kernels`` picks whichever is importable.  Keep the two
in sync -- ``tests/test_kernels.py`` checks parity.
"""

import numpy as np

from .errors import SingularMatrixError

BACKEND = "python"

# Forward-elimination pivots below PIVOT_FLOOR times the coefficient scale
# are treated as singular.
PIVOT_FLOOR = 1e-14


def _scale(sub, diag, sup):
    s = np.abs(diag).max()
    if sub.size:
        s = max(s, np.abs(sub).max(), np.abs(sup).max())
    return s if s > 0.0 else 1.0


def thomas_solve(sub, diag, sup, rhs):
    """Solve a tridiagonal system by Thomas elimination (no pivoting).

    Row i reads ``sub[i-1]*x[i-1] + diag[i]*x[i] + sup[i]*x[i+1] = rhs[i]``.
    Raises SingularMatrixError when a pivot magnitude falls below
    PIVOT_FLOOR relative to the largest coefficient.
    """
    n = diag.shape[0]
    floor = PIVOT_FLOOR * _scale(sub, diag, sup)
    x = np.empty(n)
    cp = np.empty(n - 1) if n > 1 else np.empty(0)
    piv = diag[0]
    if abs(piv) <= floor:
        raise SingularMatrixError("zero pivot in row 0")
    x[0] = rhs[0] / piv
    for i in range(1, n):
        cp[i - 1] = sup[i - 1] / piv
        piv = diag[i] - sub[i - 1] * cp[i - 1]
        if abs(piv) <= floor:
            raise SingularMatrixError(f"zero pivot in row {i}")
        x[i] = (rhs[i] - sub[i - 1] * x[i - 1]) / piv
    for i in range(n - 2, -1, -1):
        x[i] -= cp[i] * x[i + 1]
    return x


def thomas_factor(sub, diag, sup):
    """LU-factor a tridiagonal matrix for repeated solves.

    Returns ``(low, dpr)`` with ``low[i] = sub[i]/dpr[i]`` the elimination
    multipliers and ``dpr`` the modified diagonal.
    """
    n = diag.shape[0]
    floor = PIVOT_FLOOR * _scale(sub, diag, sup)
    low = np.empty(n - 1) if n > 1 else np.empty(0)
    dpr = np.empty(n)
    dpr[0] = diag[0]
    if abs(dpr[0]) <= floor:
        raise SingularMatrixError("zero pivot in row 0")
    for i in range(1, n):
        low[i - 1] = sub[i - 1] / dpr[i - 1]
        dpr[i] = diag[i] - low[i - 1] * sup[i - 1]
        if abs(dpr[i]) <= floor:
            raise SingularMatrixError(f"zero pivot in row {i}")
    return low, dpr


def thomas_solve_factored(low, dpr, sup, rhs):
    """Solve using factors from :func:`thomas_factor`."""
    n = dpr.shape[0]
    y = np.empty(n)
    y[0] = rhs[0]
    for i in range(1, n):
        y[i] = rhs[i] - low[i - 1] * y[i - 1]
    x = np.empty(n)
    x[n - 1] = y[n - 1] / dpr[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = (y[i] - sup[i] * x[i + 1]) / dpr[i]
    return x


def advection_rhs(c, p, z, dx, wint, jbc0, jbc1):
    """Divergence of the advective flux with half-cell boundary rows.

    The flux is ``J = -z * c * p_x`` evaluated at cell midpoints (arithmetic
    mean for c, two-point difference for p_x); the returned vector is
    ``-dJ/dx`` at every node.  Boundary nodes use half cells of width
    ``dx[0]/2`` and ``dx[-1]/2`` with the prescribed boundary flux values
    ``jbc0``/``jbc1`` standing in for the outer midpoint flux:

        f[0]  = (jbc0 - J[1/2]) / (dx[0]/2)
        f[-1] = (J[n-3/2] - jbc1) / (dx[-1]/2)

    so the ``w``-weighted sum of f telescopes to ``jbc0 - jbc1`` exactly.
    """
    dp = np.diff(p) / dx
    jmid = -z * 0.5 * (c[:-1] + c[1:]) * dp
    f = np.empty_like(c)
    f[0] = (jbc0 - jmid[0]) / (0.5 * dx[0])
    f[1:-1] = -np.diff(jmid) / wint
    f[-1] = (jmid[-1] - jbc1) / (0.5 * dx[-1])
    return f
