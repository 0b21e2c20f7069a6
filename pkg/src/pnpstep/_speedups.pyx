# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the per-step hot kernels.

Mirror of ``pnpstep._kernels_py`` -- keep semantics identical.
"""

import numpy as np

from libc.math cimport fabs

from .errors import SingularMatrixError

BACKEND = "cython"

PIVOT_FLOOR = 1e-14


cdef double _scale(double[::1] sub, double[::1] diag, double[::1] sup) noexcept:
    cdef Py_ssize_t i
    cdef double s = 0.0, a
    for i in range(diag.shape[0]):
        a = fabs(diag[i])
        if a > s:
            s = a
    for i in range(sub.shape[0]):
        a = fabs(sub[i])
        if a > s:
            s = a
        a = fabs(sup[i])
        if a > s:
            s = a
    return s if s > 0.0 else 1.0


def thomas_solve(double[::1] sub, double[::1] diag, double[::1] sup,
                 double[::1] rhs):
    """Solve a tridiagonal system by Thomas elimination (no pivoting)."""
    cdef Py_ssize_t n = diag.shape[0]
    cdef double floor = PIVOT_FLOOR * _scale(sub, diag, sup)
    x_arr = np.empty(n)
    cp_arr = np.empty(n - 1 if n > 1 else 0)
    cdef double[::1] x = x_arr
    cdef double[::1] cp = cp_arr
    cdef double piv = diag[0]
    cdef Py_ssize_t i
    if fabs(piv) <= floor:
        raise SingularMatrixError("zero pivot in row 0")
    x[0] = rhs[0] / piv
    for i in range(1, n):
        cp[i - 1] = sup[i - 1] / piv
        piv = diag[i] - sub[i - 1] * cp[i - 1]
        if fabs(piv) <= floor:
            raise SingularMatrixError(f"zero pivot in row {i}")
        x[i] = (rhs[i] - sub[i - 1] * x[i - 1]) / piv
    for i in range(n - 2, -1, -1):
        x[i] -= cp[i] * x[i + 1]
    return x_arr


def thomas_factor(double[::1] sub, double[::1] diag, double[::1] sup):
    """LU-factor a tridiagonal matrix for repeated solves."""
    cdef Py_ssize_t n = diag.shape[0]
    cdef double floor = PIVOT_FLOOR * _scale(sub, diag, sup)
    low_arr = np.empty(n - 1 if n > 1 else 0)
    dpr_arr = np.empty(n)
    cdef double[::1] low = low_arr
    cdef double[::1] dpr = dpr_arr
    cdef Py_ssize_t i
    dpr[0] = diag[0]
    if fabs(dpr[0]) <= floor:
        raise SingularMatrixError("zero pivot in row 0")
    for i in range(1, n):
        low[i - 1] = sub[i - 1] / dpr[i - 1]
        dpr[i] = diag[i] - low[i - 1] * sup[i - 1]
        if fabs(dpr[i]) <= floor:
            raise SingularMatrixError(f"zero pivot in row {i}")
    return low_arr, dpr_arr


def thomas_solve_factored(double[::1] low, double[::1] dpr, double[::1] sup,
                          double[::1] rhs):
    """Solve using factors from :func:`thomas_factor`."""
    cdef Py_ssize_t n = dpr.shape[0]
    x_arr = np.empty(n)
    cdef double[::1] x = x_arr
    cdef Py_ssize_t i
    x[0] = rhs[0]
    for i in range(1, n):
        x[i] = rhs[i] - low[i - 1] * x[i - 1]
    x[n - 1] = x[n - 1] / dpr[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = (x[i] - sup[i] * x[i + 1]) / dpr[i]
    return x_arr


def advection_rhs(double[::1] c, double[::1] p, double z, double[::1] dx,
                  double[::1] wint, double jbc0, double jbc1):
    """Divergence of the advective flux with half-cell boundary rows.

    See the NumPy twin for the formula; outputs are identical.
    """
    cdef Py_ssize_t n = c.shape[0]
    cdef Py_ssize_t m = n - 1
    f_arr = np.empty(n)
    cdef double[::1] f = f_arr
    cdef double jprev, jnext
    cdef double zh = -z * 0.5
    cdef Py_ssize_t i
    jprev = zh * (c[0] + c[1]) * ((p[1] - p[0]) / dx[0])
    f[0] = (jbc0 - jprev) / (0.5 * dx[0])
    for i in range(1, m):
        jnext = zh * (c[i] + c[i + 1]) * ((p[i + 1] - p[i]) / dx[i])
        f[i] = -(jnext - jprev) / wint[i - 1]
        jprev = jnext
    f[n - 1] = (jprev - jbc1) / (0.5 * dx[m - 1])
    return f_arr
