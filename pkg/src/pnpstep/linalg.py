"""Minimal dense/banded linear algebra for the solvers and diagnostics.

The time loop only ever needs tridiagonal solves (plus a two-row "fringe"
elimination when one-sided three-node boundary stencils are in play); dense
eigenvalues are a diagnostics-only path with a hard size cap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NumericalFailureError

EIG_SIZE_CAP = 512
_EIG_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class TriDiagMatrix:
    """Tridiagonal matrix stored as (sub, diag, sup) coefficient arrays."""

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    def __post_init__(self):
        n = self.diag.shape[0]
        if self.sub.shape[0] != n - 1 or self.sup.shape[0] != n - 1:
            raise ValueError("inconsistent tridiagonal band sizes")

    @property
    def n(self):
        return self.diag.shape[0]

    def matvec(self, x):
        y = self.diag * x
        y[:-1] += self.sup * x[1:]
        y[1:] += self.sub * x[:-1]
        return y

    def to_dense(self):
        a = np.diag(self.diag)
        a[np.arange(self.n - 1) + 1, np.arange(self.n - 1)] = self.sub
        a[np.arange(self.n - 1), np.arange(self.n - 1) + 1] = self.sup
        return a


def solve_tridiag(a: TriDiagMatrix, b):
    """Solve ``a x = b`` by Thomas elimination.

    Raises SingularMatrixError on a zero/near-zero pivot (relative floor
    ``kernels.PIVOT_FLOOR``); the assembled operators in this package are
    near-diagonally dominant, so no pivoting is done.
    """
    b = np.ascontiguousarray(b, dtype=float)
    return kernels.thomas_solve(a.sub, a.diag, a.sup, b)


def solve_bordered_tridiag(sub, diag, sup, fringe_left, fringe_right, rhs):
    """Solve a tridiagonal system whose first/last rows carry one extra
    entry two columns in (from three-node boundary stencils).

    ``fringe_left`` is the row-0 coefficient on column 2, ``fringe_right``
    the row-(n-1) coefficient on column n-3; either may be 0.  The fringe is
    eliminated against the adjacent interior row before the Thomas sweep.
    """
    n = diag.shape[0]
    if fringe_left != 0.0 or fringe_right != 0.0:
        sub = sub.copy()
        diag = diag.copy()
        sup = sup.copy()
        rhs = rhs.copy()
        if fringe_left != 0.0:
            m = fringe_left / sup[1]
            diag[0] -= m * sub[0]
            sup[0] -= m * diag[1]
            rhs[0] -= m * rhs[1]
        if fringe_right != 0.0:
            m = fringe_right / sub[n - 3]
            sub[n - 2] -= m * diag[n - 2]
            diag[n - 1] -= m * sup[n - 2]
            rhs[n - 1] -= m * rhs[n - 2]
    return kernels.thomas_solve(sub, diag, sup, rhs)


def eigenvalues(a, cap=EIG_SIZE_CAP):
    """All eigenvalues of a dense square matrix (diagnostics only).

    Verifies a sample of eigenpair residuals and raises
    NumericalFailureError if the eigensolver fails or the residuals are
    out of line.  Matrices larger than ``cap`` are refused.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    n = a.shape[0]
    if n > cap:
        raise ValueError(f"eigenvalues capped at n={cap} (got {n}); diagnostics only")
    try:
        vals, vecs = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"eigenvalue iteration failed: {exc}") from exc
    scale = max(np.abs(a).max(), 1.0)
    for k in range(0, n, max(1, n // 8)):
        v = vecs[:, k]
        resid = np.abs(a @ v - vals[k] * v).max()
        if resid > _EIG_RESIDUAL_TOL * scale * max(1.0, abs(vals[k])):
            raise NumericalFailureError(
                f"eigenpair residual {resid:.3e} too large for eigenvalue {vals[k]:.6g}"
            )
    return vals
