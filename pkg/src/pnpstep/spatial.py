"""Finite-difference building blocks on a mesh.

Grid functions are float arrays of length ``mesh.n``.  Conventions:

* cell midpoint values use the arithmetic mean ``(u[i] + u[i+1]) / 2``;
* midpoint derivatives use the two-point difference over the cell;
* interior flux divergence is ``(J[i+1/2] - J[i-1/2]) / ((x[i+1]-x[i-1])/2)``,
  which is exact for quadratics and second-order accurate on smooth
  nonuniform meshes;
* boundary first derivatives use one-sided three-node stencils, exact
  through quadratics.

The Poisson solver assembles the nonuniform three-point second-difference
operator with Robin rows ``a u + b u_x = c`` at each end.  The three-node
boundary stencils reach two columns in, breaking tridiagonality; the
assembler folds that fringe into the neighbouring interior rows once, then
caches the Thomas factorization so each solve is two O(n) sweeps.  BC
right-hand sides are per-solve inputs, so one operator serves a whole run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .linalg import TriDiagMatrix


def three_point_derivative_coeffs(z0, z1, z2, at):
    """Weights (w0, w1, w2) with u'(at) ~ w0 u(z0) + w1 u(z1) + w2 u(z2).

    Lagrange differentiation; exact for polynomials up to degree 2.
    """
    w0 = ((at - z1) + (at - z2)) / ((z0 - z1) * (z0 - z2))
    w1 = ((at - z0) + (at - z2)) / ((z1 - z0) * (z1 - z2))
    w2 = ((at - z0) + (at - z1)) / ((z2 - z0) * (z2 - z1))
    return w0, w1, w2


def boundary_derivative_coeffs(mesh, side):
    """Three-node one-sided u_x stencil at the left or right boundary."""
    x = mesh.nodes
    if side == "left":
        return three_point_derivative_coeffs(x[0], x[1], x[2], x[0])
    if side == "right":
        return three_point_derivative_coeffs(x[-3], x[-2], x[-1], x[-1])
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def boundary_first_derivative(u, mesh, side):
    """One-sided three-node approximation of u_x at x=0 or x=1."""
    w0, w1, w2 = boundary_derivative_coeffs(mesh, side)
    if side == "left":
        return w0 * u[0] + w1 * u[1] + w2 * u[2]
    return w0 * u[-3] + w1 * u[-2] + w2 * u[-1]


def midpoint_average(u):
    return 0.5 * (u[:-1] + u[1:])


def midpoint_derivative(u, mesh):
    return np.diff(u) / mesh.spacings


def flux_divergence_interior(u, mesh, flux):
    """(J)_x at interior nodes for a midpoint-flux evaluator.

    ``flux(u_mid, dudx_mid, x_mid)`` returns the flux at the n-1 cell
    midpoints.  Model code negates the result when its continuity equation
    reads u_t = -(J)_x.
    """
    jmid = flux(midpoint_average(u), midpoint_derivative(u, mesh), mesh.midpoints)
    return np.diff(jmid) / mesh.interior_widths


def laplacian_band(mesh, boundary="ghost"):
    """(sub, diag, sup) band of the nonuniform second-difference operator.

    Interior row i encodes the three-point u_xx stencil.  With
    ``boundary="ghost"`` the end rows apply the one-sided midpoint
    derivative over a half cell,

        row 0:    ( u_x|_{1/2} ) / (dx0 / 2)
        row n-1:  ( -u_x|_{n-3/2} ) / (dx_last / 2)

    which is the implicit part of the half-cell boundary update (a
    Neumann-type operator with a zero row-sum, hence a zero eigenvalue).
    With ``boundary="none"`` the end rows are left zero for the caller to
    fill.
    """
    dx = mesh.spacings
    n = mesh.n
    sub = np.zeros(n - 1)
    diag = np.zeros(n)
    sup = np.zeros(n - 1)
    dxm, dxp = dx[:-1], dx[1:]
    sub[:-1] = 2.0 / (dxm * (dxp + dxm))
    diag[1:-1] = -2.0 / (dxp * dxm)
    sup[1:] = 2.0 / (dxp * (dxp + dxm))
    if boundary == "ghost":
        diag[0] = -2.0 / dx[0] ** 2
        sup[0] = 2.0 / dx[0] ** 2
        sub[-1] = 2.0 / dx[-1] ** 2
        diag[-1] = -2.0 / dx[-1] ** 2
    elif boundary != "none":
        raise ValueError(f"unknown boundary mode {boundary!r}")
    return sub, diag, sup


@dataclass(frozen=True)
class RobinBC:
    """Boundary row a*u + b*u_x = c."""

    a: float
    b: float
    c: float = 0.0


def neumann(g):
    return RobinBC(0.0, 1.0, g)


class PoissonOperator:
    """Prefactored discrete u_xx = f with Robin/Neumann boundary rows."""

    def __init__(self, mesh, bc_left, bc_right):
        self.mesh = mesh
        self.bc_left = bc_left
        self.bc_right = bc_right
        n = mesh.n
        sub, diag, sup = laplacian_band(mesh, boundary="none")

        wl = boundary_derivative_coeffs(mesh, "left")
        diag[0] = bc_left.a + bc_left.b * wl[0]
        sup[0] = bc_left.b * wl[1]
        fringe_left = bc_left.b * wl[2]

        wr = boundary_derivative_coeffs(mesh, "right")
        diag[-1] = bc_right.a + bc_right.b * wr[2]
        sub[-1] = bc_right.b * wr[1]
        fringe_right = bc_right.b * wr[0]

        # Fold the col-2 / col-(n-3) fringe entries into the end rows using
        # the adjacent interior rows, then factor once.
        self._ml = fringe_left / sup[1]
        diag[0] -= self._ml * sub[0]
        sup[0] -= self._ml * diag[1]
        self._mr = fringe_right / sub[n - 3]
        sub[-1] -= self._mr * diag[n - 2]
        diag[-1] -= self._mr * sup[n - 2]

        self._sub, self._diag, self._sup = sub, diag, sup
        self._low, self._dpr = kernels.thomas_factor(sub, diag, sup)

    def solve(self, rhs, c_left=None, c_right=None):
        """Solve for the nodal field given interior values of f.

        ``rhs`` is a full-length grid function; its end entries are ignored
        and replaced by the boundary data (defaults: the c values the
        operator was assembled with).
        """
        b = np.array(rhs, dtype=float)
        b[0] = self.bc_left.c if c_left is None else c_left
        b[-1] = self.bc_right.c if c_right is None else c_right
        b[0] -= self._ml * b[1]
        b[-1] -= self._mr * b[-2]
        return kernels.thomas_solve_factored(self._low, self._dpr, self._sup, b)

    def to_tridiag(self):
        """Eliminated tridiagonal core (fringe already folded in)."""
        return TriDiagMatrix(self._sub.copy(), self._diag.copy(), self._sup.copy())


def assemble_poisson(mesh, bc_left, bc_right):
    return PoissonOperator(mesh, bc_left, bc_right)


def solve_poisson(operator, rhs, c_left=None, c_right=None):
    return operator.solve(rhs, c_left=c_left, c_right=c_right)
