"""Simplified coupled parabolic-elliptic test system.

    u_t = u_xx + (u v_x)_x          (transported species)
    v_xx = -u,  v(0) = v_x(0),  v_x(1) = 0   (potential)

The flux of u is J = -u_x - u v_x.  Each boundary carries either a flux
constraint J = value or a Dirichlet constraint u = value; the stock
constraint functions are

    flux "bv"        J(0) = -u(0) e^{v(0)} + e^{-v(0)}   (electrode-like)
    flux "linear"    J(1) = u(1) - 1
    flux "zero"      no flux
    flux "coupled_linear"   J = v_b - 1/10
    flux "bv_symmetric"     J = u_b e^{v_b} - e^{-v_b}
    dirichlet "zero" / "coupled" (v_b - 1) / "cosine" (cos(u_b) - 1)
    dirichlet "decay" (e^{-t})

Two boundary treatments for flux constraints:

* "ghost": the PDE is applied at the boundary node over a half cell, with
  the constraint value standing in for the boundary flux; the diffusive
  part stays implicit (so the implicit operator is Neumann-like, with a
  zero eigenvalue).
* "direct": the rows  -u_x^{n+1} = extrapolated( J_bc + u v_x |_boundary )
  replace the boundary equations of the implicit solve; the u_x stencil is
  the one-sided three-node formula.

Dirichlet constraints become identity rows with the extrapolated target in
either treatment.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .linalg import solve_bordered_tridiag
from .spatial import (
    PoissonOperator,
    RobinBC,
    boundary_derivative_coeffs,
    laplacian_band,
    neumann,
)

FLUX_CONSTRAINTS = {
    "bv": lambda u, v, t: -u * np.exp(v) + np.exp(-v),
    "linear": lambda u, v, t: u - 1.0,
    "zero": lambda u, v, t: 0.0,
    "coupled_linear": lambda u, v, t: v - 0.1,
    "bv_symmetric": lambda u, v, t: u * np.exp(v) - np.exp(-v),
}

DIRICHLET_CONSTRAINTS = {
    "zero": lambda u, v, t: 0.0,
    "coupled": lambda u, v, t: v - 1.0,
    "cosine": lambda u, v, t: np.cos(u) - 1.0,
    "decay": lambda u, v, t: np.exp(-t),
}


def constraint(kind, name):
    table = {"flux": FLUX_CONSTRAINTS, "dirichlet": DIRICHLET_CONSTRAINTS}.get(kind)
    if table is None:
        raise ValueError(f"constraint kind must be 'flux' or 'dirichlet', got {kind!r}")
    if name not in table:
        raise ValueError(f"unknown {kind} constraint {name!r}")
    return kind, name, table[name]


class ToySystem:
    """The coupled system above, exposed to the time steppers."""

    def __init__(self, mesh, left=("flux", "bv"), right=("flux", "linear"),
                 treatment="ghost"):
        if treatment not in ("ghost", "direct"):
            raise ValueError(f"treatment must be 'ghost' or 'direct', got {treatment!r}")
        self.mesh = mesh
        self.treatment = treatment
        self.left = constraint(*left)
        self.right = constraint(*right)
        self.n = mesh.n

        self.poisson = PoissonOperator(mesh, RobinBC(1.0, -1.0, 0.0), neumann(0.0))

        # Row kinds: "ghost" rows evolve, the rest are algebraic constraints.
        self._left_kind = self._row_kind(self.left)
        self._right_kind = self._row_kind(self.right)
        mask = np.zeros(self.n, dtype=bool)
        mask[0] = self._left_kind != "ghost"
        mask[-1] = self._right_kind != "ghost"
        self.constraint_mask = mask if mask.any() else None

        self._lsub, self._ldiag, self._lsup = laplacian_band(mesh, boundary="ghost")
        self._wl = boundary_derivative_coeffs(mesh, "left")
        self._wr = boundary_derivative_coeffs(mesh, "right")

    def _row_kind(self, con):
        kind = con[0]
        if kind == "dirichlet":
            return "dirichlet"
        return "ghost" if self.treatment == "ghost" else "direct"

    # -- state plumbing ----------------------------------------------------
    def initial_state_vector(self, u0=1.0):
        u0 = np.asarray(u0, dtype=float)
        if u0.ndim == 0:
            return np.full(self.n, float(u0))
        if u0.shape != (self.n,):
            raise ValueError(f"initial data must have length {self.n}")
        return u0.copy()

    def elliptic_update(self, y, t):
        return self.poisson.solve(-y)

    def v_x_boundary(self, v, side):
        w = self._wl if side == "left" else self._wr
        if side == "left":
            return w[0] * v[0] + w[1] * v[1] + w[2] * v[2]
        return w[0] * v[-3] + w[1] * v[-2] + w[2] * v[-1]

    # -- stepper interface ---------------------------------------------------
    def explicit_rhs(self, y, v, t):
        with np.errstate(over="ignore", invalid="ignore"):
            jbc0 = self.left[2](y[0], v[0], t) if self._left_kind == "ghost" else 0.0
            jbc1 = self.right[2](y[-1], v[-1], t) if self._right_kind == "ghost" else 0.0
            f = kernels.advection_rhs(
                y, v, 1.0, self.mesh.spacings, self.mesh.interior_widths,
                float(jbc0), float(jbc1),
            )
        if self._left_kind != "ghost":
            f[0] = 0.0
        if self._right_kind != "ghost":
            f[-1] = 0.0
        return f

    def constraint_values(self, y, v, t):
        h = np.zeros(self.n)
        with np.errstate(over="ignore", invalid="ignore"):
            if self._left_kind == "dirichlet":
                h[0] = self.left[2](y[0], v[0], t)
            elif self._left_kind == "direct":
                h[0] = self.left[2](y[0], v[0], t) + y[0] * self.v_x_boundary(v, "left")
            if self._right_kind == "dirichlet":
                h[-1] = self.right[2](y[-1], v[-1], t)
            elif self._right_kind == "direct":
                h[-1] = self.right[2](y[-1], v[-1], t) + y[-1] * self.v_x_boundary(v, "right")
        return h

    def solve_implicit(self, coef, rhs):
        sub = -self._lsub
        diag = coef - self._ldiag
        sup = -self._lsup
        fringe_left = fringe_right = 0.0
        if self._left_kind == "dirichlet":
            diag[0], sup[0] = 1.0, 0.0
        elif self._left_kind == "direct":
            diag[0], sup[0] = -self._wl[0], -self._wl[1]
            fringe_left = -self._wl[2]
        if self._right_kind == "dirichlet":
            diag[-1], sub[-1] = 1.0, 0.0
        elif self._right_kind == "direct":
            diag[-1], sub[-1] = -self._wr[2], -self._wr[1]
            fringe_right = -self._wr[0]
        if fringe_left or fringe_right:
            return solve_bordered_tridiag(sub, diag, sup, fringe_left, fringe_right, rhs)
        return kernels.thomas_solve(sub, diag, sup, rhs)

    # -- diagnostics ---------------------------------------------------------
    def stability_operator(self):
        """Dense frozen implicit operator over the evolved rows (the matrix
        the amplification-root analysis linearizes about)."""
        n = self.n
        a = np.zeros((n, n))
        idx = np.arange(n)
        a[idx, idx] = self._ldiag
        a[idx[1:], idx[:-1]] = self._lsub
        a[idx[:-1], idx[1:]] = self._lsup
        if self.constraint_mask is None:
            return a
        keep = ~self.constraint_mask
        return a[np.ix_(keep, keep)]

    def direct_boundary_rows(self, u_prev, u_now, dt_old, dt_now):
        """The two algebraic boundary rows of the direct treatment, as
        (coefficients-on-(u0,u1,u2), rhs) and ((u_{n-3},u_{n-2},u_{n-1}), rhs).

        Only meaningful when both sides carry direct flux constraints.
        """
        w = dt_now / dt_old
        h_now = self.constraint_values(u_now.y, u_now.aux, u_now.t)
        h_prev = self.constraint_values(u_prev.y, u_prev.aux, u_prev.t)
        hx = (1.0 + w) * h_now - w * h_prev
        left = (tuple(-c for c in self._wl), hx[0])
        right = (tuple(-c for c in self._wr), hx[-1])
        return left, right
