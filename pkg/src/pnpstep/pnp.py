"""Ion transport with electrode reaction kinetics (two species).

Nondimensional model on x in (0, 1):

    dc/dt = -d/dx [ -dc/dx - z c dphi/dx ]        (both species, z = +/-1)
    -eps^2 phi_xx = (z+ c+ + z- c-) / 2

with Robin data on the potential at both electrodes (compact-layer ratio
delta), phi(0) - eps delta phi_x(0) = 0 and phi(1) + eps delta phi_x(1) =
v(t).  The anion is no-flux at both ends; the cation reacts:

    -J+(0) = 4 k_ca c+(0) e^{-dphi_a/2} - 4 j_ra e^{+dphi_a/2}
    +J+(1) = 4 k_cc c+(1) e^{-dphi_c/2} - 4 j_rc e^{+dphi_c/2}

where J = -c_x - z c phi_x, dphi_a = -phi(0) and dphi_c = v(t) - phi(1)
are the compact-layer potential drops.  Two operating modes:

* voltage: v(t) prescribed; unknowns are (c+, c-); the cell current can be
  recovered afterwards from the cathode charge balance
  (:func:`postprocess_current`).
* current: j_ext(t) prescribed; the cathode field s = phi_x(1, t) becomes
  an extra unknown obeying

      ds/dt = -(2 / eps^2) [ j_ext - (k_cc c+(1) e^{-dphi_c/2}
                                       - j_rc e^{+dphi_c/2}) ]

  the potential solve switches to a Neumann datum phi_x(1) = s, and
  v(t) = phi(1) + eps delta s follows from the Robin relation.

Boundary rows use the half-cell (ghost-point) update with the reaction
fluxes standing in for the boundary flux; diffusion is implicit, migration
explicit, so each step solves two independent tridiagonal systems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .spatial import PoissonOperator, RobinBC, boundary_first_derivative, laplacian_band, neumann, three_point_derivative_coeffs


@dataclass(frozen=True)
class PnpParams:
    epsilon: float
    delta: float = 1.0
    z_plus: float = 1.0
    z_minus: float = -1.0
    k_ca: float = 1.0
    k_cc: float = 1.0
    j_ra: float = 1.0
    j_rc: float = 1.0

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if self.delta < 0.0:
            raise ValueError("delta must be nonnegative")
        if min(self.k_ca, self.k_cc, self.j_ra, self.j_rc) < 0.0:
            raise ValueError("rate parameters must be nonnegative")


def np_flux(c, phi, z, mesh):
    """Midpoint species flux J = -c_x - z c phi_x (length n-1)."""
    dx = mesh.spacings
    return -np.diff(c) / dx - z * 0.5 * (c[:-1] + c[1:]) * np.diff(phi) / dx


def _as_callable(value):
    return value if callable(value) else (lambda t, _v=float(value): _v)


class PnpSystem:
    """Two-species transport + potential, exposed to the time steppers.

    State layout: [c+ (n), c- (n)] in voltage mode, with the cathode field
    s = phi_x(1, t) appended in current mode.  The potential is the
    auxiliary elliptic field, always recomputed from same-level data.
    """

    def __init__(self, mesh, params, mode="current", voltage=0.0, current=0.0):
        if mode not in ("voltage", "current"):
            raise ValueError(f"mode must be 'voltage' or 'current', got {mode!r}")
        self.mesh = mesh
        self.params = params
        self.mode = mode
        self.voltage = _as_callable(voltage)
        self.current = _as_callable(current)
        self.nx = mesh.n
        self.n = 2 * self.nx + (1 if mode == "current" else 0)
        self.constraint_mask = None

        p = params
        bc_left = RobinBC(1.0, -p.epsilon * p.delta, 0.0)
        if mode == "voltage":
            bc_right = RobinBC(1.0, p.epsilon * p.delta, 0.0)  # c set per solve
        else:
            bc_right = neumann(0.0)
        self.poisson = PoissonOperator(mesh, bc_left, bc_right)
        self._charge_scale = -0.5 / p.epsilon ** 2
        self._lsub, self._ldiag, self._lsup = laplacian_band(mesh, boundary="ghost")

    # -- initial data --------------------------------------------------------
    def initial_state_vector(self, c_plus=None, c_minus=None, phix_cathode=0.0,
                             perturbation=0.0):
        """Initial concentrations (default: 1 + perturbation*sin(2 pi x))."""
        x = self.mesh.nodes
        base = 1.0 + perturbation * np.sin(2.0 * np.pi * x)
        cp = base.copy() if c_plus is None else np.asarray(c_plus, dtype=float)
        cm = base.copy() if c_minus is None else np.asarray(c_minus, dtype=float)
        if cp.shape != (self.nx,) or cm.shape != (self.nx,):
            raise ValueError(f"concentration fields must have length {self.nx}")
        if self.mode == "current":
            return np.concatenate([cp, cm, [float(phix_cathode)]])
        return np.concatenate([cp, cm])

    def split(self, y):
        nx = self.nx
        c_plus = y[:nx]
        c_minus = y[nx:2 * nx]
        s = y[2 * nx] if self.mode == "current" else None
        return c_plus, c_minus, s

    # -- potential ------------------------------------------------------------
    def elliptic_update(self, y, t):
        cp, cm, s = self.split(y)
        p = self.params
        rhs = self._charge_scale * (p.z_plus * cp + p.z_minus * cm)
        if self.mode == "voltage":
            return self.poisson.solve(rhs, c_right=self.voltage(t))
        return self.poisson.solve(rhs, c_right=s)

    def cathode_voltage(self, y, phi, t):
        """v(t): prescribed in voltage mode, recovered from the Robin
        relation v = phi(1) + eps delta phi_x(1) in current mode."""
        if self.mode == "voltage":
            return self.voltage(t)
        p = self.params
        return phi[-1] + p.epsilon * p.delta * y[2 * self.nx]

    def stern_drops(self, y, phi, t):
        """(anode, cathode) compact-layer potential drops."""
        dphi_a = -phi[0]
        if self.mode == "voltage":
            dphi_c = self.voltage(t) - phi[-1]
        else:
            p = self.params
            dphi_c = p.epsilon * p.delta * y[2 * self.nx]
        return dphi_a, dphi_c

    # -- reaction fluxes -------------------------------------------------------
    def fbv_boundary_flux(self, y, phi, t, side):
        """Reaction-rate expression at an electrode (the 4k/4j form that the
        species boundary condition equates to the signed flux)."""
        p = self.params
        cp = y[:self.nx]
        dphi_a, dphi_c = self.stern_drops(y, phi, t)
        with np.errstate(over="ignore", invalid="ignore"):
            if side == "left":
                return 4.0 * p.k_ca * cp[0] * np.exp(-0.5 * dphi_a) \
                    - 4.0 * p.j_ra * np.exp(0.5 * dphi_a)
            if side == "right":
                return 4.0 * p.k_cc * cp[-1] * np.exp(-0.5 * dphi_c) \
                    - 4.0 * p.j_rc * np.exp(0.5 * dphi_c)
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")

    def faradaic_cathode(self, c_plus_right, dphi_c):
        p = self.params
        with np.errstate(over="ignore", invalid="ignore"):
            return p.k_cc * c_plus_right * np.exp(-0.5 * dphi_c) \
                - p.j_rc * np.exp(0.5 * dphi_c)

    def current_ode_rhs(self, y, phi, t):
        """ds/dt for the cathode field in current mode."""
        p = self.params
        _, dphi_c = self.stern_drops(y, phi, t)
        fara = self.faradaic_cathode(y[self.nx - 1], dphi_c)
        return -(2.0 / p.epsilon ** 2) * (self.current(t) - fara)

    # -- stepper interface -------------------------------------------------------
    def explicit_rhs(self, y, phi, t):
        p = self.params
        cp, cm, _ = self.split(y)
        dx, wint = self.mesh.spacings, self.mesh.interior_widths
        # Species boundary fluxes J(0), J(1): the anode condition reads
        # -J+(0) = (reaction rate), the cathode one +J+(1) = (reaction rate);
        # the anion is no-flux.
        f_left = self.fbv_boundary_flux(y, phi, t, "left")
        g_right = self.fbv_boundary_flux(y, phi, t, "right")
        f_p = kernels.advection_rhs(cp, phi, p.z_plus, dx, wint,
                                    float(-f_left), float(g_right))
        f_m = kernels.advection_rhs(cm, phi, p.z_minus, dx, wint, 0.0, 0.0)
        if self.mode == "current":
            return np.concatenate([f_p, f_m, [self.current_ode_rhs(y, phi, t)]])
        return np.concatenate([f_p, f_m])

    def constraint_values(self, y, phi, t):  # pragma: no cover - no constraints
        raise NotImplementedError

    def solve_implicit(self, coef, rhs):
        nx = self.nx
        sub = -self._lsub
        diag = coef - self._ldiag
        sup = -self._lsup
        out = np.empty_like(rhs)
        out[:nx] = kernels.thomas_solve(sub, diag, sup, np.ascontiguousarray(rhs[:nx]))
        out[nx:2 * nx] = kernels.thomas_solve(sub, diag, sup,
                                              np.ascontiguousarray(rhs[nx:2 * nx]))
        if self.mode == "current":
            out[2 * nx] = rhs[2 * nx] / coef
        return out

    # -- diagnostics ----------------------------------------------------------
    def stability_operator(self):
        """Frozen implicit operator: block-diagonal diffusion for the two
        species (the current-mode scalar has no implicit part)."""
        n = self.nx
        a = np.zeros((n, n))
        idx = np.arange(n)
        a[idx, idx] = self._ldiag
        a[idx[1:], idx[:-1]] = self._lsub
        a[idx[:-1], idx[1:]] = self._lsup
        z = np.zeros_like(a)
        return np.block([[a, z], [z, a]])

    def species_mass(self, y, which="minus"):
        """Half-cell-weighted discrete mass of one species."""
        cp, cm, _ = self.split(y)
        c = cm if which == "minus" else cp
        w = np.empty(self.nx)
        w[0] = 0.5 * self.mesh.spacings[0]
        w[-1] = 0.5 * self.mesh.spacings[-1]
        w[1:-1] = self.mesh.interior_widths
        return float(w @ c)


def postprocess_current(states, system):
    """Recover j_ext(t) from a voltage-mode run.

    Uses the cathode charge balance: j_ext = -(eps^2/2) d/dt phi_x(1, t) +
    faradaic term, with the time derivative taken by three-point
    differencing on the (possibly nonuniform) accepted-step time grid.
    Needs at least three states.
    """
    if len(states) < 3:
        raise ValueError("need at least three time levels to differentiate")
    p = system.params
    times = np.array([st.t for st in states])
    phix = np.empty(len(states))
    fara = np.empty(len(states))
    for k, st in enumerate(states):
        phi = st.aux
        phix[k] = boundary_first_derivative(phi, system.mesh, "right")
        _, dphi_c = system.stern_drops(st.y, phi, st.t)
        fara[k] = system.faradaic_cathode(st.y[system.nx - 1], dphi_c)
    dphix = np.empty(len(states))
    for k in range(len(states)):
        j = min(max(k - 1, 0), len(states) - 3)
        w0, w1, w2 = three_point_derivative_coeffs(
            times[j], times[j + 1], times[j + 2], times[k]
        )
        dphix[k] = w0 * phix[j] + w1 * phix[j + 1] + w2 * phix[j + 2]
    return times, -(p.epsilon ** 2 / 2.0) * dphix + fara
