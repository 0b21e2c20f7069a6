"""Variable-step-size semi-implicit BDF2 time stepping with coarse/fine
error control, extrapolation, and the adaptive step-size loop.

Scheme, for du/dt = f(u) + g(u) with f extrapolated and g linear implicit
(w = dt_now / dt_old):

    (1/dt_now) [ (1+2w)/(1+w) u^{n+1} - (1+w) u^n + w^2/(1+w) u^{n-1} ]
        = (1+w) f(u^n) - w f(u^{n-1}) + g(u^{n+1})

One step therefore costs one linear solve.  The first step, and the
one-step drivers, use the w = 0 (implicit-explicit Euler) form.

Error control compares one coarse step against two fine half-steps built
from the stored half-step history:

    err_coarse ~ [8 (dt_old + dt_now) / (7 dt_old + 5 dt_now)] (u_c - u_f)

measured in the plain l2 norm over the evolved unknowns (auxiliary elliptic
fields are excluded).  Accepted steps combine the two candidates,

    u = alpha u_c + beta u_f,
    alpha = -(dt_old + 3 dt_now) / (7 dt_old + 5 dt_now),
    beta  = 8 (dt_old + dt_now) / (7 dt_old + 5 dt_now),

which is one order more accurate (classic Richardson weights -1/3, 4/3 when
dt_now = dt_old).  For the Euler first step the weights are (-1, 2) and the
error coefficient is 2.

Systems plug in through a small duck-typed interface:

    explicit_rhs(y, aux, t) -> f vector (zeros at constraint rows)
    constraint_mask         -> bool mask of algebraic rows, or None
    constraint_values(y, aux, t) -> target data at constraint rows
    solve_implicit(coef, rhs) -> y solving [(coef I - L) | constraint rows]
    elliptic_update(y, t)   -> auxiliary fields for state y (or None)

Constraint rows (boundary conditions imposed as algebraic equations) are
extrapolated with the same (1+w, -w) weights as f, which is what the
"direct" boundary treatment prescribes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUpError

ZERO_STABILITY_RATIO = 1.0 + math.sqrt(2.0)


@dataclass
class AdaptiveConfig:
    """Adaptive-loop parameters.

    The loop accepts a step when the error estimate lies in
    (tol - range, tol + range); ``range`` defaults to tol/3.  Proposals are
    damped into [eta_min, eta_max] per attempt, steps are clamped to
    [dt_min, dt_max], and after i_max oversized-error attempts the step is
    forced to dt_min.  ``p`` is the error order used by the proposal rule
    (3 for the two-step scheme; the Euler bootstrap uses 2).  ``dt_init``
    seeds the very first step (defaults to dt_min).
    """

    tol: float = 1e-6
    range: float | None = None
    dt_min: float = 1e-9
    dt_max: float = 1.0
    eta_min: float = 0.8
    eta_max: float = 1.2
    i_max: int = 10
    p: int = 3
    dt_init: float | None = None

    def __post_init__(self):
        if self.range is None:
            self.range = self.tol / 3.0
        if not 0.0 < self.range < self.tol:
            raise ValueError("need 0 < range < tol")
        if not 0.0 < self.dt_min < self.dt_max:
            raise ValueError("need 0 < dt_min < dt_max")
        if not 0.0 < self.eta_min < 1.0 < self.eta_max:
            raise ValueError("need 0 < eta_min < 1 < eta_max")
        if self.eta_max >= ZERO_STABILITY_RATIO:
            raise ValueError(
                f"eta_max must stay below the zero-stability ratio {ZERO_STABILITY_RATIO:.4f}"
            )
        if self.i_max < 1:
            raise ValueError("need i_max >= 1")
        if self.p not in (2, 3):
            raise ValueError("p must be 2 or 3")
        if self.dt_init is None:
            self.dt_init = self.dt_min
        if not self.dt_min <= self.dt_init <= self.dt_max:
            raise ValueError("dt_init must lie in [dt_min, dt_max]")


@dataclass
class SysState:
    """A solution snapshot: evolved vector y, auxiliary elliptic fields,
    time, plus lazily cached explicit-rhs / constraint-data evaluations."""

    y: np.ndarray
    aux: object
    t: float
    _f: np.ndarray | None = field(default=None, repr=False)
    _h: np.ndarray | None = field(default=None, repr=False)


@dataclass
class StepperHistory:
    """Rolling window needed by the two-step scheme and the estimator:
    the accepted states at t - dt_old and t, and the fine half-step state
    at t - dt_old/2."""

    u_prev: SysState
    u_half: SysState
    u_now: SysState
    dt_old: float

    def __post_init__(self):
        if not self.dt_old > 0.0:
            raise ValueError("dt_old must be positive")


def make_state(system, y, t):
    """Build a state, running the system's elliptic update."""
    y = np.ascontiguousarray(y, dtype=float)
    return SysState(y=y, aux=system.elliptic_update(y, t), t=t)


def _f_of(system, st):
    if st._f is None:
        st._f = system.explicit_rhs(st.y, st.aux, st.t)
    return st._f


def _h_of(system, st):
    if st._h is None:
        st._h = system.constraint_values(st.y, st.aux, st.t)
    return st._h


def _finish_step(system, y, t_new):
    if not np.isfinite(y).all():
        raise BlowUpError(t_new)
    return make_state(system, y, t_new)


def bdf2_pair_step(system, u_prev, u_now, dt_old, dt_now):
    """One two-step update from the (u_prev, u_now) pair."""
    w = dt_now / dt_old
    a0 = (1.0 + 2.0 * w) / (1.0 + w)
    a1 = 1.0 + w
    a2 = w * w / (1.0 + w)
    rhs = (a1 * u_now.y - a2 * u_prev.y) / dt_now
    rhs += a1 * _f_of(system, u_now) - w * _f_of(system, u_prev)
    mask = system.constraint_mask
    if mask is not None:
        hx = a1 * _h_of(system, u_now) - w * _h_of(system, u_prev)
        rhs[mask] = hx[mask]
    y = system.solve_implicit(a0 / dt_now, rhs)
    return _finish_step(system, y, u_now.t + dt_now)


def vssbdf2_step(system, hist, dt_now):
    """Advance the stored history by one (coarse) two-step update."""
    return bdf2_pair_step(system, hist.u_prev, hist.u_now, hist.dt_old, dt_now)


def imex_euler_step(system, u_now, dt):
    """Single-step form (w = 0): backward data implicit, f explicit."""
    rhs = u_now.y / dt + _f_of(system, u_now)
    mask = system.constraint_mask
    if mask is not None:
        h = _h_of(system, u_now)
        rhs[mask] = h[mask]
    y = system.solve_implicit(1.0 / dt, rhs)
    return _finish_step(system, y, u_now.t + dt)


def lte_coefficient(dt_now, dt_old):
    return 8.0 * (dt_old + dt_now) / (7.0 * dt_old + 5.0 * dt_now)


def estimate_lte(u_coarse, u_fine, dt_now, dt_old):
    """Coarse-step error estimate from the coarse/fine pair (l2 norm)."""
    diff = u_coarse - u_fine
    if not np.isfinite(diff).all():
        return math.inf
    return lte_coefficient(dt_now, dt_old) * float(np.linalg.norm(diff))


def estimate_lte_euler(u_coarse, u_fine):
    """First-step (Euler) analogue of :func:`estimate_lte`."""
    diff = u_coarse - u_fine
    if not np.isfinite(diff).all():
        return math.inf
    return 2.0 * float(np.linalg.norm(diff))


def extrapolate(u_coarse, u_fine, dt_now, dt_old):
    """Combine the coarse/fine candidates; the weights always sum to 1."""
    denom = 7.0 * dt_old + 5.0 * dt_now
    alpha = -(dt_old + 3.0 * dt_now) / denom
    beta = 8.0 * (dt_old + dt_now) / denom
    return alpha * u_coarse + beta * u_fine


def extrapolate_euler(u_coarse, u_fine):
    return 2.0 * u_fine - u_coarse


def propose_dt(dt_current, lte, cfg, p=None):
    """Next step-size guess; a zero/underflowing estimate grows by eta_max."""
    if p is None:
        p = cfg.p
    if lte <= 0.0:
        factor = cfg.eta_max
    else:
        factor = min(max((cfg.tol / lte) ** (1.0 / p), cfg.eta_min), cfg.eta_max)
    return dt_current * factor


@dataclass
class StepReport:
    """One accepted step of a driver."""

    index: int
    t: float
    dt: float
    lte: float
    attempts: int
    clamp: str  # "", "dt_max", or "dt_min"
    ut_norm: float


@dataclass
class RunResult:
    reports: list
    blowup_time: float | None
    final_state: SysState | None

    @property
    def blew_up(self):
        return self.blowup_time is not None

    def series(self, name):
        return np.array([getattr(r, name) for r in self.reports])


class _TriplePair:
    __slots__ = ("coarse", "fine_half", "fine")

    def __init__(self, coarse, fine_half, fine):
        self.coarse = coarse
        self.fine_half = fine_half
        self.fine = fine


class AdaptiveDriver:
    """Adaptive time stepping on one system.

    scheme="vssbdf2": Euler bootstrap for the first step, the two-step
    scheme afterwards.  scheme="euler": the single-step scheme throughout
    (forward Euler when the system keeps everything in f).

    Each accepted step stores the fine half-step state so the next fine
    pair can start from it.  Attempt loop, given the error estimate e:

      * accept when |e - tol| < range;
      * a proposal above dt_max is clamped there and accepted regardless
        of e (only the lower error bound is enforced at the cap);
      * after i_max attempts with e > tol + range the step is forced to
        dt_min and accepted without re-checking;
      * otherwise retry with the damped power-law proposal.

    Non-finite candidates count as e = inf (so the loop backs off) and a
    blow-up is only declared if the forced dt_min step is itself
    non-finite.
    """

    def __init__(self, system, state0, cfg, scheme="vssbdf2", euler_lte_coef=1.0):
        if scheme not in ("vssbdf2", "euler"):
            raise ValueError(f"unknown scheme {scheme!r}")
        self.system = system
        self.cfg = cfg
        self.scheme = scheme
        self.euler_lte_coef = euler_lte_coef
        if not isinstance(state0, SysState):
            state0 = make_state(system, state0, 0.0)
        self.state = state0
        self.hist = None
        self.dt_old = None
        self.step_index = 0
        self.reports = []

    @property
    def t(self):
        return self.state.t

    def _euler_triple(self, base, dt):
        coarse = imex_euler_step(self.system, base, dt)
        fine_half = imex_euler_step(self.system, base, 0.5 * dt)
        fine = imex_euler_step(self.system, fine_half, 0.5 * dt)
        return _TriplePair(coarse, fine_half, fine)

    def _bdf2_triple(self, dt):
        h = self.hist
        coarse = bdf2_pair_step(self.system, h.u_prev, h.u_now, h.dt_old, dt)
        fine_half = bdf2_pair_step(
            self.system, h.u_half, h.u_now, 0.5 * h.dt_old, 0.5 * dt
        )
        fine = bdf2_pair_step(self.system, h.u_now, fine_half, 0.5 * dt, 0.5 * dt)
        return _TriplePair(coarse, fine_half, fine)

    def _attempt(self, dt):
        one_step = self.scheme == "euler" or self.hist is None
        try:
            if one_step:
                trip = self._euler_triple(self.state, dt)
                if self.hist is None and self.scheme == "vssbdf2":
                    lte = estimate_lte_euler(trip.coarse.y, trip.fine.y)
                else:
                    lte = self.euler_lte_coef * float(
                        np.linalg.norm(trip.coarse.y - trip.fine.y)
                    )
                    if not math.isfinite(lte):
                        lte = math.inf
            else:
                trip = self._bdf2_triple(dt)
                lte = estimate_lte(trip.coarse.y, trip.fine.y, dt, self.hist.dt_old)
        except BlowUpError:
            return None, math.inf
        return trip, lte

    def _accept(self, trip, dt, lte, attempts, clamp):
        one_step = self.scheme == "euler" or self.hist is None
        if one_step:
            y_new = extrapolate_euler(trip.coarse.y, trip.fine.y)
        else:
            y_new = extrapolate(trip.coarse.y, trip.fine.y, dt, self.hist.dt_old)
        if not np.isfinite(y_new).all():
            raise BlowUpError(self.state.t + dt)
        prev = self.state
        new = make_state(self.system, y_new, prev.t + dt)
        if self.scheme == "vssbdf2":
            self.hist = StepperHistory(
                u_prev=prev, u_half=trip.fine_half, u_now=new, dt_old=dt
            )
        self.state = new
        self.dt_old = dt
        self.step_index += 1
        report = StepReport(
            index=self.step_index,
            t=new.t,
            dt=dt,
            lte=lte,
            attempts=attempts,
            clamp=clamp,
            ut_norm=float(np.linalg.norm(new.y - prev.y)) / dt,
        )
        self.reports.append(report)
        return report

    def advance(self):
        """Run the attempt loop once; returns the accepted StepReport."""
        cfg = self.cfg
        one_step_p = 2
        dt = self.dt_old if self.dt_old is not None else cfg.dt_init
        attempts = 0
        while True:
            attempts += 1
            clamp = ""
            if dt > cfg.dt_max:
                dt = cfg.dt_max
                clamp = "dt_max"
            trip, lte = self._attempt(dt)
            if clamp == "dt_max":
                if trip is None:
                    raise BlowUpError(self.state.t + dt)
                return self._accept(trip, dt, lte, attempts, clamp)
            if abs(lte - cfg.tol) < cfg.range:
                return self._accept(trip, dt, lte, attempts, clamp)
            if attempts >= cfg.i_max and lte > cfg.tol + cfg.range:
                dt = cfg.dt_min
                trip, lte = self._attempt(dt)
                if trip is None:
                    raise BlowUpError(self.state.t + dt)
                return self._accept(trip, dt, lte, attempts + 1, "dt_min")
            p = one_step_p if (self.scheme == "euler" or self.hist is None) else cfg.p
            dt = propose_dt(dt, lte, cfg, p=p)

    def run(self, t_end, max_steps=50_000_000, on_step=None):
        """Advance until t >= t_end; a blow-up ends the run and is recorded."""
        blowup = None
        try:
            while self.state.t < t_end and self.step_index < max_steps:
                report = self.advance()
                if on_step is not None:
                    on_step(report)
        except BlowUpError as exc:
            blowup = exc.time
        return RunResult(self.reports, blowup, self.state)


class ConstantDriver:
    """Constant (or scheduled) step sizes with the same spatial machinery.

    ``dt`` may be a float or a callable dt(t) for piecewise schedules.  By
    default the run advances with the raw two-step solution and skips the
    fine sequence entirely; ``measure_lte=True`` maintains the half-step
    history and records the coarse/fine error estimate each step, and
    ``advance="extrapolated"`` advances with the combined value instead
    (one order more accurate).
    """

    def __init__(self, system, state0, dt, measure_lte=False, advance="coarse"):
        if advance not in ("coarse", "extrapolated"):
            raise ValueError(f"unknown advance mode {advance!r}")
        self.system = system
        if not isinstance(state0, SysState):
            state0 = make_state(system, state0, 0.0)
        self.state = state0
        if callable(dt):
            self.dt_of = dt
            self._dt_scalar = None
        else:
            self._dt_scalar = float(dt)
            self.dt_of = lambda t, _dt=self._dt_scalar: _dt
        self._t0 = state0.t
        self.measure_lte = measure_lte
        self.advance_mode = advance
        self.need_fine = measure_lte or advance == "extrapolated"
        self.hist = None
        self.step_index = 0
        self.reports = []

    def _advance_once(self):
        sys_ = self.system
        dt = self.dt_of(self.state.t)
        prev = self.state
        if self.hist is None:
            coarse = imex_euler_step(sys_, prev, dt)
            if self.need_fine:
                fine_half = imex_euler_step(sys_, prev, 0.5 * dt)
                fine = imex_euler_step(sys_, fine_half, 0.5 * dt)
                lte = estimate_lte_euler(coarse.y, fine.y)
            else:
                fine_half = fine = None
                lte = math.nan
            if self.advance_mode == "extrapolated":
                new = make_state(sys_, extrapolate_euler(coarse.y, fine.y), prev.t + dt)
            else:
                new = coarse
        else:
            h = self.hist
            coarse = bdf2_pair_step(sys_, h.u_prev, h.u_now, h.dt_old, dt)
            if self.need_fine:
                fine_half = bdf2_pair_step(sys_, h.u_half, h.u_now, 0.5 * h.dt_old, 0.5 * dt)
                fine = bdf2_pair_step(sys_, h.u_now, fine_half, 0.5 * dt, 0.5 * dt)
                lte = estimate_lte(coarse.y, fine.y, dt, h.dt_old)
            else:
                fine_half = fine = None
                lte = math.nan
            if self.advance_mode == "extrapolated":
                y = extrapolate(coarse.y, fine.y, dt, h.dt_old)
                if not np.isfinite(y).all():
                    raise BlowUpError(prev.t + dt)
                new = make_state(sys_, y, prev.t + dt)
            else:
                new = coarse
        if self._dt_scalar is not None:
            # k*dt instead of accumulation keeps the dt-ladder runs of a
            # convergence study landing on bit-identical final times.
            new.t = self._t0 + (self.step_index + 1) * self._dt_scalar
        if self.need_fine:
            self.hist = StepperHistory(u_prev=prev, u_half=fine_half, u_now=new, dt_old=dt)
        else:
            self.hist = StepperHistory(u_prev=prev, u_half=new, u_now=new, dt_old=dt)
        self.state = new
        self.step_index += 1
        self.reports.append(
            StepReport(
                index=self.step_index,
                t=new.t,
                dt=dt,
                lte=lte,
                attempts=1,
                clamp="",
                ut_norm=float(np.linalg.norm(new.y - prev.y)) / dt,
            )
        )

    def run(self, t_end=None, n_steps=None, on_step=None):
        """Run a fixed number of steps, or until t passes t_end."""
        if (t_end is None) == (n_steps is None):
            raise ValueError("give exactly one of t_end, n_steps")
        blowup = None
        try:
            if n_steps is not None:
                for _ in range(n_steps):
                    self._advance_once()
                    if on_step is not None:
                        on_step(self.reports[-1])
            else:
                while self.state.t < t_end - 1e-12:
                    self._advance_once()
                    if on_step is not None:
                        on_step(self.reports[-1])
        except BlowUpError as exc:
            blowup = exc.time
        return RunResult(self.reports, blowup, self.state)
