"""Time integration of the shell system with event detection.

Two adaptive schemes are available. ``"lawson"`` treats the diagonal
dissipation exactly through an integrating factor and advances the
nonlinearity with the Bogacki-Shampine 3(2) pair. ``"radau"`` delegates to
SciPy's implicit Radau IIA solver with the analytic Jacobian; it is the robust
choice once inviscid energy piles up in the last shell and the flow turns
nonlinearly stiff. Steps are clipped so that every diagnostic time is hit
exactly, so samples are genuine solver states rather than interpolants.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import Radau

from .errors import NonFiniteError, ParameterError, ShapeError
from .functionals import LyapunovCoeffs, energy, sobolev_norm
from .shell_model import ModelSpec, ShellState, jacobian, linear_rates, nonlinear_rhs, rhs_vector

METHODS = ("lawson", "radau")


class EventKind(str, enum.Enum):
    COMPLETED = "Completed"
    NORM_CAP = "NormCap"
    STEP_UNDERFLOW = "StepUnderflow"
    NON_FINITE = "NonFinite"
    POSITIVITY_LOSS = "PositivityLoss"


@dataclass(frozen=True)
class Event:
    t: float
    kind: EventKind
    payload: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"t": self.t, "kind": self.kind.value, **self.payload}


@dataclass(frozen=True)
class StepControls:
    """Tolerances, step bounds and stopping rules for :func:`integrate_adaptive`.

    ``norm_cap`` applies to ``||a||_s + ||b||_s`` with ``s = norm_cap_s``.
    """

    t_end: float = 1.0
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    dt_init: float = 1e-8
    dt_min: float = 1e-20
    dt_max: float = 1e-2
    norm_cap: float = 1e8
    norm_cap_s: float = 1.0
    diag_interval: float = 1e-2
    seed: int = 0
    method: str = "radau"
    halt_on_positivity_loss: bool = False
    max_steps: int = 5_000_000

    def __post_init__(self):
        positive = ("t_end", "rel_tol", "dt_init", "dt_min", "dt_max", "norm_cap", "diag_interval")
        for name in positive:
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ParameterError(f"{name} must be a positive finite number, got {v!r}")
        if not (isinstance(self.abs_tol, (int, float)) and math.isfinite(self.abs_tol) and self.abs_tol > 0):
            raise ParameterError(f"abs_tol must be a positive finite number, got {self.abs_tol!r}")
        if self.rel_tol >= 1:
            raise ParameterError("rel_tol must be < 1")
        if not (self.dt_min <= self.dt_init <= self.dt_max):
            raise ParameterError("need dt_min <= dt_init <= dt_max")
        if not math.isfinite(self.norm_cap_s):
            raise ParameterError("norm_cap_s must be finite")
        if self.method not in METHODS:
            raise ParameterError(f"method must be one of {METHODS}, got {self.method!r}")
        if int(self.max_steps) < 1:
            raise ParameterError("max_steps must be >= 1")


@dataclass(frozen=True)
class Trajectory:
    """Samples at diagnostic times plus the event log.

    The last event is the unique terminal event and the last sample is the
    state at which it fired.
    """

    model: ModelSpec
    samples: tuple
    events: tuple
    stats: dict = field(default_factory=dict)
    dissipated: tuple = ()

    @property
    def terminal(self) -> Event:
        return self.events[-1]

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    @property
    def final(self) -> ShellState:
        return self.samples[-1]


TERMINAL = {EventKind.COMPLETED, EventKind.NORM_CAP, EventKind.STEP_UNDERFLOW, EventKind.NON_FINITE}


def _first_nonfinite(y: np.ndarray) -> int:
    bad = np.flatnonzero(~np.isfinite(y))
    return int(bad[0]) if bad.size else -1


def step_rk4(model: ModelSpec, state: ShellState, dt: float) -> ShellState:
    """One classical fourth-order Runge-Kutta step (fixed step, no error control)."""
    if not (dt > 0 and math.isfinite(dt)):
        raise ParameterError(f"dt must be positive and finite, got {dt!r}")
    y = state.vector()
    with np.errstate(over="ignore", invalid="ignore"):
        k1 = rhs_vector(model, y)
        k2 = rhs_vector(model, y + 0.5 * dt * k1)
        k3 = rhs_vector(model, y + 0.5 * dt * k2)
        k4 = rhs_vector(model, y + dt * k3)
        y_new = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    idx = _first_nonfinite(y_new)
    if idx >= 0:
        raise NonFiniteError(f"non-finite component at index {idx} after RK4 step", index=idx)
    return ShellState.from_vector(state.t + dt, y_new)


def integrate_rk4(model: ModelSpec, state0: ShellState, dt: float, t_end: float,
                  sample_every: int = 1) -> list:
    """Fixed-step RK4 reference trajectory; returns the sampled states."""
    n_steps = int(round((t_end - state0.t) / dt))
    out = [state0]
    s = state0
    for k in range(1, n_steps + 1):
        s = step_rk4(model, s, dt)
        s = ShellState(state0.t + k * dt, s.a, s.b)
        if k % sample_every == 0 or k == n_steps:
            out.append(s)
    return out


class _Monitor:
    """Per-step event checks shared by both schemes."""

    def __init__(self, model: ModelSpec, controls: StepControls):
        self.model = model
        self.c = controls
        self.lam = model.wavenumber_base
        self.n = model.n_shells
        self.positivity_seen = False

    def norms(self, y):
        a, b = y[: self.n], y[self.n:]
        s = self.c.norm_cap_s
        capped = sobolev_norm(a, s, self.lam) + sobolev_norm(b, s, self.lam)
        l2 = sobolev_norm(a, 0.0, self.lam) + sobolev_norm(b, 0.0, self.lam)
        return capped, l2

    def check(self, t, y, dt, events) -> Optional[Event]:
        idx = _first_nonfinite(y)
        if idx >= 0:
            return Event(t, EventKind.NON_FINITE, {"index": idx, "dt": dt})
        capped, l2 = self.norms(y)
        if not capped < self.c.norm_cap:
            return Event(t, EventKind.NORM_CAP, {"norm": capped, "norm_s": self.c.norm_cap_s,
                                                 "norm_l2": l2, "dt": dt})
        if not self.positivity_seen:
            from .analysis import first_negative
            hit = first_negative(ShellState.from_vector(t, y))
            if hit is not None:
                self.positivity_seen = True
                ev = Event(t, EventKind.POSITIVITY_LOSS,
                           {"shell": hit.shell, "component": hit.component, "value": hit.value})
                if self.c.halt_on_positivity_loss:
                    return ev
                events.append(ev)
        return None


def _sample_times(t0, controls):
    # Sample times are t0 + k*interval; a sliver shorter than 1e-9 intervals before t_end is merged.
    k = 1
    while True:
        t = t0 + k * controls.diag_interval
        if controls.t_end - t <= 1e-9 * controls.diag_interval:
            yield controls.t_end
            return
        yield t
        k += 1


def integrate_adaptive(model: ModelSpec, state0: ShellState, controls: StepControls) -> Trajectory:
    """Integrate from ``state0.t`` to ``controls.t_end`` or until a stopping event.

    Samples are recorded at ``t0 + k * diag_interval`` and at termination.
    Exactly one terminal event (Completed, NormCap, StepUnderflow or
    NonFinite) ends the event list; PositivityLoss is logged once when first
    seen and is terminal only when ``halt_on_positivity_loss`` is set.

    The dissipated energy ``W(t) = int 2(nu||a||_1^2 + mu||b||_1^2) dt`` is
    integrated as an extra solver component and returned per sample in
    ``Trajectory.dissipated``.
    """
    if state0.n != model.n_shells:
        raise ShapeError(f"state has {state0.n} shells, model has {model.n_shells}")
    if controls.t_end <= state0.t:
        raise ParameterError("t_end must lie after the initial time")
    y0 = state0.vector()
    if _first_nonfinite(y0) >= 0:
        raise NonFiniteError("initial state is not finite", index=_first_nonfinite(y0))
    run = _Run(model, state0, controls)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if controls.method == "lawson":
            run.lawson()
        else:
            run.radau()
    return Trajectory(model, tuple(run.samples), tuple(run.events), run.stats, tuple(run.dissipated))


class _Run:
    """Mutable state of one integration: the augmented vector ``z = [a, b, W]``."""

    def __init__(self, model, state0, controls):
        self.model = model
        self.c = controls
        self.n2 = 2 * model.n_shells
        self.lin = linear_rates(model)
        self.mon = _Monitor(model, controls)
        self.t = state0.t
        self.z = np.concatenate([state0.vector(), [0.0]])
        self.samples = [state0]
        self.dissipated = [0.0]
        self.events = []
        self.stats = {"accepted": 0, "rejected": 0, "dt_min_taken": math.inf,
                      "max_error_ratio": 0.0, "method": controls.method}
        self.h = controls.dt_init
        self.steps = 0

    def sink(self, y):
        return -2.0 * math.fsum(self.lin * y * y)

    def nonlinear(self, z):
        y = z[: self.n2]
        return np.concatenate([nonlinear_rhs(self.model, y), [self.sink(y)]])

    def full_rhs(self, t, z):
        y = z[: self.n2]
        return np.concatenate([rhs_vector(self.model, y), [self.sink(y)]])

    def full_jac(self, t, z):
        y = z[: self.n2]
        m = self.n2
        J = np.zeros((m + 1, m + 1))
        J[:m, :m] = jacobian(self.model, y)
        J[m, :m] = -4.0 * self.lin * y
        return J

    def sample(self):
        self.samples.append(ShellState.from_vector(self.t, self.z[: self.n2]))
        self.dissipated.append(float(self.z[-1]))

    def stop(self, event):
        if self.samples[-1].t != self.t:
            self.sample()
        self.events.append(event)

    def over_budget(self):
        self.steps += 1
        if self.steps > self.c.max_steps:
            self.stop(Event(self.t, EventKind.STEP_UNDERFLOW, {"dt": self.h, "reason": "step budget exhausted"}))
            return True
        return False

    def accept(self, t, z, dt) -> bool:
        """Record an accepted step; returns True when a terminal event fired."""
        self.t, self.z = t, z
        self.stats["accepted"] += 1
        self.stats["dt_min_taken"] = min(self.stats["dt_min_taken"], dt)
        ev = self.mon.check(t, z[: self.n2], dt, self.events)
        if ev is not None:
            self.stop(ev)
            return True
        return False

    def lawson(self):
        c = self.c
        lin = np.concatenate([self.lin, [0.0]])
        f = self.nonlinear
        k1 = f(self.z)
        for t_next in _sample_times(self.t, c):
            while self.t < t_next:
                if self.over_budget():
                    return
                h = self.h
                remaining = t_next - self.t
                clipped = h >= remaining
                dt = remaining if clipped else h
                if not clipped and remaining < h + c.dt_min:
                    dt = 0.5 * remaining  # avoid leaving a sliver below dt_min
                z = self.z
                e1, e2, e4 = np.exp(lin * dt), np.exp(lin * (0.5 * dt)), np.exp(lin * (0.25 * dt))
                k2 = f(e2 * (z + 0.5 * dt * k1))
                k3 = f(np.exp(lin * (0.75 * dt)) * z + 0.75 * dt * e4 * k2)
                z_new = e1 * z + dt * (2.0 / 9.0 * e1 * k1 + 1.0 / 3.0 * e2 * k2 + 4.0 / 9.0 * e4 * k3)
                k4 = f(z_new)
                err = dt * ((2.0 / 9.0 - 7.0 / 24.0) * e1 * k1 + (1.0 / 3.0 - 0.25) * e2 * k2
                            + (4.0 / 9.0 - 1.0 / 3.0) * e4 * k3 - 0.125 * k4)
                scale = max(c.rel_tol * max(np.max(np.abs(z)), np.max(np.abs(z_new))), c.abs_tol)
                errn = float(np.max(np.abs(err))) / scale
                if not (math.isfinite(errn) and np.all(np.isfinite(z_new))):
                    errn = math.inf
                if errn <= 1.0:
                    self.stats["max_error_ratio"] = max(self.stats["max_error_ratio"], errn)
                    if self.accept(t_next if clipped else self.t + dt, z_new, dt):
                        return
                    k1 = k4
                    if not clipped:
                        fac = 5.0 if errn == 0 else min(5.0, max(0.2, 0.9 * errn ** (-1.0 / 3.0)))
                        self.h = min(c.dt_max, dt * fac)
                    continue
                self.stats["rejected"] += 1
                fac = 0.2 if not math.isfinite(errn) else min(1.0, max(0.2, 0.9 * errn ** (-1.0 / 3.0)))
                self.h = dt * fac
                if self.h < c.dt_min:
                    bad = _first_nonfinite(z_new[: self.n2])
                    if bad >= 0:
                        self.stop(Event(self.t, EventKind.NON_FINITE, {"index": bad, "dt": dt}))
                    else:
                        self.stop(Event(self.t, EventKind.STEP_UNDERFLOW, {"dt": self.h, "error_ratio": errn}))
                    return
            self.sample()
        self.events.append(Event(self.t, EventKind.COMPLETED, {}))

    def radau(self):
        c = self.c
        for t_next in _sample_times(self.t, c):
            solver = Radau(self.full_rhs, self.t, self.z, t_next, rtol=c.rel_tol, atol=c.abs_tol,
                           jac=self.full_jac, first_step=min(self.h, t_next - self.t), max_step=c.dt_max)
            while solver.status == "running":
                if self.over_budget():
                    return
                message = solver.step()
                if solver.status == "failed":
                    self.stop(Event(self.t, EventKind.STEP_UNDERFLOW, {"dt": solver.h_abs, "reason": message}))
                    return
                if self.accept(solver.t, solver.y.copy(), solver.t - self.t):
                    return
                if solver.status == "running":
                    self.h = solver.h_abs
                    if self.h < c.dt_min or solver.step_size < c.dt_min:
                        self.stop(Event(self.t, EventKind.STEP_UNDERFLOW, {"dt": self.h}))
                        return
            self.t = t_next
            self.sample()
        self.events.append(Event(self.t, EventKind.COMPLETED, {}))


class Outcome(str, enum.Enum):
    DECAY = "Decay"
    BOUNDED = "Bounded"
    GROWTH_CONSISTENT = "GrowthRiccatiConsistent"
    GROWTH_VIOLATED = "GrowthRiccatiViolated"
    INCONCLUSIVE = "Inconclusive"


def classify_outcome(trajectory: Trajectory, coeffs: Optional[LyapunovCoeffs] = None,
                     lam: Optional[float] = None, min_fraction: float = 0.9,
                     front_margin: int = 3) -> Outcome:
    """Label a run by its energy history and, for growth, the Riccati monitor.

    Growth (NormCap or StepUnderflow) is Riccati-consistent when at least
    ``min_fraction`` of the monitor samples with spectral front at or below
    ``N - front_margin`` satisfy ``dL/dt >= K L^{3/2}``.
    """
    e0 = energy(trajectory.samples[0])
    ef = energy(trajectory.final)
    kind = trajectory.terminal.kind
    if kind in (EventKind.NORM_CAP, EventKind.STEP_UNDERFLOW):
        if coeffs is None:
            raise ParameterError("growth classification needs Lyapunov coefficients")
        from .analysis import riccati_monitor
        if len(trajectory.samples) < 3:
            return Outcome.INCONCLUSIVE
        report = riccati_monitor(trajectory, coeffs, lam)
        gated = report.gated(front_margin)
        if not gated:
            return Outcome.INCONCLUSIVE
        frac = sum(s.satisfied for s in gated) / len(gated)
        return Outcome.GROWTH_CONSISTENT if frac >= min_fraction else Outcome.GROWTH_VIOLATED
    if ef < 1e-3 * e0:
        return Outcome.DECAY
    if kind is EventKind.COMPLETED and e0 > 0 and 1e-3 <= ef / e0 <= 1e3:
        return Outcome.BOUNDED
    return Outcome.INCONCLUSIVE
