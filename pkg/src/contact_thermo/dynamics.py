"""
Integration of contact Hamiltonian flows and base characteristics,
trajectory monitors, closed-form process oracles and the contact
Hamilton-Jacobi residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .geometry import (
    ContactHamiltonian,
    EvaluationError,
    PhasePoint,
    contact_vector_field_flat,
    finite_difference_gradient,
)
from .submanifold import on_submanifold_residual
from .thermo import (
    GasState,
    IdealGasParams,
    InteractionParams,
    energy_fundamental,
    energy_generator,
    entropy_generator,
    euler_residual,
    gas_law_residuals,
    interacting_state,
    interaction_hamiltonian,
    isochoric_entropy_hamiltonian,
    isochoric_hamiltonian,
    isothermal_hamiltonian,
    state_from_energy_point,
    state_from_entropy_point,
)

METHODS = ("rk4-fixed", "rk45-adaptive")


class IntegrationError(RuntimeError):
    """Integration stopped; ``trajectory`` holds every state up to the last good one."""

    def __init__(self, message: str, trajectory: "Trajectory" = None):
        super().__init__(message)
        self.trajectory = trajectory


class DomainExitError(IntegrationError):
    pass


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk4-fixed"
    dt: float = 1e-3
    t_end: float = 1.0
    rtol: float = 1e-9
    atol: float = 1e-12

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown integrator method {self.method!r}; expected one of {METHODS}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not math.isfinite(self.t_end) or self.t_end < 0:
            raise ValueError(f"t_end must be finite and nonnegative, got {self.t_end}")
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("rtol and atol must be positive")


@dataclass(frozen=True)
class Monitor:
    name: str
    fn: Callable


@dataclass
class Trajectory:
    """
    Time samples of a flow.

    ``states`` has one row per sample: flat phase vectors ``[s, q, p]`` when
    ``kind == "phase"``, base coordinates ``q`` when ``kind == "base"``.
    """
    times: np.ndarray
    states: np.ndarray
    monitors: Dict[str, np.ndarray] = field(default_factory=dict)
    kind: str = "phase"

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.atleast_2d(np.asarray(self.states, dtype=float))
        if len(self.times) != len(self.states):
            raise ValueError("times and states differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        for name, series in self.monitors.items():
            if len(series) != len(self.times):
                raise ValueError(f"monitor {name!r} has wrong length")

    def __len__(self):
        return len(self.times)

    @property
    def n(self) -> int:
        d = self.states.shape[1]
        return (d - 1) // 2 if self.kind == "phase" else d

    def point(self, i: int):
        z = self.states[i]
        return PhasePoint.from_vector(z) if self.kind == "phase" else z.copy()

    @property
    def points(self) -> list:
        return [self.point(i) for i in range(len(self))]

    @property
    def final(self):
        return self.point(-1)


# -- integrators -----------------------------------------------------------------

def _rk4_step(f, t, z, dt):
    k1 = f(t, z)
    k2 = f(t + 0.5 * dt, z + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, z + 0.5 * dt * k2)
    k4 = f(t + dt, z + dt * k3)
    return z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def positive_components(indices: Sequence[int], offset: int = 1,
                        labels: Optional[Sequence[str]] = None):
    """Domain predicate: flat components ``offset + i`` must stay positive."""
    labels = labels or [f"q{i + 1}" for i in indices]

    def check(z):
        for i, lab in zip(indices, labels):
            if not z[offset + i] > 0:
                return f"{lab} = {z[offset + i]} left the domain"
        return None
    return check


def _finish(times, states, monitors, kind, point_of):
    traj = Trajectory(np.array(times), np.array(states), {}, kind)
    if monitors:
        pts = [point_of(z) for z in traj.states]
        traj.monitors = {m.name: np.array([m.fn(x) for x in pts], dtype=float)
                         for m in monitors}
    return traj


def _integrate(rhs, z0, cfg: IntegratorConfig, kind, monitors, domain, point_of):
    z0 = np.asarray(z0, dtype=float)
    times, states = [0.0], [z0.copy()]

    def fail(exc_type, msg):
        raise exc_type(msg, _finish(times, states, monitors, kind, point_of))

    if domain is not None and (msg := domain(z0)):
        fail(DomainExitError, f"initial state outside domain: {msg}")
    if cfg.t_end == 0.0:
        return _finish(times, states, monitors, kind, point_of)

    if cfg.method == "rk4-fixed":
        nsteps = max(1, math.ceil(cfg.t_end / cfg.dt - 1e-9))
        z = z0
        for k in range(nsteps):
            t0 = k * cfg.dt
            t1 = cfg.t_end if k == nsteps - 1 else (k + 1) * cfg.dt
            try:
                z = _rk4_step(rhs, t0, z, t1 - t0)
            except (ArithmeticError, ValueError, EvaluationError) as exc:
                fail(IntegrationError, f"step failed at t={t0}: {exc}")
            if not np.all(np.isfinite(z)):
                fail(IntegrationError, f"non-finite state at t={t1}")
            if domain is not None and (msg := domain(z)):
                fail(DomainExitError, f"t={t1}: {msg}")
            times.append(t1)
            states.append(z)
    else:
        try:
            sol = solve_ivp(rhs, (0.0, cfg.t_end), z0, method="RK45",
                            rtol=cfg.rtol, atol=cfg.atol)
        except (ArithmeticError, ValueError, EvaluationError) as exc:
            fail(IntegrationError, f"adaptive integration failed: {exc}")
        for t, z in zip(sol.t[1:], sol.y.T[1:]):
            if not np.all(np.isfinite(z)):
                fail(IntegrationError, f"non-finite state at t={t}")
            if domain is not None and (msg := domain(z)):
                fail(DomainExitError, f"t={t}: {msg}")
            times.append(float(t))
            states.append(z)
        if not sol.success:
            fail(IntegrationError, f"adaptive integration failed: {sol.message}")
    return _finish(times, states, monitors, kind, point_of)


def integrate_contact_flow(h: ContactHamiltonian, x0: PhasePoint,
                           cfg: IntegratorConfig = IntegratorConfig(),
                           monitors: Iterable[Monitor] = (),
                           domain: Optional[Callable] = None) -> Trajectory:
    """
    Integrate ``x' = X_h(x)`` from ``x0`` over ``[0, cfg.t_end]``.

    Monitors are evaluated on every accepted state. ``domain`` is an
    optional predicate on flat vectors returning a message when the state
    is outside the physical domain.
    """
    field_ = contact_vector_field_flat(h, x0.n)
    return _integrate(lambda t, z: field_(z), x0.as_vector(), cfg, "phase",
                      list(monitors), domain, PhasePoint.from_vector)


def integrate_characteristics(field_: Callable[[np.ndarray, float], np.ndarray], q0,
                              cfg: IntegratorConfig = IntegratorConfig(),
                              monitors: Iterable[Monitor] = (),
                              domain: Optional[Callable] = None) -> Trajectory:
    """Integrate the base-space system ``q' = field(q, t)``."""
    return _integrate(lambda t, q: np.asarray(field_(q, t), dtype=float), q0, cfg, "base",
                      list(monitors), domain, lambda z: z)


def isochoric_characteristics(q, t=0.0):
    S, V, N = q
    return np.array([S, 0.0, N])


def isothermal_characteristics(q, t=0.0):
    S, V, N = q
    return np.array([S - N, 0.0, N])


# -- monitors --------------------------------------------------------------------

def gas_monitors(h: ContactHamiltonian, chart: str = "energy",
                 params: IdealGasParams = IdealGasParams()) -> list:
    """The standard ideal-gas monitor set: h, euler, gaslaw_pv, gaslaw_eq, onL."""
    if chart == "energy":
        to_state, gen = state_from_energy_point, energy_generator(params)
    elif chart == "entropy":
        to_state, gen = state_from_entropy_point, entropy_generator(params)
    else:
        raise ValueError(f"unknown chart {chart!r}")
    return [
        Monitor("h", h),
        Monitor("euler", lambda x: euler_residual(to_state(x))),
        Monitor("gaslaw_pv", lambda x: gas_law_residuals(to_state(x), params)[0]),
        Monitor("gaslaw_eq", lambda x: gas_law_residuals(to_state(x), params)[1]),
        Monitor("onL", lambda x: on_submanifold_residual(gen, x)),
    ]


def monitor_report(traj: Trajectory) -> Dict[str, Dict[str, float]]:
    """Per-monitor max |value|, final value and drift (final - initial)."""
    out = {}
    for name, series in traj.monitors.items():
        out[name] = {"max": float(np.max(np.abs(series))),
                     "final": float(series[-1]),
                     "drift": float(series[-1] - series[0])}
    return out


# -- Hamilton-Jacobi -------------------------------------------------------------

class PrincipalFunction:
    """``W(q, t)`` with optional closed-form partials ``grad_q(q, t)`` and ``dt(q, t)``."""

    def __init__(self, W: Callable[[np.ndarray, float], float],
                 grad_q: Optional[Callable] = None, dt: Optional[Callable] = None,
                 name: str = "W", fd_rel_step: float = 1e-5):
        self.W = W
        self._grad_q = grad_q
        self._dt = dt
        self.name = name
        self.fd_rel_step = fd_rel_step

    def __call__(self, q, t) -> float:
        return float(self.W(np.asarray(q, dtype=float), t))

    def grad_q(self, q, t) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if self._grad_q is not None:
            return np.asarray(self._grad_q(q, t), dtype=float)
        return finite_difference_gradient(lambda v: self.W(v, t), q, self.fd_rel_step)

    def dt(self, q, t) -> float:
        q = np.asarray(q, dtype=float)
        if self._dt is not None:
            return float(self._dt(q, t))
        return float(finite_difference_gradient(lambda v: self.W(q, v[0]), [t],
                                                self.fd_rel_step)[0])


def hj_residuals(W: PrincipalFunction, h: ContactHamiltonian, grid: Iterable) -> np.ndarray:
    """Signed ``dW/dt + h(s=W, q, p=grad_q W)`` at each ``(q, t)``."""
    out = []
    for q, t in grid:
        x = PhasePoint(W(q, t), q, W.grad_q(q, t))
        out.append(W.dt(q, t) + h(x))
    return np.array(out)


def hj_residual(W: PrincipalFunction, h: ContactHamiltonian, grid: Iterable) -> float:
    r = hj_residuals(W, h, list(grid))
    return float(np.max(np.abs(r))) if r.size else 0.0


# -- closed-form processes -------------------------------------------------------

@dataclass(frozen=True)
class AnalyticProcess:
    id: str
    closed_form: Callable[[GasState, float], GasState]
    hamiltonian: ContactHamiltonian
    chart: str = "energy"
    conserves_equilibrium: bool = True
    description: str = ""


def _isochoric(params):
    g = params.gamma

    def closed_form(x0: GasState, t: float) -> GasState:
        e = math.exp(t)
        w = math.exp((g - 1.0) * t)
        return GasState(U=x0.U * math.exp(g * t), S=x0.S * e, V=x0.V, N=x0.N * e,
                        T=x0.T * w, P=x0.P * math.exp(g * t), mu=x0.mu * w)
    return closed_form


def _isothermal(x0: GasState, t: float) -> GasState:
    e = math.exp(t)
    return GasState(U=x0.U * e, S=(x0.S - x0.N * t) * e, V=x0.V, N=x0.N * e,
                    T=x0.T, P=x0.P * e, mu=x0.mu + x0.T * t)


def analytic_processes(params: IdealGasParams = IdealGasParams(),
                       a: float = 0.1) -> Dict[str, AnalyticProcess]:
    iso = _isochoric(params)
    procs = [
        AnalyticProcess("isochoric-energy", iso, isochoric_hamiltonian(params), "energy",
                        description="isochoric process, energy representation"),
        AnalyticProcess("isochoric-entropy", iso, isochoric_entropy_hamiltonian(params), "entropy",
                        description="isochoric process, entropy representation"),
        AnalyticProcess("isochoric-isothermal", _isothermal, isothermal_hamiltonian(), "energy",
                        description="isochoric-isothermal process, energy representation"),
        AnalyticProcess("ideal-to-interacting",
                        lambda x0, t: interacting_state(x0, InteractionParams(a, t)),
                        interaction_hamiltonian(a), "energy", conserves_equilibrium=False,
                        description=f"ideal gas deformed by h = a/V (a={a})"),
    ]
    return {p.id: p for p in procs}


def equilibrium_defect(x0: GasState, params: IdealGasParams = IdealGasParams()) -> float:
    """Largest relative deviation of x0 from the ideal-gas state at its (S, V, N)."""
    ref = energy_fundamental(x0.S, x0.V, x0.N, params)
    return max(abs(getattr(x0, k) - getattr(ref, k)) / max(1.0, abs(getattr(ref, k)))
               for k in ("U", "T", "P", "mu"))


def analytic_oracle(proc: AnalyticProcess, x0: GasState, t: float,
                    params: IdealGasParams = IdealGasParams(), tol: float = 1e-8) -> GasState:
    defect = equilibrium_defect(x0, params)
    if defect > tol:
        raise PreconditionError(f"initial state is off the ideal-gas submanifold (defect {defect:.3e})")
    return proc.closed_form(x0, t)
