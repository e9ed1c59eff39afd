"""Explicit Runge-Kutta time integration of a semidiscretization.

Two methods: Shu-Osher SSPRK(3,3) (default) and classical RK4.  The step
size is either fixed or recomputed every step from a CFL factor; the last
step is shortened so that the run lands exactly on ``t_end``.
"""

from __future__ import annotations

import math
import types
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from numba import njit

from .dgsem import (
    _VOLUME,
    Semidiscretization,
    _kernel,
    _rhs_serial,
    cfl_timestep,
    check_field,
    entropy_rate,
    rhs,
    total_entropy,
)
from .errors import ConfigurationError, NonFiniteError, PathError, PositivityError
from .fluctuations import BLEND_CLAMP, BLEND_PAPER
from .model import P_HMIN, State, _entropy, _entropy_vars, _max_speed

METHODS = ("ssprk33", "rk4")

# rhs-like callable used for synthetic problems: f(u, t) -> du/dt
RhsFn = Callable[[np.ndarray, float], np.ndarray]
Target = Union[Semidiscretization, RhsFn]
Callback = Callable[[float, np.ndarray, int], None]


@dataclass(frozen=True)
class TimeIntegrationConfig:
    """Exactly one of ``dt`` (fixed stepping) and ``cfl`` (adaptive) is set.

    Callbacks and the time-series log fire every ``callback_interval`` steps,
    or, when ``callback_time`` is given, at the first step reaching each
    multiple of it.  The initial and final states are always logged.
    """

    t_end: float
    method: str = "ssprk33"
    dt: Optional[float] = None
    cfl: Optional[float] = None
    t_start: float = 0.0
    callback_interval: int = 1
    callback_time: Optional[float] = None
    max_steps: int = 100_000_000

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigurationError(f"time integrator must be one of {METHODS}, got {self.method!r}")
        if (self.dt is None) == (self.cfl is None):
            raise ConfigurationError("set exactly one of dt (fixed stepping) or cfl")
        if self.dt is not None and not self.dt > 0.0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        if self.cfl is not None and not self.cfl > 0.0:
            raise ConfigurationError(f"cfl must be positive, got {self.cfl}")
        if not self.t_end >= self.t_start:
            raise ConfigurationError(f"t_end={self.t_end} precedes t_start={self.t_start}")
        if self.callback_interval < 1:
            raise ConfigurationError("callback_interval must be >= 1")
        if self.callback_time is not None and not self.callback_time > 0.0:
            raise ConfigurationError("callback_time must be positive")


@dataclass
class TimeSeries:
    """One row per logged state; ``dt`` and ``alpha_max`` describe the step
    taken *from* that state (0 and the final rhs value for the last row)."""

    t: list = field(default_factory=list)
    total_entropy: list = field(default_factory=list)
    entropy_rate: list = field(default_factory=list)
    dt: list = field(default_factory=list)
    alpha_max: list = field(default_factory=list)

    COLUMNS = ("t", "total_entropy", "entropy_rate", "dt", "alpha_max")

    def __len__(self) -> int:
        return len(self.t)

    def append(self, t, s, rate, dt, alpha):
        self.t.append(float(t))
        self.total_entropy.append(float(s))
        self.entropy_rate.append(float(rate))
        self.dt.append(float(dt))
        self.alpha_max.append(float(alpha))

    def as_array(self) -> np.ndarray:
        return np.column_stack([np.asarray(getattr(self, c), dtype=float) for c in self.COLUMNS]) \
            if len(self) else np.zeros((0, len(self.COLUMNS)))


class _Evaluator:
    """Wraps rhs evaluation and remembers the largest blending factor seen."""

    def __init__(self, target: Target):
        self.target = target
        self.is_semi = isinstance(target, Semidiscretization)
        self.alpha_max = 0.0

    def __call__(self, u, t):
        if not self.is_semi:
            return np.asarray(self.target(u, t), dtype=float)
        du = rhs(self.target, u, t)
        if self.target.surface == "es":
            self.alpha_max = max(self.alpha_max, float(self.target.interface_log[:, 2].max()))
        return du


def _as_eval(target) -> _Evaluator:
    return target if isinstance(target, _Evaluator) else _Evaluator(target)


def step_ssprk33(semi: Target, u: np.ndarray, t: float, dt: float, k1: np.ndarray | None = None) -> np.ndarray:
    """One Shu-Osher SSPRK(3,3) step; ``k1`` may pass a precomputed rhs(u, t)."""
    if not dt > 0.0:
        raise ConfigurationError(f"time step must be positive, got {dt}")
    f = _as_eval(semi)
    if k1 is None:
        k1 = f(u, t)
    u1 = u + dt * k1
    u2 = 0.75 * u + 0.25 * (u1 + dt * f(u1, t + dt))
    return u / 3.0 + (2.0 / 3.0) * (u2 + dt * f(u2, t + 0.5 * dt))


def step_rk4(semi: Target, u: np.ndarray, t: float, dt: float, k1: np.ndarray | None = None) -> np.ndarray:
    if not dt > 0.0:
        raise ConfigurationError(f"time step must be positive, got {dt}")
    f = _as_eval(semi)
    if k1 is None:
        k1 = f(u, t)
    k2 = f(u + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = f(u + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = f(u + dt * k3, t + dt)
    return u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


_STEPPERS = {"ssprk33": step_ssprk33, "rk4": step_rk4}

# ---------------------------------------------------------------------------
# compiled multi-step driver (used when the semidiscretization has no source)

DRV_CONTINUE, DRV_DONE, DRV_POSITIVITY, DRV_NONFINITE, DRV_PATH = 0, 1, 2, 3, 4


@njit(cache=True)
def _screen(u, hmin, t, fail):
    """0 if every node is admissible, else a DRV_* code with fail = (t, k, i)."""
    for k in range(u.shape[0]):
        for i in range(u.shape[1]):
            h = u[k, i, 0]
            if not (math.isfinite(h) and math.isfinite(u[k, i, 1]) and math.isfinite(u[k, i, 2])):
                fail[0], fail[1], fail[2] = t, k, i
                return DRV_NONFINITE
            if not h >= hmin:
                fail[0], fail[1], fail[2] = t, k, i
                return DRV_POSITIVITY
    return DRV_CONTINUE


def _drive_impl(u, dmat, wts, dx, par, ec_kind, qn, qw, diss_kind, blend_mode, ilog,
                rk4, dt_fixed, cfl, t0, t, n, t_end, n_stop, t_stop, row, fail):
    """Advance ``u`` in place until n == n_stop, t >= t_stop or t == t_end.

    Mirrors the Python loop in ``integrate`` step for step.  ``row`` receives
    (S, dS/dt, dt, alpha_max) of the first step taken.
    Returns (status, n, t).
    """
    n_el = u.shape[0]
    n_nodes = u.shape[1]
    hmin = par[P_HMIN]
    tol = 1e-12 * max(1.0, abs(t_end))
    kst = np.zeros(n_el, dtype=np.int64)
    k1 = np.empty_like(u)
    k2 = np.empty_like(u)
    k3 = np.empty_like(u)
    k4 = np.empty_like(u)
    us = np.empty_like(u)
    uw = np.empty_like(u)
    first = True
    while True:
        if t_end - t <= tol:
            return DRV_DONE, n, t
        if not first and (n >= n_stop or t >= t_stop - tol):
            return DRV_CONTINUE, n, t
        st = _screen(u, hmin, t, fail)
        if st != DRV_CONTINUE:
            return st, n, t
        _RHS(u, dmat, wts, dx, par, ec_kind, qn, qw, diss_kind, blend_mode, k1, ilog, kst)
        if kst.any():
            fail[0] = t
            return DRV_PATH, n, t
        alpha = ilog[:, 2].max() if diss_kind != 0 else 0.0
        if dt_fixed > 0.0:
            dt = dt_fixed
        else:
            dt = math.inf
            last_node = n_nodes - 1
            for k in range(n_el):
                lam = 0.0
                for i in range(n_nodes):
                    lam = max(lam, _max_speed(u[k, i, 0], u[k, i, 1], u[k, i, 2], par))
                dt = min(dt, dx[k] / ((2 * last_node + 1) * lam))
            dt *= cfl
        last = t + dt * (1.0 + 1e-10) >= t_end
        if last:
            dt = t_end - t
        if first:
            s_tot = 0.0
            rate = 0.0
            for k in range(n_el):
                for i in range(n_nodes):
                    qw_ki = 0.5 * wts[i] * dx[k]
                    h, hv, b = u[k, i, 0], u[k, i, 1], u[k, i, 2]
                    w0, w1, w2 = _entropy_vars(h, hv, b, par)
                    s_tot += qw_ki * _entropy(h, hv, b, par)
                    rate += qw_ki * (w0 * k1[k, i, 0] + w1 * k1[k, i, 1] + w2 * k1[k, i, 2])
            row[0] = s_tot
            row[1] = rate
        if rk4:
            us[:] = u + 0.5 * dt * k1
            ts = t + 0.5 * dt
            st = _screen(us, hmin, ts, fail)
            if st != DRV_CONTINUE:
                return st, n, t
            _RHS(us, dmat, wts, dx, par, ec_kind, qn, qw, diss_kind, blend_mode, k2, ilog, kst)
            if diss_kind != 0:
                alpha = max(alpha, ilog[:, 2].max())
            us[:] = u + 0.5 * dt * k2
            st = _screen(us, hmin, ts, fail)
            if st != DRV_CONTINUE:
                return st, n, t
            _RHS(us, dmat, wts, dx, par, ec_kind, qn, qw, diss_kind, blend_mode, k3, ilog, kst)
            if diss_kind != 0:
                alpha = max(alpha, ilog[:, 2].max())
            us[:] = u + dt * k3
            ts = t + dt
            st = _screen(us, hmin, ts, fail)
            if st != DRV_CONTINUE:
                return st, n, t
            _RHS(us, dmat, wts, dx, par, ec_kind, qn, qw, diss_kind, blend_mode, k4, ilog, kst)
            if diss_kind != 0:
                alpha = max(alpha, ilog[:, 2].max())
            u[:] = u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        else:
            us[:] = u + dt * k1
            st = _screen(us, hmin, t + dt, fail)
            if st != DRV_CONTINUE:
                return st, n, t
            _RHS(us, dmat, wts, dx, par, ec_kind, qn, qw, diss_kind, blend_mode, k2, ilog, kst)
            if diss_kind != 0:
                alpha = max(alpha, ilog[:, 2].max())
            uw[:] = 0.75 * u + 0.25 * (us + dt * k2)
            st = _screen(uw, hmin, t + 0.5 * dt, fail)
            if st != DRV_CONTINUE:
                return st, n, t
            _RHS(uw, dmat, wts, dx, par, ec_kind, qn, qw, diss_kind, blend_mode, k3, ilog, kst)
            if diss_kind != 0:
                alpha = max(alpha, ilog[:, 2].max())
            u[:] = u / 3.0 + (2.0 / 3.0) * (uw + dt * k3)
        if kst.any():
            fail[0] = t
            return DRV_PATH, n, t
        if first:
            row[2] = dt
            row[3] = alpha
            first = False
        n += 1
        if last:
            t = t_end
        elif dt_fixed > 0.0:
            t = t0 + n * dt_fixed
        else:
            t += dt


_RHS = _rhs_serial
_drive_serial = njit(cache=True)(_drive_impl)
_drive_parallel = None


def _driver():
    global _drive_parallel
    kernel = _kernel()
    if kernel is _rhs_serial:
        return _drive_serial
    if _drive_parallel is None:
        glb = dict(_drive_impl.__globals__, _RHS=kernel)
        fn = types.FunctionType(_drive_impl.__code__, glb, "_drive_parallel")
        _drive_parallel = njit(fn)
    return _drive_parallel


class _CompiledEngine:
    def __init__(self, semi: Semidiscretization, config: "TimeIntegrationConfig"):
        self.semi = semi
        self.config = config
        self.drive = _driver()
        self.row = np.zeros(4)
        self.fail = np.zeros(3)

    def __call__(self, u, t, n, n_stop, t_stop):
        semi, cfg = self.semi, self.config
        status, n_new, t_new = self.drive(
            u, semi.basis.deriv_matrix, semi.basis.weights, semi.mesh.dx, semi.params.packed,
            _VOLUME[semi.volume], semi.rule.nodes, semi.rule.weights, semi._diss_code,
            BLEND_PAPER if semi.strict_paper_blend else BLEND_CLAMP, semi.interface_log,
            cfg.method == "rk4", cfg.dt if cfg.dt is not None else -1.0,
            cfg.cfl if cfg.cfl is not None else 0.0,
            float(cfg.t_start), float(t), int(n), float(cfg.t_end), int(n_stop), float(t_stop),
            self.row, self.fail,
        )
        if status in (DRV_POSITIVITY, DRV_NONFINITE, DRV_PATH):
            # let the regular checks build the detailed exception
            t_fail = float(self.fail[0])
            if status == DRV_PATH:
                raise PathError(f"entropy-variable quadrature path left the admissible set at t={t_fail}")
            k, i = int(self.fail[1]), int(self.fail[2])
            if status == DRV_NONFINITE:
                raise NonFiniteError(f"non-finite values at element {k}, node {i}, t={t_fail}")
            raise PositivityError(
                f"water height below floor in a stage at element {k}, node {i}, t={t_fail}",
                state=State(*u[k, i]), location=(k, i), time=t_fail,
            )
        row = None if n_new == n else (t, *self.row)
        return t_new, n_new, status == DRV_DONE, row


class _PythonEngine:
    def __init__(self, semi, config, evaluator):
        self.semi = semi
        self.config = config
        self.f = evaluator
        self.step = _STEPPERS[config.method]

    def __call__(self, u, t, n, n_stop, t_stop):
        # same control flow as _drive_impl, operating on u in place
        cfg, semi, f = self.config, self.semi, self.f
        t0, t_end = float(cfg.t_start), float(cfg.t_end)
        tol = 1e-12 * max(1.0, abs(t_end))
        row = None
        while True:
            if t_end - t <= tol:
                return t, n, True, row
            if row is not None and (n >= n_stop or t >= t_stop - tol):
                return t, n, False, row
            if n >= cfg.max_steps:
                raise ConfigurationError(f"max_steps={cfg.max_steps} reached at t={t}")
            f.alpha_max = 0.0
            k1 = f(u, t)
            dt = cfg.dt if cfg.dt is not None else cfl_timestep(semi, u, cfg.cfl)
            last = t + dt * (1.0 + 1e-10) >= t_end
            if last:
                dt = t_end - t
            if row is None:
                s_now, rate_now = total_entropy(semi, u), entropy_rate(semi, u, k1)
            u[:] = self.step(f, u, t, dt, k1=k1)
            if row is None:
                row = (t, s_now, rate_now, dt, f.alpha_max)
            n += 1
            if last:
                t = t_end
            elif cfg.dt is not None:
                t = t0 + n * cfg.dt
            else:
                t += dt


def integrate(
    semi: Semidiscretization,
    u0: np.ndarray,
    config: TimeIntegrationConfig,
    callbacks: Sequence[Callback] = (),
    compiled: bool | None = None,
) -> tuple[np.ndarray, TimeSeries]:
    """Advance ``u0`` from ``config.t_start`` to ``config.t_end``.

    Positivity and non-finite errors abort the run; they carry the failing
    stage time and, for positivity, the (element, node) location.

    ``compiled`` selects the numba multi-step driver; by default it is used
    whenever the semidiscretization has no source term (sources are Python
    callables).  Both paths take identical steps.
    """
    series = TimeSeries()
    t0, t_end = float(config.t_start), float(config.t_end)
    u = np.array(u0, dtype=float, order="C")
    check_field(semi, u, t0)
    if t_end == t0:
        return u, series
    if compiled is None:
        compiled = semi.source is None
    elif compiled and semi.source is not None:
        raise ConfigurationError("the compiled driver cannot evaluate Python source terms")
    f = _Evaluator(semi)
    engine = _CompiledEngine(semi, config) if compiled else _PythonEngine(semi, config, f)

    tol = 1e-12 * max(1.0, abs(t_end))
    t, n = t0, 0
    next_log = t0 + config.callback_time if config.callback_time else math.inf
    for cb in callbacks:
        cb(t, u, n)
    while True:
        n_stop = n + config.callback_interval if config.callback_time is None else config.max_steps
        n_stop = min(n_stop, config.max_steps)
        t, n_new, done, row = engine(u, t, n, n_stop, next_log)
        if row is not None:
            series.append(*row)
        if not done and n_new >= config.max_steps:
            raise ConfigurationError(f"max_steps={config.max_steps} reached at t={t}")
        n = n_new
        check_field(semi, u, t)
        while next_log <= t + tol:
            next_log += config.callback_time
        if done:
            f.alpha_max = 0.0
            k = f(u, t_end)
            series.append(t_end, total_entropy(semi, u), entropy_rate(semi, u, k), 0.0, f.alpha_max)
        for cb in callbacks:
            cb(t, u, n)
        if done:
            return u, series
