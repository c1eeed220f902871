"""Time stepping of the delayed two-species system with Stefan fronts.

One step advances both densities by backward Euler in the diffusion and the
front-induced drift (a tridiagonal solve per field), with the reaction
evaluated from the old level: growth terms explicitly, self-limitation and
any net-negative growth as a lagged loss on the diagonal so the update stays
positive. Fronts use a predictor-corrector on the Stefan law
``h' = -mu u_x(h)``, ``g' = -mu u_x(g)``.

``v`` lives on the truncated window ``[-L, L]`` with zero-flux ends.
"""
from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .history import HistoryBuffer, HistoryRecord
from .model import InitialData, ModelParams, validate_params
from .transform import AffineFrame, uniform_grid, frame_from_name
from .tridiag import implicit_update

__all__ = [
    "ConfigError",
    "StepBlowup",
    "StepUnstable",
    "OutOfDomain",
    "Discretization",
    "FrontState",
    "FieldState",
    "Trajectory",
    "boundary_gradients",
    "front_velocity",
    "init_state",
    "step",
    "sample_solution",
    "integrate",
    "run",
]


class ConfigError(ValueError):
    pass


class StepBlowup(RuntimeError):
    def __init__(self, max_field: float, threshold: float):
        super().__init__(f"field reached {max_field:.3e} (threshold {threshold:.1e})")
        self.max_field = max_field


class StepUnstable(RuntimeError):
    pass


class OutOfDomain(ValueError):
    pass


@dataclass(frozen=True)
class Discretization:
    """Grid sizes, step size and stopping rules.

    ``output_interval`` sets the spacing of full-field snapshots (the front
    log is dense, one row per accepted step); it defaults to ``t_end / 50``.
    ``cfl_safety`` caps the distance a front may travel in one step as a
    fraction of the local cell width.
    """

    n_u: int = 401
    n_v: int = 401
    L: float = 20.0
    dt: float = 1e-4
    t_end: float = 1.0
    blowup_threshold: float = 1e8
    cfl_safety: float = 0.5
    output_interval: float | None = None
    max_retries: int = 4

    def check(self, params: ModelParams | None = None, *, strict_width: bool = True) -> None:
        if self.n_u < 5 or self.n_v < 5:
            raise ConfigError("n_u and n_v must be at least 5")
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if not self.t_end >= 0:
            raise ConfigError("t_end must be nonnegative")
        if not self.blowup_threshold > 0:
            raise ConfigError("blowup_threshold must be positive")
        if not 0 < self.cfl_safety <= 1:
            raise ConfigError("cfl_safety must lie in (0, 1]")
        if self.output_interval is not None and not self.output_interval > 0:
            raise ConfigError("output_interval must be positive")
        if self.max_retries < 0:
            raise ConfigError("max_retries must be nonnegative")
        if params is not None:
            if not self.L > params.b:
                raise ConfigError(f"L={self.L} must exceed b={params.b}")
            need = self.min_half_width(params)
            if strict_width and self.L < need:
                raise ConfigError(f"L={self.L} is below 4b + 4 sqrt(d2 t_end) = {need:.4g}")

    def min_half_width(self, params: ModelParams) -> float:
        return 4.0 * params.b + 4.0 * math.sqrt(params.d2 * self.t_end)

    @property
    def snapshot_interval(self) -> float:
        if self.output_interval is not None:
            return self.output_interval
        return self.t_end / 50.0 if self.t_end > 0 else 1.0

    def x_v(self) -> np.ndarray:
        return uniform_grid(-self.L, self.L, self.n_v)

    def replace(self, **changes: Any) -> "Discretization":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class FrontState:
    g: float
    h: float
    g_dot: float
    h_dot: float
    grad_g: float = 0.0   # one-sided u_x at g
    grad_h: float = 0.0   # one-sided u_x at h


@dataclass(frozen=True)
class FieldState:
    """Densities at one time level.

    ``u`` is stored on the reference grid of the stepping frame, with the
    physical node positions in ``x_u``; ``v`` is on ``linspace(-L, L, n_v)``.
    """

    t: float
    u: np.ndarray
    v: np.ndarray
    front: FrontState
    x_u: np.ndarray
    L: float

    @property
    def x_v(self) -> np.ndarray:
        return uniform_grid(-self.L, self.L, self.v.shape[0])


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


def boundary_gradients(x_u: np.ndarray, u: np.ndarray) -> tuple[float, float]:
    """One-sided 3-point second-order ``u_x`` at the first and last node.

    Works on nonuniform nodes; on a uniform grid it is
    ``(-3u0 + 4u1 - u2) / 2dx``.
    """
    def one_sided(x0, x1, x2, f0, f1, f2):
        h1 = x1 - x0
        h2 = x2 - x0
        return (-(h1 + h2) / (h1 * h2) * f0
                + h2 / (h1 * (h2 - h1)) * f1
                - h1 / (h2 * (h2 - h1)) * f2)

    left = one_sided(x_u[0], x_u[1], x_u[2], u[0], u[1], u[2])
    right = one_sided(x_u[-1], x_u[-2], x_u[-3], u[-1], u[-2], u[-3])
    return float(left), float(right)


def _front_from(g: float, h: float, x_u: np.ndarray, u: np.ndarray, mu: float) -> FrontState:
    grad_g, grad_h = boundary_gradients(x_u, u)
    return FrontState(g, h, -mu * grad_g, -mu * grad_h, grad_g, grad_h)


def front_velocity(state: FieldState, params: ModelParams) -> tuple[float, float]:
    """Stefan velocities ``(g', h') = (-mu u_x(g), -mu u_x(h))`` of a field state."""
    grad_g, grad_h = boundary_gradients(state.x_u, state.u)
    return -params.mu * grad_g, -params.mu * grad_h


def init_state(params: ModelParams, initial_data: InitialData, disc: Discretization,
               frame=None) -> tuple[FieldState, HistoryBuffer]:
    """Sample the initial data and prime the history with the constant prehistory."""
    p = validate_params(params)
    frame = frame or AffineFrame()
    if not disc.L > p.b:
        raise ConfigError(f"L={disc.L} must exceed b={p.b}")
    grid = frame.grid(disc.n_u, p.b)
    x_u = frame.positions(-p.b, p.b, grid)
    u = np.asarray(initial_data.u0(x_u), dtype=float).copy()
    u[0] = u[-1] = 0.0
    x_v = disc.x_v()
    v = np.asarray(initial_data.v0(x_v), dtype=float).copy()
    front = _front_from(-p.b, p.b, x_u, u, p.mu)
    state = FieldState(0.0, _freeze(u), _freeze(v), front, _freeze(x_u), float(disc.L))
    history = HistoryBuffer(HistoryRecord(0.0, state.x_u, state.u, state.v), x_v,
                            horizon=max(p.tau1, p.tau2))
    return state, history


def step(state: FieldState, history: HistoryBuffer, params: ModelParams,
         disc: Discretization, dt: float | None = None, frame=None) -> FieldState:
    """Advance one step of size ``dt`` (default ``disc.dt``).

    Raises `StepUnstable` on non-finite values and `StepBlowup` when either
    density exceeds ``disc.blowup_threshold``. The caller pushes the result
    into ``history``.
    """
    p = params
    frame = frame or AffineFrame()
    dt = disc.dt if dt is None else dt
    f = state.front
    t = state.t

    grid = frame.grid(state.u.shape[0], p.b)
    dz = grid[1] - grid[0]
    x_v = state.x_v
    dx_v = x_v[1] - x_v[0]

    # predictor for the fronts
    g_pred = f.g + dt * f.g_dot
    h_pred = f.h + dt * f.h_dot

    v_delayed = history.v_at(t - p.tau1, state.x_u)
    u_delayed = history.u_at(t - p.tau2, x_v)

    u, v = state.u, state.v
    growth_u = p.a1 + p.c1 * v_delayed
    diffusion, drift = frame.coefficients(g_pred, h_pred, f.g_dot, f.h_dot, grid, p.d1)
    u_new = implicit_update(
        u, dt, dz, diffusion, drift,
        loss=p.b1 * u + np.maximum(-growth_u, 0.0),
        source=u * np.maximum(growth_u, 0.0),
        bc="dirichlet",
    )
    growth_v = p.a2 + p.b2 * u_delayed
    v_new = implicit_update(
        v, dt, dx_v, p.d2, 0.0,
        loss=p.c2 * v + np.maximum(-growth_v, 0.0),
        source=v * np.maximum(growth_v, 0.0),
        bc="neumann",
    )

    if not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(v_new))):
        raise StepUnstable(f"non-finite values at t={t + dt!r}")
    peak = max(float(u_new.max()), float(v_new.max()))
    if peak > disc.blowup_threshold:
        raise StepBlowup(peak, disc.blowup_threshold)

    # corrector: average the old and predicted Stefan velocities
    x_pred = frame.positions(g_pred, h_pred, grid)
    grad_g, grad_h = boundary_gradients(x_pred, u_new)
    g_new = f.g + 0.5 * dt * (f.g_dot - p.mu * grad_g)
    h_new = f.h + 0.5 * dt * (f.h_dot - p.mu * grad_h)
    if not (math.isfinite(g_new) and math.isfinite(h_new) and g_new < h_new):
        raise StepUnstable(f"front update failed at t={t + dt!r}: g={g_new!r}, h={h_new!r}")

    x_new = frame.positions(g_new, h_new, grid)
    front = _front_from(g_new, h_new, x_new, u_new, p.mu)
    return FieldState(t + dt, _freeze(u_new), _freeze(v_new), front, _freeze(x_new), state.L)


def sample_solution(state: FieldState, x):
    """``(u, v)`` at physical points ``x``; ``u`` is 0 outside ``[g, h]``."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > state.L):
        raise OutOfDomain(f"points outside [-L, L] with L={state.L}")
    g, h = state.front.g, state.front.h
    u = np.interp(x, state.x_u, state.u, left=0.0, right=0.0)
    u = np.where((x < g) | (x > h), 0.0, u)
    v = np.interp(x, state.x_v, state.v)
    if u.ndim == 0:
        return float(u), float(v)
    return u, v


# ---------------------------------------------------------------------------
# trajectories


_LOG_FIELDS = ("t", "g", "h", "g_dot", "h_dot", "grad_g", "grad_h", "max_u", "max_v", "mass_u")


def _trapezoid(y, x):
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


def _log_row(state: FieldState) -> tuple:
    f = state.front
    return (state.t, f.g, f.h, f.g_dot, f.h_dot, f.grad_g, f.grad_h,
            float(state.u.max()), float(state.v.max()), _trapezoid(state.u, state.x_u))


@dataclass
class Trajectory:
    """Output of `integrate`: a dense front log and sparse field snapshots.

    The log has one row per accepted step (and the initial state) with the
    columns in ``LOG_FIELDS``. ``terminated`` is ``"t_end"``, ``"blowup"`` or
    ``"unstable"``; for blowup ``t_blow`` is the last stable time.
    """

    params: ModelParams
    disc: Discretization
    frame: str
    initial_spec: dict | None
    log: dict[str, np.ndarray]
    snapshots: list[FieldState]
    terminated: str = "t_end"
    t_blow: float | None = None
    max_field_attempted: float | None = None
    final_state: FieldState | None = None
    final_history: HistoryBuffer | None = field(default=None, repr=False)
    next_output: int = 1
    warnings: list[str] = field(default_factory=list)

    LOG_FIELDS = _LOG_FIELDS

    def __getattr__(self, name):
        # expose log columns as attributes: traj.t, traj.h, ...
        log = self.__dict__.get("log")
        if log is not None and name in log:
            return log[name]
        raise AttributeError(name)

    def __getstate__(self):
        return self.__dict__

    def __setstate__(self, state):
        self.__dict__.update(state)

    @property
    def n_steps(self) -> int:
        return len(self.log["t"]) - 1


def _far_field_warning(state: FieldState) -> str | None:
    v = state.v
    dx = state.x_v[1] - state.x_v[0]
    slope = max(abs(v[1] - v[0]), abs(v[-1] - v[-2])) / dx
    if slope > 1e-6 * max(float(v.max()), 1e-300):
        return (f"|v_x| near the truncation edge is {slope:.3e} at t={state.t:.4g}; "
                "the window [-L, L] may be too narrow")
    return None


def _output_time(k: int, interval: float) -> float:
    # 3 * 0.1 is 0.30000000000000004; rounding keeps runs that stop at an output
    # time and runs that pass through it on the same float
    return round(k * interval, 12)


def integrate(params: ModelParams, initial_data: InitialData | None, disc: Discretization,
              frame=None, *, state: FieldState | None = None, history: HistoryBuffer | None = None,
              next_output: int | None = None, strict_width: bool = True) -> Trajectory:
    """Step from the initial data (or a given state) to ``disc.t_end``.

    The step is ``min(dt, CFL limit, time to next snapshot)``. A step that
    overshoots the blowup threshold or produces non-finite values is retried
    with halved step up to ``disc.max_retries`` times; if every retry fails
    the run stops with ``terminated="blowup"`` (or ``"unstable"``).
    """
    p = validate_params(params)
    disc.check(p, strict_width=strict_width)
    if frame is None or isinstance(frame, str):
        frame = frame_from_name(frame or "affine", p.b)
    if state is None:
        if initial_data is None:
            raise ConfigError("either initial_data or a starting state is required")
        state, history = init_state(p, initial_data, disc, frame)
    elif history is None:
        raise ConfigError("resuming needs the history buffer")

    interval = disc.snapshot_interval
    if next_output is None:
        next_output = int(math.floor(state.t / interval + 1e-9)) + 1
    rows = [_log_row(state)]
    snapshots = [state]
    traj = Trajectory(p, disc, frame.name, initial_data.to_spec() if initial_data else None,
                      {}, snapshots)
    warned = set()

    def note(msg: str | None, key: str):
        if msg and key not in warned:
            warned.add(key)
            traj.warnings.append(msg)
            warnings.warn(msg, RuntimeWarning, stacklevel=3)

    t_end = disc.t_end
    while state.t < t_end:
        target = min(_output_time(next_output, interval), t_end)
        remaining = target - state.t
        dt = disc.dt
        f = state.front
        speed = max(abs(f.g_dot), abs(f.h_dot))
        if speed > 0:
            dt = min(dt, disc.cfl_safety * float(np.min(np.diff(state.x_u))) / speed)
        lands = remaining <= dt * (1.0 + 1e-9)
        if lands:
            dt = remaining

        trial = dt
        new = None
        failure = None
        for _ in range(disc.max_retries + 1):
            try:
                new = step(state, history, p, disc, trial, frame)
                break
            except (StepBlowup, StepUnstable) as exc:
                failure = exc
                trial *= 0.5
        if new is None:
            if isinstance(failure, StepBlowup):
                traj.terminated = "blowup"
                traj.t_blow = state.t
                traj.max_field_attempted = failure.max_field
            else:
                traj.terminated = "unstable"
            break
        if trial == dt and lands:
            new = dataclasses.replace(new, t=target)
            if target == _output_time(next_output, interval):
                snapshots.append(new)
                next_output += 1
        state = new
        history.push(HistoryRecord(state.t, state.x_u, state.u, state.v))
        rows.append(_log_row(state))
        if abs(state.front.g) > state.L or abs(state.front.h) > state.L:
            note(f"front left the v window [-L, L] at t={state.t:.4g}", "front")

    if snapshots[-1] is not state:
        snapshots.append(state)
    note(_far_field_warning(state), "far")

    arr = np.array(rows, dtype=float)
    traj.log = {name: arr[:, i].copy() for i, name in enumerate(_LOG_FIELDS)}
    traj.final_state = state
    traj.final_history = history
    traj.next_output = next_output
    return traj


def run(params: ModelParams, initial_data: InitialData, disc: Discretization, frame=None,
        classifier=None):
    """Integrate and classify: returns ``(Trajectory, RegimeReport)``."""
    from .analysis import classify_regime

    traj = integrate(params, initial_data, disc, frame)
    return traj, classify_regime(traj, params, disc, classifier)
