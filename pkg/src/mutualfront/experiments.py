"""Experiment drivers behind the command line: single runs, ordered pairs,
fast-solution certificates, parameter sweeps, convergence studies and resumes.

Each driver takes an `ExperimentConfig` and an output directory, writes its
artifacts there and returns the in-memory results.
"""
from __future__ import annotations

import csv
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from pathlib import Path

import numpy as np

from .analysis import (
    Regime,
    check_supersolution_dominates,
    classify_regime,
    compare_trajectories,
    fast_supersolution,
)
from .config import ExperimentConfig, SweepAxis
from .io import load_snapshot, save_snapshot, write_report, write_timeseries
from .model import ModelError, validate_params
from .solver import ConfigError, Discretization, integrate

__all__ = [
    "SWEEP_TAIL",
    "CONVERGENCE_COLUMNS",
    "run_experiment",
    "compare_experiment",
    "certify_experiment",
    "certificate_initial",
    "run_sweep",
    "sweep_cell",
    "ConvergenceLevel",
    "convergence_table",
    "run_convergence",
    "resume_experiment",
]

SWEEP_TAIL = ("classification", "t_blow", "beta_fit", "h_final")
CONVERGENCE_COLUMNS = ("level", "dx", "dt", "err_u", "err_front", "order_u", "order_front")


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def _outdir(out) -> Path:
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _integrate(cfg: ExperimentConfig, initial, disc: Discretization | None = None):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return integrate(cfg.params, initial, disc or cfg.disc, cfg.frame)


def run_experiment(cfg: ExperimentConfig, out, *, timestamp: bool = True):
    """Single run: ``timeseries.csv``, ``report.json`` and ``final.npz``."""
    out = _outdir(out)
    traj = _integrate(cfg, cfg.initial_data())
    report = classify_regime(traj, cfg.params, cfg.disc, cfg.classifier)
    write_timeseries(traj, out / "timeseries.csv")
    write_report(report, out / "report.json", extra=_run_extra(cfg, traj), timestamp=timestamp)
    save_snapshot(traj, out / "final.npz")
    return traj, report


def _run_extra(cfg: ExperimentConfig, traj) -> dict:
    return {
        "mode": cfg.mode,
        "frame": cfg.frame,
        "seed": cfg.seed,
        "initial": traj.initial_spec,
        "disc": cfg.disc.to_dict(),
        "thresholds": {
            "velocity_tol": cfg.classifier.velocity_tol,
            "r2_min": cfg.classifier.r2_min,
            "spread_factor": cfg.classifier.spread_factor,
            "tail_fraction": cfg.classifier.tail_fraction,
            "fit_fraction": cfg.classifier.fit_fraction,
            "blowup_threshold": cfg.disc.blowup_threshold,
        },
        "warnings": list(traj.warnings),
    }


def compare_experiment(cfg: ExperimentConfig, out, *, timestamp: bool = True):
    """Run the ``[initial]`` data and the ``[compare] upper`` data and check ordering."""
    out = _outdir(out)
    lower = _integrate(cfg, cfg.initial_data())
    upper = _integrate(cfg, cfg.initial_data(cfg.compare_upper))
    report = compare_trajectories(lower, upper, tol=cfg.compare_tol)
    write_timeseries(lower, out / "timeseries_lower.csv")
    write_timeseries(upper, out / "timeseries_upper.csv")
    write_report(report, out / "ordering.json",
                 extra={"initial_lower": lower.initial_spec, "initial_upper": upper.initial_spec,
                        "disc": cfg.disc.to_dict(), "frame": cfg.frame},
                 timestamp=timestamp)
    return lower, upper, report


def certificate_initial(cfg: ExperimentConfig, spec) -> dict:
    """Initial data for a certificate run: ``[initial]`` entries win over the fractions."""
    init = cfg.resolved_initial()
    init.setdefault("u0", {"kind": "cosine", "amplitude": cfg.certify.u0_fraction * spec.delta})
    init.setdefault("v0", {"kind": "constant", "value": cfg.certify.v0_fraction * spec.v_bar})
    return init


def certify_experiment(cfg: ExperimentConfig, out, *, timestamp: bool = True):
    """Check the decaying supersolution against a run and classify it.

    Writes ``timeseries.csv``, ``domination.json`` and ``report.json``.
    """
    out = _outdir(out)
    spec = fast_supersolution(cfg.params, cfg.certify.k)
    init = certificate_initial(cfg, spec)
    traj = _integrate(cfg, cfg.initial_data(init))
    dom = check_supersolution_dominates(traj, spec, cfg.params, tol=cfg.certify.tol)
    report = classify_regime(traj, cfg.params, cfg.disc, cfg.classifier)
    write_timeseries(traj, out / "timeseries.csv")
    write_report(dom, out / "domination.json", extra={"initial": traj.initial_spec}, timestamp=timestamp)
    extra = _run_extra(cfg, traj)
    extra["certificate"] = {"sigma_limit": spec.sigma_limit, "beta": spec.beta, "b0": spec.b0,
                            "delta": spec.delta, "k": spec.k}
    write_report(report, out / "report.json", extra=extra, timestamp=timestamp)
    return traj, dom, report


# ---------------------------------------------------------------------------
# sweeps


def _apply_axis(cfg: ExperimentConfig, axis: str, value: float) -> ExperimentConfig:
    if axis == "u0.amplitude":
        init = dict(cfg.initial)
        u0 = dict(init.get("u0", {"kind": "cosine", "amplitude": 1.0}))
        u0["amplitude"] = value
        init["u0"] = u0
        return cfg.replace(initial=init)
    if axis == "v0.value":
        init = dict(cfg.initial)
        v0 = dict(init.get("v0", {"kind": "constant", "value": 0.0}))
        v0["value"] = value
        init["v0"] = v0
        return cfg.replace(initial=init)
    return cfg.replace(params=cfg.params.replace(**{axis: value}))


def sweep_cell(cfg: ExperimentConfig, names: tuple[str, ...], values: tuple[float, ...]) -> dict:
    """Run one sweep cell; failures come back as ``classification="Error"``."""
    row = {"values": tuple(float(v) for v in values), "classification": "Error",
           "t_blow": None, "beta_fit": None, "h_final": None, "error": None}
    try:
        cell = cfg
        for name, value in zip(names, values):
            cell = _apply_axis(cell, name, float(value))
        cell = cell.replace(params=validate_params(cell.params))
        cell.disc.check(cell.params)
        traj = _integrate(cell, cell.initial_data())
        rep = classify_regime(traj, cell.params, cell.disc, cell.classifier)
    except (ModelError, ConfigError, ValueError, ArithmeticError, RuntimeError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row
    row["classification"] = rep.classification.value
    row["t_blow"] = rep.t_blow
    row["beta_fit"] = rep.decay_fit.beta if rep.decay_fit is not None else None
    row["h_final"] = float(traj.log["h"][-1])
    return row


def _sweep_task(args):
    return sweep_cell(*args)


def run_sweep(cfg: ExperimentConfig, out=None, *, threads: int = 1) -> list[dict]:
    """Evaluate every grid cell and write ``sweep.csv`` (axis 1 outer, axis 2 inner)."""
    axes: tuple[SweepAxis, ...] = cfg.sweep_axes
    names = tuple(a.name for a in axes)
    cells = list(product(*(a.values() for a in axes)))
    tasks = [(cfg, names, tuple(float(v) for v in c)) for c in cells]
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_sweep_task, tasks))
    else:
        rows = [_sweep_task(t) for t in tasks]
    if out is not None:
        path = _outdir(out) / "sweep.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(names + SWEEP_TAIL)
            for r in rows:
                w.writerow([_fmt(v) for v in r["values"]] + [r["classification"], _fmt(r["t_blow"]),
                                                              _fmt(r["beta_fit"]), _fmt(r["h_final"])])
    return rows


# ---------------------------------------------------------------------------
# convergence


@dataclass(frozen=True)
class ConvergenceLevel:
    """Final state of one refinement level, reduced to what the table needs.

    ``u`` lives on a uniform reference grid whose every ``2**j``-th node is a
    node of the next-coarser grid (or on one shared grid, for time studies).
    """

    dx: float
    dt: float
    u: np.ndarray
    g: float
    h: float


def _restrict(u: np.ndarray, n: int) -> np.ndarray:
    if u.size == n:
        return u
    stride, rem = divmod(u.size - 1, n - 1)
    if rem:
        raise ValueError(f"grid of {u.size} nodes does not nest over {n} nodes")
    return u[::stride]


def _diff(a: ConvergenceLevel, b: ConvergenceLevel) -> tuple[float, float]:
    n = min(a.u.size, b.u.size)
    du = float(np.max(np.abs(_restrict(a.u, n) - _restrict(b.u, n))))
    df = max(abs(a.g - b.g), abs(a.h - b.h))
    return du, df


def _order(coarse: float, fine: float, ratio: float) -> float:
    if coarse > 0 and fine > 0:
        return math.log(coarse / fine) / math.log(ratio)
    return float("nan")


def convergence_table(levels: list[ConvergenceLevel], ratio: float = 2.0) -> list[dict]:
    """Errors against the finest level and observed orders.

    ``err_*`` of level ``l`` is the max-norm distance to the finest level at
    the coarse nodes. ``order_*`` of level ``l >= 2`` uses three consecutive
    levels, ``log(|q_{l-2} - q_{l-1}| / |q_{l-1} - q_l|) / log(ratio)``, which
    does not need the exact solution and is not biased by the reference.
    """
    ref = levels[-1]
    rows = []
    for i, lev in enumerate(levels):
        err_u, err_f = _diff(lev, ref)
        order_u = order_f = float("nan")
        if i >= 2:
            du0, df0 = _diff(levels[i - 2], levels[i - 1])
            du1, df1 = _diff(levels[i - 1], lev)
            order_u, order_f = _order(du0, du1, ratio), _order(df0, df1, ratio)
        rows.append({"level": i, "dx": lev.dx, "dt": lev.dt, "err_u": err_u, "err_front": err_f,
                     "order_u": order_u, "order_front": order_f})
    return rows


def _write_table(rows: list[dict], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CONVERGENCE_COLUMNS)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in CONVERGENCE_COLUMNS])


def run_convergence(cfg: ExperimentConfig, out=None) -> dict[str, list[dict]]:
    """Self-convergence in space (``dt`` fixed) and in time (grids fixed).

    Writes ``convergence_space.csv`` and ``convergence_time.csv``. Snapshots
    are taken only at ``t_end`` so every level takes uniform steps.
    """
    cv = cfg.convergence
    base = cfg.disc.replace(output_interval=cfg.disc.t_end if cfg.disc.t_end > 0 else None)
    initial = cfg.initial_data()
    b = cfg.params.b

    def level(disc: Discretization) -> ConvergenceLevel:
        traj = _integrate(cfg, initial, disc)
        if traj.terminated != "t_end":
            raise RuntimeError(f"convergence run ended with {traj.terminated!r} "
                               f"(n_u={disc.n_u}, dt={disc.dt})")
        s = traj.final_state
        return ConvergenceLevel(2.0 * b / (disc.n_u - 1), disc.dt, np.array(s.u), s.front.g, s.front.h)

    space = []
    for i in range(cv.levels):
        f = 2**i
        space.append(level(base.replace(n_u=(cv.space_n_u - 1) * f + 1, n_v=(cv.space_n_v - 1) * f + 1)))
    time = [level(base.replace(dt=cv.time_dt / 2**i)) for i in range(cv.levels)]
    tables = {"space": convergence_table(space), "time": convergence_table(time)}
    if out is not None:
        out = _outdir(out)
        _write_table(tables["space"], out / "convergence_space.csv")
        _write_table(tables["time"], out / "convergence_time.csv")
    return tables


# ---------------------------------------------------------------------------
# resume


def resume_experiment(snapshot, t_end: float, out, *, timestamp: bool = True, classifier=None):
    """Continue a saved run to ``t_end``; writes the continuation's artifacts."""
    out = _outdir(out)
    params, disc, initial, frame, state, history, next_output = load_snapshot(snapshot)
    if not t_end > state.t:
        raise ConfigError(f"t_end={t_end!r} must exceed the snapshot time {state.t!r}")
    disc = disc.replace(t_end=float(t_end))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        traj = integrate(params, initial, disc, frame, state=state, history=history,
                         next_output=next_output, strict_width=False)
    report = classify_regime(traj, params, disc, classifier)
    write_timeseries(traj, out / "timeseries.csv")
    write_report(report, out / "report.json",
                 extra={"resumed_from": str(snapshot), "t_start": float(state.t),
                        "disc": disc.to_dict(), "frame": frame, "warnings": list(traj.warnings)},
                 timestamp=timestamp)
    save_snapshot(traj, out / "final.npz")
    return traj, report


def regime_exit_ok(report) -> bool:
    """False when the run stopped on numerical instability rather than a regime outcome."""
    return not (report.classification is Regime.UNDETERMINED
                and report.diagnostics.get("terminated") == "unstable")
