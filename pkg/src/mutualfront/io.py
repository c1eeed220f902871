"""Output artifacts: front time series (CSV), reports (JSON) and resumable snapshots (NPZ).

Snapshot layout (``.npz``, all arrays float64 unless noted):

===============  ==========================================================
``meta``         0-d unicode array holding a JSON object: ``schema_version``,
                 ``params``, ``disc``, ``initial`` (profile spec or null),
                 ``frame``, ``next_output``
``t``            current time (0-d)
``front``        ``[g, h, g_dot, h_dot, grad_g, grad_h]``
``u``, ``x_u``   ``u`` on the reference grid and its physical node positions
``v``            ``v`` on ``linspace(-L, L, n_v)``
``hist_*``       history window: ``hist_t`` (k,), ``hist_xu``/``hist_u``
                 (k, n_u), ``hist_v`` (k, n_v)
``init_*``       constant prehistory record (``init_xu``, ``init_u``, ``init_v``)
``x_v``          the ``v`` grid; ``horizon`` the retained delay span (0-d)
===============  ==========================================================

Floats are stored bit-for-bit, so resuming from a snapshot taken at a
snapshot time reproduces an uninterrupted run exactly.
"""
from __future__ import annotations

import csv
import datetime as _dt
import json
import os
from pathlib import Path

import numpy as np

from . import __version__
from .history import HistoryBuffer
from .model import ModelParams, make_initial_data
from .solver import Discretization, FieldState, FrontState, Trajectory

__all__ = [
    "TIMESERIES_COLUMNS",
    "REPORT_SCHEMA_VERSION",
    "SNAPSHOT_SCHEMA_VERSION",
    "write_timeseries",
    "read_timeseries",
    "write_report",
    "report_document",
    "save_snapshot",
    "load_snapshot",
]

TIMESERIES_COLUMNS = ("t", "g", "h", "g_dot", "h_dot", "max_u", "max_v", "mass_u")
REPORT_SCHEMA_VERSION = 1
SNAPSHOT_SCHEMA_VERSION = 1


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_timeseries(traj: Trajectory, path) -> None:
    """One row per logged step; 17 significant digits so values round-trip exactly."""
    path = Path(path)
    cols = [traj.log[c] for c in TIMESERIES_COLUMNS]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TIMESERIES_COLUMNS)
        for row in zip(*cols):
            w.writerow([_fmt(x) for x in row])


def read_timeseries(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in r] for r in reader]
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def report_document(report, *, extra: dict | None = None, timestamp: bool = True) -> dict:
    doc = report.to_dict()
    doc["schema_version"] = REPORT_SCHEMA_VERSION
    doc["tool_version"] = __version__
    if extra:
        doc.update(extra)
    if timestamp:
        doc["generated_at"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return _jsonable(doc)


def write_report(report, path, *, extra: dict | None = None, timestamp: bool = True) -> None:
    """Write a regime, domination or ordering report as JSON with sorted keys."""
    doc = report_document(report, extra=extra, timestamp=timestamp)
    text = json.dumps(doc, sort_keys=True, indent=2)
    Path(path).write_text(text + "\n")


# ---------------------------------------------------------------------------
# snapshots


def save_snapshot(traj: Trajectory, path) -> None:
    """Persist the final state and delay history of ``traj`` for `load_snapshot`."""
    state = traj.final_state
    if state is None or traj.final_history is None:
        raise ValueError("trajectory has no final state to save")
    disc = traj.disc.replace(output_interval=traj.disc.snapshot_interval)
    meta = {
        "schema_version": SNAPSHOT_SCHEMA_VERSION,
        "tool_version": __version__,
        "params": traj.params.to_dict(),
        "disc": disc.to_dict(),
        "initial": traj.initial_spec,
        "frame": traj.frame,
        "next_output": int(traj.next_output),
    }
    f = state.front
    arrays = traj.final_history.to_arrays()
    tmp = Path(str(path) + ".tmp.npz")
    np.savez(
        tmp,
        meta=np.array(json.dumps(meta, sort_keys=True)),
        t=np.array(state.t),
        front=np.array([f.g, f.h, f.g_dot, f.h_dot, f.grad_g, f.grad_h]),
        u=state.u, x_u=state.x_u, v=state.v,
        **arrays,
    )
    os.replace(tmp, path)


def load_snapshot(path):
    """Return ``(params, disc, initial_data, frame_name, state, history, next_output)``."""
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        if meta.get("schema_version") != SNAPSHOT_SCHEMA_VERSION:
            raise ValueError(f"unsupported snapshot schema {meta.get('schema_version')!r}")
        arrays = {k: data[k] for k in data.files if k != "meta"}
    params = ModelParams.from_dict(meta["params"])
    disc = Discretization(**meta["disc"])
    initial = make_initial_data(meta["initial"], params) if meta.get("initial") else None
    fr = arrays["front"]
    state = FieldState(float(arrays["t"]), arrays["u"], arrays["v"],
                       FrontState(*(float(x) for x in fr)), arrays["x_u"], float(disc.L))
    for a in (state.u, state.v, state.x_u):
        a.flags.writeable = False
    history = HistoryBuffer.from_arrays(arrays)
    return params, disc, initial, meta["frame"], state, history, int(meta["next_output"])
