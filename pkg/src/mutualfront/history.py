"""Time-indexed store of past field states for the delayed reaction terms."""
from __future__ import annotations

import bisect
from dataclasses import dataclass

import numpy as np

__all__ = ["HistoryRecord", "HistoryBuffer"]


@dataclass(frozen=True)
class HistoryRecord:
    t: float
    x_u: np.ndarray   # physical positions of the u nodes
    u: np.ndarray
    v: np.ndarray     # on the fixed v grid


class HistoryBuffer:
    """Ring of recent records supporting lookups at ``t - tau``.

    Queries at times ``<= 0`` return the initial record, which stands for the
    constant history on ``[-tau, 0]``. Queries in between two stored records
    are linearly interpolated in time; ``u`` is first interpolated in space on
    each record's own nodes (it is 0 outside that record's habitat) so records
    with different front positions can be blended.

    Only records newer than ``t_latest - horizon`` (plus the one just before)
    are retained.
    """

    def __init__(self, initial: HistoryRecord, x_v: np.ndarray, horizon: float):
        self.initial = initial
        self.x_v = x_v
        self.horizon = float(horizon)
        self._records: list[HistoryRecord] = [initial]
        self._times: list[float] = [initial.t]

    def __len__(self) -> int:
        return len(self._records)

    @property
    def records(self) -> list[HistoryRecord]:
        return list(self._records)

    @property
    def latest(self) -> HistoryRecord:
        return self._records[-1]

    def push(self, record: HistoryRecord) -> None:
        if record.t <= self._times[-1]:
            raise ValueError("history records must be pushed in increasing time")
        self._records.append(record)
        self._times.append(record.t)
        self._trim()

    def _trim(self) -> None:
        cutoff = self._times[-1] - self.horizon
        # keep the last record at or before the cutoff so lookups can bracket it
        k = bisect.bisect_right(self._times, cutoff) - 1
        if k > 0 and k > len(self._times) // 2:
            del self._records[:k]
            del self._times[:k]

    def _bracket(self, s: float):
        """Return (record_lo, record_hi, weight_hi) bracketing time ``s``."""
        if s <= 0.0:
            return self.initial, None, 0.0
        times = self._times
        if s >= times[-1]:
            if s > times[-1] + 1e-12 * max(1.0, abs(s)):
                raise ValueError(f"history lookup at t={s!r} is in the future (latest {times[-1]!r})")
            return self._records[-1], None, 0.0
        j = bisect.bisect_right(times, s)
        if j == 0:
            raise ValueError(f"history lookup at t={s!r} precedes the retained window")
        lo, hi = self._records[j - 1], self._records[j]
        if s == lo.t:
            return lo, None, 0.0
        w = (s - lo.t) / (hi.t - lo.t)
        return lo, hi, w

    def u_at(self, s: float, x: np.ndarray) -> np.ndarray:
        """Delayed ``u(s, x)``, extended by zero outside the habitat at time ``s``."""
        lo, hi, w = self._bracket(s)
        out = np.interp(x, lo.x_u, lo.u, left=0.0, right=0.0)
        if hi is not None:
            out = (1.0 - w) * out + w * np.interp(x, hi.x_u, hi.u, left=0.0, right=0.0)
        return out

    def v_at(self, s: float, x: np.ndarray) -> np.ndarray:
        """Delayed ``v(s, x)``; held at the edge value beyond the truncated window."""
        lo, hi, w = self._bracket(s)
        v = lo.v if hi is None else (1.0 - w) * lo.v + w * hi.v
        return np.interp(x, self.x_v, v)

    # serialization helpers -------------------------------------------------

    def to_arrays(self) -> dict[str, np.ndarray]:
        recs = self._records
        return {
            "hist_t": np.array(self._times),
            "hist_xu": np.stack([r.x_u for r in recs]),
            "hist_u": np.stack([r.u for r in recs]),
            "hist_v": np.stack([r.v for r in recs]),
            "init_xu": self.initial.x_u,
            "init_u": self.initial.u,
            "init_v": self.initial.v,
            "x_v": self.x_v,
            "horizon": np.array(self.horizon),
        }

    @classmethod
    def from_arrays(cls, arrays) -> "HistoryBuffer":
        initial = HistoryRecord(0.0, arrays["init_xu"], arrays["init_u"], arrays["init_v"])
        buf = cls(initial, arrays["x_v"], float(arrays["horizon"]))
        times = arrays["hist_t"]
        buf._records = [
            HistoryRecord(float(t), xu, u, v)
            for t, xu, u, v in zip(times, arrays["hist_xu"], arrays["hist_u"], arrays["hist_v"])
        ]
        buf._times = [float(t) for t in times]
        return buf
