"""Analytic oracles and trajectory diagnostics.

Closed-form quantities (a-priori bounds, the drift-shifted principal
eigenvalue, the explicit decaying supersolution) and checks run on finished
trajectories: supersolution domination, pairwise ordering, decay-rate fits and
the blowup / fast / slow classification.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np

from .model import ModelParams, regime_discriminant, spreading_threshold, validate_params

if TYPE_CHECKING:
    from .solver import Discretization, Trajectory

__all__ = [
    "WrongRegime",
    "WrongParameter",
    "InadmissibleRate",
    "PreconditionViolated",
    "MismatchedRuns",
    "InsufficientData",
    "BoundsSpec",
    "bounds_K",
    "first_eigenvalue_shifted",
    "SupersolutionSpec",
    "fast_supersolution",
    "DominationReport",
    "check_supersolution_dominates",
    "OrderingReport",
    "compare_trajectories",
    "Regime",
    "DecayFit",
    "decay_fit",
    "ClassifierConfig",
    "RegimeReport",
    "classify_regime",
]


class WrongRegime(ValueError):
    pass


class WrongParameter(ValueError):
    pass


class InadmissibleRate(ValueError):
    pass


class PreconditionViolated(ValueError):
    pass


class MismatchedRuns(ValueError):
    pass


class InsufficientData(ValueError):
    pass


# ---------------------------------------------------------------------------
# closed forms


@dataclass(frozen=True)
class BoundsSpec:
    m: float
    K1: float
    K2: float


def bounds_K(params: ModelParams, m: float) -> BoundsSpec:
    """Uniform bounds ``u <= K1``, ``v <= K2`` for the weakly mutualistic case.

    ``K1 = m (a1 c2 + a2 c1) / (b1 c2 - b2 c1)`` and
    ``K2 = m (a1 b2 + a2 b1) / (b1 c2 - b2 c1)`` with safety factor ``m > 1``.
    They apply to a given run only if they also exceed ``max u0`` and
    ``sup v0``; that is left to the caller to check.
    """
    p = validate_params(params)
    if not m > 1:
        raise WrongParameter(f"safety multiplier m must exceed 1, got {m!r}")
    det = p.b1 * p.c2 - p.b2 * p.c1
    if not det > 0:
        raise WrongRegime(f"bounds need b1*c2 > b2*c1, got b1*c2 - b2*c1 = {det!r}")
    return BoundsSpec(m, m * (p.a1 * p.c2 + p.a2 * p.c1) / det, m * (p.a1 * p.b2 + p.a2 * p.b1) / det)


def first_eigenvalue_shifted(params: ModelParams, delta_drift: float) -> float:
    """Principal Dirichlet eigenvalue of ``-d1 phi'' - delta phi' = lambda phi`` on ``(-b, b)``.

    The substitution ``phi = exp(-delta x / 2 d1) psi`` removes the drift and
    gives ``d1 (pi / 2b)^2 + delta^2 / (4 d1)``.
    """
    p = validate_params(params)
    if delta_drift < 0:
        raise ValueError("delta_drift must be nonnegative")
    return spreading_threshold(p) + delta_drift**2 / (4.0 * p.d1)


@dataclass(frozen=True)
class SupersolutionSpec:
    """Explicit upper solution with bounded fronts and exponential decay.

    ``u_bar(t, x) = delta exp(-beta t) cos(pi x / 2 sigma(t))`` on
    ``|x| <= sigma(t) = 2b (k - exp(-gamma t))`` and ``v_bar = k a2 / c2``.
    ``admissible`` is false when ``b > b0``; the construction does not certify
    anything then.
    """

    k: float
    b: float
    b0: float
    gamma: float
    beta: float
    delta: float
    v_bar: float
    admissible: bool

    def sigma(self, t):
        return 2.0 * self.b * (self.k - np.exp(-self.gamma * np.asarray(t, dtype=float)))

    def lam(self, t):
        return -self.sigma(t)

    @staticmethod
    def W(y):
        return np.cos(0.5 * np.pi * np.asarray(y, dtype=float))

    def u_bar(self, t: float, x):
        x = np.asarray(x, dtype=float)
        s = float(self.sigma(t))
        inside = np.abs(x) <= s
        return np.where(inside, self.delta * math.exp(-self.beta * t) * self.W(np.clip(x / s, -1, 1)), 0.0)

    @property
    def sigma_limit(self) -> float:
        return 2.0 * self.b * self.k


def fast_supersolution(params: ModelParams, k: float = 2.0) -> SupersolutionSpec:
    """Parameters of the decaying supersolution for the strongly mutualistic case.

    ``b0`` solves ``d1 (pi/2)^2 / (8 k^2 b0^2) = a1 + k a2 c1 / c2``;
    ``beta = gamma = (pi/2)^2 d1 / (16 k^2 b0^2)`` and
    ``delta = min((k-1) a2 / (b2 e^(beta tau2)), (k-1) d1 pi / (2 k^2 mu) (b / 2b0)^2)``.
    """
    p = validate_params(params)
    if not k > 1:
        raise WrongParameter(f"k must exceed 1, got {k!r}")
    rate = p.a1 + k * p.a2 * p.c1 / p.c2
    if not rate > 0:
        raise InadmissibleRate(f"a1 + k a2 c1 / c2 = {rate!r} must be positive for b0 to exist")
    quarter_pi2 = (0.5 * math.pi) ** 2
    b0 = math.sqrt(p.d1 * quarter_pi2 / (8.0 * k**2 * rate))
    beta = quarter_pi2 * p.d1 / (16.0 * k**2 * b0**2)
    delta = min(
        (k - 1.0) * p.a2 / (p.b2 * math.exp(beta * p.tau2)),
        (k - 1.0) * p.d1 * math.pi / (2.0 * k**2 * p.mu) * (p.b / (2.0 * b0)) ** 2,
    )
    if not delta > 0:
        raise InadmissibleRate(f"amplitude delta = {delta!r} is not positive (needs a2 > 0)")
    return SupersolutionSpec(k=k, b=p.b, b0=b0, gamma=beta, beta=beta, delta=delta,
                             v_bar=k * p.a2 / p.c2, admissible=p.b <= b0)


# ---------------------------------------------------------------------------
# trajectory checks


@dataclass
class DominationReport:
    ok: bool
    steps_checked: int
    snapshots_checked: int
    violations: int
    first_violation: dict | None
    min_front_margin: float      # min over steps of sigma(t) - h(t) and g(t) - lambda(t)
    min_field_margin: float      # min over snapshot nodes of u_bar - u
    params: dict = field(default_factory=dict)
    spec: dict = field(default_factory=dict)

    kind = "domination"

    def to_dict(self) -> dict:
        out = asdict(self)
        out["report_type"] = self.kind
        return out


def _slack(value, bound, rtol):
    return bound + rtol * (1.0 + np.abs(bound)) - value


def check_supersolution_dominates(traj: "Trajectory", spec: SupersolutionSpec,
                                  params: ModelParams, tol: float = 1e-8) -> DominationReport:
    """Check ``lambda <= g``, ``h <= sigma``, ``u <= u_bar`` and ``v <= v_bar`` along a run.

    Fronts and sup-norms are checked on every logged step, full fields on every
    snapshot, with tolerance ``tol * (1 + |bound|)``. Raises
    `PreconditionViolated` if the initial data are not already ordered below
    the supersolution.
    """
    p = validate_params(params)
    first = traj.snapshots[0]
    x_v = first.x_v
    ub0 = spec.u_bar(0.0, first.x_u)
    if (np.any(_slack(first.u, ub0, tol) < 0) or np.any(_slack(first.v, spec.v_bar, tol) < 0)
            or -p.b < float(spec.lam(0.0)) or p.b > float(spec.sigma(0.0))):
        raise PreconditionViolated("initial data are not below the supersolution")

    violations = 0
    first_violation = None

    def flag(t, what, x, value, bound):
        nonlocal first_violation
        if first_violation is None:
            first_violation = {"t": float(t), "kind": what, "x": None if x is None else float(x),
                               "value": float(value), "bound": float(bound)}

    log = traj.log
    t = log["t"]
    sig = spec.sigma(t)
    lam = -sig
    ubar_max = spec.delta * np.exp(-spec.beta * t)
    checks = [
        ("h<=sigma", log["h"], sig),
        ("-g<=sigma", -log["g"], -lam),
        ("max_u<=delta*exp(-beta t)", log["max_u"], ubar_max),
        ("max_v<=v_bar", log["max_v"], np.full_like(t, spec.v_bar)),
    ]
    for what, value, bound in checks:
        bad = np.nonzero(_slack(value, bound, tol) < 0)[0]
        violations += bad.size
        if bad.size:
            i = bad[0]
            flag(t[i], what, None, value[i], bound[i])
    front_margin = float(min(np.min(sig - log["h"]), np.min(log["g"] - lam)))

    field_margin = math.inf
    for snap in traj.snapshots:
        ub = spec.u_bar(snap.t, snap.x_u)
        slack = _slack(snap.u, ub, tol)
        field_margin = min(field_margin, float(np.min(ub - snap.u)))
        bad = np.nonzero(slack < 0)[0]
        violations += bad.size
        if bad.size:
            flag(snap.t, "u<=u_bar", snap.x_u[bad[0]], snap.u[bad[0]], ub[bad[0]])
        bad = np.nonzero(_slack(snap.v, spec.v_bar, tol) < 0)[0]
        violations += bad.size
        if bad.size:
            flag(snap.t, "v<=v_bar", x_v[bad[0]], snap.v[bad[0]], spec.v_bar)

    return DominationReport(
        ok=violations == 0,
        steps_checked=int(t.size),
        snapshots_checked=len(traj.snapshots),
        violations=int(violations),
        first_violation=first_violation,
        min_front_margin=front_margin,
        min_field_margin=field_margin,
        params=p.to_dict(),
        spec=asdict(spec),
    )


@dataclass
class OrderingReport:
    ok: bool
    times_checked: int
    front_checks: int
    violations: int
    first_violation: dict | None
    max_excess: float   # largest amount by which A exceeded B (<= 0 when ordered)
    params: dict = field(default_factory=dict)

    kind = "ordering"

    def to_dict(self) -> dict:
        out = asdict(self)
        out["report_type"] = self.kind
        return out


def _same_setup(a: "Trajectory", b: "Trajectory") -> bool:
    da, db = a.disc, b.disc
    return (a.params.to_dict() == b.params.to_dict() and a.frame == b.frame
            and (da.n_u, da.n_v, da.L, da.dt) == (db.n_u, db.n_v, db.L, db.dt))


def compare_trajectories(traj_a: "Trajectory", traj_b: "Trajectory", tol: float = 1e-6) -> OrderingReport:
    """Check that run A stays below run B: ``g_A >= g_B``, ``h_A <= h_B``, ``u_A <= u_B``, ``v_A <= v_B``.

    Fields are compared on the shared ``v`` grid at snapshot times common to
    both runs, fronts at every logged time common to both. The tolerance is
    ``tol * (1 + largest density)`` at that time.
    """
    from .solver import sample_solution

    if not _same_setup(traj_a, traj_b):
        raise MismatchedRuns("runs must share parameters, frame and discretization")

    def excess_fields(sa, sb):
        x = sa.x_v
        ua, va = sample_solution(sa, x)
        ub, vb = sample_solution(sb, x)
        scale = 1.0 + max(float(sa.u.max()), float(sa.v.max()), float(sb.u.max()), float(sb.v.max()))
        return x, ua - ub, va - vb, tol * scale

    x0, du0, dv0, tol0 = excess_fields(traj_a.snapshots[0], traj_b.snapshots[0])
    if np.any(du0 > tol0) or np.any(dv0 > tol0):
        raise PreconditionViolated("initial data are not ordered (need u0_A <= u0_B and v0_A <= v0_B)")

    violations = 0
    first_violation = None
    max_excess = -math.inf

    def flag(t, what, x, excess):
        nonlocal first_violation
        if first_violation is None:
            first_violation = {"t": float(t), "kind": what, "x": x, "excess": float(excess)}

    snaps_b = {s.t: s for s in traj_b.snapshots}
    times = 0
    for sa in traj_a.snapshots:
        sb = snaps_b.get(sa.t)
        if sb is None:
            continue
        times += 1
        x, du, dv, tl = excess_fields(sa, sb)
        max_excess = max(max_excess, float(du.max()), float(dv.max()))
        for what, d in (("u_A<=u_B", du), ("v_A<=v_B", dv)):
            bad = np.nonzero(d > tl)[0]
            if bad.size:
                violations += bad.size
                flag(sa.t, what, float(x[bad[0]]), d[bad[0]])

    la, lb = traj_a.log, traj_b.log
    common, ia, ib = np.intersect1d(la["t"], lb["t"], assume_unique=True, return_indices=True)
    scale = 1.0 + np.maximum.reduce([la["max_u"][ia], la["max_v"][ia], lb["max_u"][ib], lb["max_v"][ib]])
    for what, d in (("h_A<=h_B", la["h"][ia] - lb["h"][ib]), ("g_A>=g_B", lb["g"][ib] - la["g"][ia])):
        if d.size:
            max_excess = max(max_excess, float(d.max()))
        bad = np.nonzero(d > tol * scale)[0]
        if bad.size:
            violations += bad.size
            flag(common[bad[0]], what, None, d[bad[0]])

    return OrderingReport(
        ok=violations == 0,
        times_checked=times,
        front_checks=int(common.size),
        violations=int(violations),
        first_violation=first_violation,
        max_excess=float(max_excess),
        params=traj_a.params.to_dict(),
    )


# ---------------------------------------------------------------------------
# classification


class Regime(str, enum.Enum):
    BLOWUP = "Blowup"
    FAST = "GlobalFast"
    SLOW = "GlobalSlow"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class DecayFit:
    C: float
    beta: float
    r_squared: float


def decay_fit(traj, fraction: float = 0.5, floor: float = 1e-250) -> DecayFit:
    """Least-squares fit ``max_u ~ C exp(-beta t)`` over the last ``fraction`` of the run.

    ``traj`` is a `Trajectory` or a ``(t, max_u)`` pair. Values at or below
    ``floor`` carry no usable logarithm; if the tail of the run has fewer than
    10 usable points (``u`` decayed past the floor early) the fit uses the last
    ``fraction`` of the usable stretch instead. Raises `InsufficientData` when
    fewer than 10 usable points exist at all.
    """
    if isinstance(traj, tuple):
        t, m = (np.asarray(a, dtype=float) for a in traj)
    else:
        t, m = traj.log["t"], traj.log["max_u"]
    usable = m > floor
    if t.size == 0 or usable.sum() < 10:
        raise InsufficientData("need at least 10 records with positive max_u")
    sel = usable & (t >= t[0] + (1.0 - fraction) * (t[-1] - t[0]))
    if sel.sum() < 10:
        tu = t[usable]
        sel = usable & (t >= tu[0] + (1.0 - fraction) * (tu[-1] - tu[0]))
    if sel.sum() < 10:
        sel = usable
    ts, ys = t[sel], np.log(m[sel])
    tm = ts.mean()
    dt = ts - tm
    slope = float(np.dot(dt, ys - ys.mean()) / np.dot(dt, dt))
    intercept = float(ys.mean() - slope * tm)
    resid = ys - (intercept + slope * ts)
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot <= 1e-300 else 1.0 - ss_res / ss_tot
    return DecayFit(C=math.exp(intercept), beta=-slope, r_squared=r2)


@dataclass(frozen=True)
class ClassifierConfig:
    """Finite-horizon stand-ins for the asymptotic regime definitions.

    A run is *GlobalFast* when, over the last ``tail_fraction`` of the horizon,
    both front speeds stay below ``velocity_tol`` times the initial front speed
    and ``max_u`` fits an exponential decay with ``R^2 >= r2_min``; it is
    *GlobalSlow* when ``h(t_end) >= spread_factor * b`` and ``h'(t_end) > 0``.
    """

    tail_fraction: float = 0.25
    velocity_tol: float = 1e-4
    r2_min: float = 0.99
    spread_factor: float = 3.0
    fit_fraction: float = 0.5


@dataclass
class RegimeReport:
    classification: Regime
    t_blow: float | None
    decay_fit: DecayFit | None
    front_limits: dict
    diagnostics: dict
    params: dict = field(default_factory=dict)

    kind = "regime"

    def __post_init__(self):
        if (self.classification is Regime.BLOWUP) != (self.t_blow is not None):
            raise ValueError("t_blow must be present exactly for Blowup")
        if self.classification is Regime.FAST and (self.decay_fit is None or not self.decay_fit.beta > 0):
            raise ValueError("GlobalFast needs a decay fit with beta > 0")

    def to_dict(self) -> dict:
        return {
            "report_type": self.kind,
            "classification": self.classification.value,
            "t_blow": self.t_blow,
            "decay_fit": None if self.decay_fit is None else {
                "C": self.decay_fit.C, "beta": self.decay_fit.beta, "r_squared": self.decay_fit.r_squared},
            "front_limits": dict(self.front_limits),
            "diagnostics": dict(self.diagnostics),
            "params": dict(self.params),
        }


def classify_regime(traj: "Trajectory", params: ModelParams, disc: "Discretization | None" = None,
                    config: ClassifierConfig | None = None) -> RegimeReport:
    """Label a finished run as Blowup, GlobalFast, GlobalSlow or Undetermined.

    Pure function of the trajectory; see `ClassifierConfig` for the rules.
    """
    p = validate_params(params)
    cfg = config or ClassifierConfig()
    log = traj.log
    t = log["t"]
    disc_ = regime_discriminant(p)
    diagnostics: dict[str, Any] = {
        "discriminant": disc_.value,
        "mutualism": disc_.label.value,
        "threshold_1": spreading_threshold(p, 1),
        "threshold_2": spreading_threshold(p, 2),
        "a1_above_threshold": p.a1 > spreading_threshold(p, 1),
        "a2_above_threshold": p.a2 > spreading_threshold(p, 2),
        "terminated": traj.terminated,
        "t_final": float(t[-1]),
        "steps": int(t.size - 1),
        "max_u": float(np.max(log["max_u"])),
        "max_v": float(np.max(log["max_v"])),
        "max_front_speed": float(np.max(np.maximum(np.abs(log["g_dot"]), np.abs(log["h_dot"])))),
    }
    if traj.max_field_attempted is not None:
        diagnostics["max_field_attempted"] = traj.max_field_attempted
    front_limits = {"g": float(log["g"][-1]), "h": float(log["h"][-1]),
                    "g_dot": float(log["g_dot"][-1]), "h_dot": float(log["h_dot"][-1])}

    try:
        fit = decay_fit(traj, cfg.fit_fraction)
    except InsufficientData:
        fit = None

    def report(regime, t_blow=None):
        return RegimeReport(regime, t_blow, fit, front_limits, diagnostics, p.to_dict())

    if traj.terminated == "blowup":
        return report(Regime.BLOWUP, float(traj.t_blow))
    if traj.terminated != "t_end" or t.size < 2:
        return report(Regime.UNDETERMINED)

    t0, t1 = t[0], t[-1]
    tail = t >= t1 - cfg.tail_fraction * (t1 - t0)
    speed0 = max(abs(log["g_dot"][0]), abs(log["h_dot"][0]))
    tail_speed = float(np.max(np.maximum(np.abs(log["g_dot"][tail]), np.abs(log["h_dot"][tail]))))
    diagnostics["tail_front_speed"] = tail_speed
    diagnostics["front_speed_cutoff"] = cfg.velocity_tol * speed0
    fronts_stalled = tail_speed < cfg.velocity_tol * speed0

    if fronts_stalled and fit is not None and fit.beta > 0 and fit.r_squared >= cfg.r2_min:
        return report(Regime.FAST)
    if log["h"][-1] >= cfg.spread_factor * p.b and log["h_dot"][-1] > 0:
        return report(Regime.SLOW)
    return report(Regime.UNDETERMINED)
