import math
from types import SimpleNamespace

import numpy as np
import pytest

from _oracles import shooting_eigenvalue
from mutualfront.analysis import (
    ClassifierConfig,
    InadmissibleRate,
    InsufficientData,
    MismatchedRuns,
    PreconditionViolated,
    Regime,
    RegimeReport,
    WrongParameter,
    WrongRegime,
    bounds_K,
    check_supersolution_dominates,
    classify_regime,
    compare_trajectories,
    decay_fit,
    fast_supersolution,
    first_eigenvalue_shifted,
)
from mutualfront.model import ModelParams, make_initial_data
from mutualfront.solver import Discretization, integrate

UNIT = ModelParams(d1=1, d2=1, a1=1, a2=1, b1=1, b2=2, c1=1, c2=1, mu=1, b=1)


def test_bounds_frozen(weak):
    # (a1 c2 + a2 c1) / (b1 c2 - b2 c1) = 3 / 3 for the weak preset
    spec = bounds_K(weak, 1.05)
    assert spec.K1 == pytest.approx(1.05, rel=1e-15)
    assert spec.K2 == pytest.approx(1.05, rel=1e-15)
    with pytest.raises(WrongParameter):
        bounds_K(weak, 1.0)
    with pytest.raises(WrongRegime):
        bounds_K(UNIT, 1.05)


def test_supersolution_hand_values():
    # b0^2 = (pi/2)^2 / (8 * 4 * 3) and beta = (pi/2)^2 / (64 b0^2) = 96 / 64
    spec = fast_supersolution(UNIT, 2.0)
    assert spec.b0 == pytest.approx(0.160318728770233, rel=1e-12)
    assert spec.beta == pytest.approx(1.5, rel=1e-14)
    assert spec.gamma == spec.beta
    assert spec.v_bar == 2.0
    assert not spec.admissible
    half = fast_supersolution(UNIT.replace(b=spec.b0 / 2), 2.0)
    assert half.admissible
    # delta = min(a2 / b2, pi / 8 * (1/4)^2) = min(0.5, pi / 128)
    assert half.delta == pytest.approx(math.pi / 128, rel=1e-14)
    assert half.sigma_limit == pytest.approx(2 * 2 * spec.b0 / 2)
    assert float(half.sigma(0.0)) == pytest.approx(2 * half.b * (2.0 - 1.0))


def test_supersolution_errors():
    with pytest.raises(WrongParameter):
        fast_supersolution(UNIT, 1.0)
    with pytest.raises(InadmissibleRate):
        fast_supersolution(UNIT.replace(a1=-5.0), 2.0)
    with pytest.raises(InadmissibleRate):
        fast_supersolution(UNIT.replace(a1=3.0, a2=-0.5), 2.0)


def test_delay_shrinks_delta():
    tau = 0.4
    spec = fast_supersolution(UNIT.replace(tau2=tau, b2=200.0), 2.0)
    assert spec.delta == pytest.approx(1.0 / (200.0 * math.exp(1.5 * tau)))


def test_eigenvalue_unshifted_and_shooting():
    p = UNIT.replace(d1=0.7, b=1.3)
    assert first_eigenvalue_shifted(p, 0.0) == pytest.approx(0.7 * (math.pi / 2.6) ** 2, rel=1e-15)
    ref = shooting_eigenvalue(0.7, 1.3, 0.9)
    assert first_eigenvalue_shifted(p, 0.9) == pytest.approx(ref, rel=1e-8)
    with pytest.raises(ValueError):
        first_eigenvalue_shifted(p, -1.0)


def test_decay_fit_recovers_exponential():
    t = np.linspace(0, 4, 200)
    fit = decay_fit((t, 3.0 * np.exp(-2.5 * t)))
    assert fit.beta == pytest.approx(2.5, rel=1e-10)
    assert fit.C == pytest.approx(3.0, rel=1e-9)
    assert fit.r_squared == pytest.approx(1.0)
    with pytest.raises(InsufficientData):
        decay_fit((t[:5], np.exp(-t[:5])))


def test_decay_fit_skips_underflow():
    t = np.linspace(0, 10, 1001)
    m = np.exp(-30 * t)
    m[t > 6] = 0.0
    fit = decay_fit((t, m))
    assert fit.beta == pytest.approx(30, rel=1e-8)


def _fake(t, g, h, max_u, terminated="t_end", t_blow=None):
    t = np.asarray(t, float)
    log = {"t": t, "g": np.asarray(g, float), "h": np.asarray(h, float),
           "g_dot": np.gradient(g, t), "h_dot": np.gradient(h, t),
           "max_u": np.asarray(max_u, float), "max_v": np.ones_like(t)}
    return SimpleNamespace(log=log, terminated=terminated, t_blow=t_blow, max_field_attempted=None)


def test_classifier_rules(weak):
    t = np.linspace(0, 10, 1001)
    fast = _fake(t, -1.2 + 0.2 * np.exp(-8 * t), 1.2 - 0.2 * np.exp(-8 * t), np.exp(-t))
    rep = classify_regime(fast, weak)
    assert rep.classification is Regime.FAST and rep.decay_fit.beta == pytest.approx(1.0)

    slow = _fake(t, -1 - t, 1 + t, 1.0 / (1 + t))
    assert classify_regime(slow, weak).classification is Regime.SLOW

    stuck = _fake(t, -1 - 0.1 * t, 1 + 0.1 * t, np.ones_like(t))
    rep = classify_regime(stuck, weak)
    assert rep.classification is Regime.UNDETERMINED
    assert rep.t_blow is None

    blow = _fake(t[:50], -1 - t[:50], 1 + t[:50], np.exp(t[:50]), "blowup", float(t[49]))
    rep = classify_regime(blow, weak)
    assert rep.classification is Regime.BLOWUP and rep.t_blow == float(t[49])

    strict = ClassifierConfig(spread_factor=20.0)
    assert classify_regime(slow, weak, config=strict).classification is Regime.UNDETERMINED


def test_report_invariants():
    with pytest.raises(ValueError):
        RegimeReport(Regime.BLOWUP, None, None, {}, {})
    with pytest.raises(ValueError):
        RegimeReport(Regime.FAST, None, None, {}, {})
    with pytest.raises(ValueError):
        RegimeReport(Regime.SLOW, 1.0, None, {}, {})


DISC = Discretization(n_u=81, n_v=161, L=8.0, dt=2e-3, t_end=0.5, output_interval=0.1)


def _run(p, amp, v, disc=DISC):
    ini = make_initial_data({"u0": {"kind": "cosine", "amplitude": amp},
                             "v0": {"kind": "constant", "value": v}}, p)
    return integrate(p, ini, disc)


def test_compare_ordered_pair(weak):
    lo, hi = _run(weak, 0.3, 0.3), _run(weak, 0.6, 0.4)
    rep = compare_trajectories(lo, hi)
    assert rep.ok and rep.violations == 0 and rep.times_checked == 6
    assert rep.max_excess <= 0
    with pytest.raises(PreconditionViolated):
        compare_trajectories(hi, lo)
    with pytest.raises(MismatchedRuns):
        compare_trajectories(lo, _run(weak, 0.6, 0.4, DISC.replace(dt=1e-3)))


def test_domination_precondition():
    p = UNIT.replace(b=fast_supersolution(UNIT).b0 / 2)
    spec = fast_supersolution(p)
    disc = Discretization(n_u=81, n_v=161, L=5.0, dt=1e-3, t_end=0.2)
    big = _run(p, 2 * spec.delta, 1.0, disc)
    with pytest.raises(PreconditionViolated):
        check_supersolution_dominates(big, spec, p)
    ok = _run(p, 0.5 * spec.delta, 1.0, disc)
    rep = check_supersolution_dominates(ok, spec, p)
    assert rep.ok and rep.violations == 0 and rep.min_front_margin > 0
    d = rep.to_dict()
    assert d["report_type"] == "domination"
