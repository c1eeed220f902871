import math
import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from mutualfront.model import make_initial_data
from mutualfront.solver import (
    ConfigError,
    Discretization,
    OutOfDomain,
    boundary_gradients,
    init_state,
    integrate,
    sample_solution,
)
from mutualfront.transform import AffineFrame, TransformOutOfRange

SMALL = Discretization(n_u=101, n_v=201, L=10.0, dt=1e-3, t_end=0.5)


def _ini(p, amp=0.5, v=0.5, **u0):
    u_spec = {"kind": "cosine", "amplitude": amp} if not u0 else u0
    return make_initial_data({"u0": u_spec, "v0": {"kind": "constant", "value": v}}, p)


def test_discretization_checks(weak):
    with pytest.raises(ConfigError):
        Discretization(n_u=3).check(weak)
    with pytest.raises(ConfigError):
        Discretization(dt=0.0).check(weak)
    with pytest.raises(ConfigError):
        Discretization(cfl_safety=1.5).check(weak)
    with pytest.raises(ConfigError):
        Discretization(L=5.0, t_end=4.0).check(weak)   # needs 4b + 4 sqrt(d2 t_end) = 12
    Discretization(L=5.0, t_end=4.0).check(weak, strict_width=False)


def test_boundary_gradient_exact_for_quadratics():
    rng = np.random.default_rng(3)
    x = np.sort(rng.uniform(-1, 2, 12))
    u = 3 * x**2 - 2 * x + 0.5
    gl, gr = boundary_gradients(x, u)
    assert gl == pytest.approx(6 * x[0] - 2, rel=1e-10)
    assert gr == pytest.approx(6 * x[-1] - 2, rel=1e-10)


def test_initial_front_speed_matches_cosine_slope(weak):
    # u0 = A cos(pi x / 2b) has u_x(b) = -A pi / 2b
    p = weak.replace(mu=2.0)
    disc = Discretization(n_u=401, n_v=401, L=6.0, t_end=0.1)
    state, _ = init_state(p, _ini(p, amp=0.8), disc, AffineFrame())
    exact = 2.0 * 0.8 * math.pi / 2
    assert state.front.h_dot == pytest.approx(exact, rel=1e-4)
    assert state.front.g_dot == pytest.approx(-exact, rel=1e-4)
    assert (state.front.g, state.front.h) == (-1.0, 1.0)


def test_far_field_follows_logistic_ode(weak):
    # away from the habitat u = 0, so v solves v' = v (a2 - c2 v)
    p = weak.replace(a2=1.5, c2=1.0)
    v0 = 0.2
    errs = []
    for dt in (2e-3, 1e-3):
        disc = Discretization(n_u=51, n_v=201, L=12.0, dt=dt, t_end=1.0)
        traj = integrate(p, _ini(p, v=v0), disc)
        v_edge = traj.final_state.v[0]
        a, c = p.a2, p.c2
        exact = (a / c) / (1 + (a / (c * v0) - 1) * math.exp(-a * 1.0))
        errs.append(abs(v_edge - exact))
    assert errs[1] < 1e-3
    assert 1.7 < errs[0] / errs[1] < 2.3   # first order in time


def test_stefan_law_integrates(weak):
    traj = integrate(weak, _ini(weak), SMALL)
    t, h, g = traj.t, traj.h, traj.g
    trap = getattr(np, "trapezoid", None) or np.trapz
    dh, dg = trap(traj.h_dot, t), trap(traj.g_dot, t)
    assert h[-1] - h[0] == pytest.approx(dh, rel=1e-3)
    assert g[-1] - g[0] == pytest.approx(dg, rel=1e-3)


def test_zero_delay_limit(weak):
    base = integrate(weak, _ini(weak), SMALL)
    diffs = []
    for tau in (4e-2, 1e-2, 2.5e-3):
        p = weak.replace(tau1=tau, tau2=tau)
        traj = integrate(p, _ini(p), SMALL)
        diffs.append(abs(traj.h[-1] - base.h[-1]) + np.max(np.abs(traj.final_state.u - base.final_state.u)))
    assert diffs[0] > diffs[1] > diffs[2]
    assert diffs[2] < 1e-3
    # the delayed coupling is O(tau), so shrinking tau 4x shrinks the gap about 4x
    assert diffs[1] / diffs[2] > 2.5


def test_even_data_stays_symmetric(weak):
    p = weak.replace(tau1=0.1, tau2=0.05)
    traj = integrate(p, _ini(p, amp=1.0), SMALL)
    assert np.max(np.abs(traj.g + traj.h)) <= 1e-8 * p.b
    s = traj.final_state
    assert np.allclose(s.u, s.u[::-1], atol=1e-12)


def test_skewed_data_breaks_symmetry(weak):
    p = weak
    ini = make_initial_data({"u0": {"kind": "skewed_cosine", "amplitude": 1.0, "skew": 0.6}}, p)
    traj = integrate(p, ini, SMALL)
    assert traj.h[-1] + traj.g[-1] > 1e-4
    assert np.all(np.abs(traj.g + traj.h) < 2 * p.b)


@settings(max_examples=8, deadline=None,
          suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
@given(a1=st.floats(-2, 6), a2=st.floats(-2, 6), tau1=st.floats(0, 0.3), tau2=st.floats(0, 0.3),
       amp=st.floats(0.05, 3), v=st.floats(0, 2))
def test_positivity_and_monotone_fronts(weak, a1, a2, tau1, tau2, amp, v):
    p = weak.replace(a1=a1, a2=a2, tau1=tau1, tau2=tau2)
    disc = Discretization(n_u=61, n_v=121, L=8.0, dt=2e-3, t_end=0.3)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        traj = integrate(p, _ini(p, amp=amp, v=v), disc)
    assert traj.terminated == "t_end"
    for s in traj.snapshots:
        assert np.all(s.u >= 0) and np.all(s.v >= 0)
    assert np.all(np.diff(traj.h) >= 0) and np.all(np.diff(traj.g) <= 0)
    assert np.all(traj.h_dot > 0) and np.all(traj.g_dot < 0)


def test_blowup_is_detected(strong):
    disc = Discretization(n_u=101, n_v=201, L=20.0, dt=1e-3, t_end=10.0)
    traj = integrate(strong, _ini(strong, amp=1.0, v=1.0), disc)
    assert traj.terminated == "blowup"
    assert 0 < traj.t_blow < 10.0
    assert traj.max_field_attempted > disc.blowup_threshold
    assert traj.t[-1] == traj.t_blow
    assert np.max(traj.max_u[-1:]) <= disc.blowup_threshold


def test_snapshots_land_on_output_times(weak):
    disc = SMALL.replace(output_interval=0.1)
    traj = integrate(weak, _ini(weak), disc)
    times = [s.t for s in traj.snapshots]
    assert times == pytest.approx([0.0, 0.1, 0.2, 0.3, 0.4, 0.5], abs=1e-12)
    assert traj.t[-1] == 0.5


def test_runs_are_deterministic(weak):
    p = weak.replace(tau1=0.05)
    a = integrate(p, _ini(p), SMALL)
    b = integrate(p, _ini(p), SMALL)
    for k in a.log:
        assert np.array_equal(a.log[k], b.log[k])


def test_sample_solution(weak):
    traj = integrate(weak, _ini(weak), SMALL)
    s = traj.final_state
    x = np.array([s.front.g - 0.01, 0.0, s.front.h + 0.01])
    u, v = sample_solution(s, x)
    assert u[0] == 0.0 and u[2] == 0.0 and u[1] > 0
    assert np.all(v > 0)
    with pytest.raises(OutOfDomain):
        sample_solution(s, np.array([SMALL.L + 1.0]))


def test_cutoff_frame_refuses_large_motion(weak):
    disc = Discretization(n_u=101, n_v=201, L=10.0, dt=1e-3, t_end=1.0)
    with pytest.raises(TransformOutOfRange):
        integrate(weak, _ini(weak, amp=1.0), disc, "cutoff")


def test_narrow_window_warns(weak):
    disc = Discretization(n_u=51, n_v=51, L=2.5, dt=1e-3, t_end=0.5)
    with pytest.warns(RuntimeWarning):
        traj = integrate(weak, _ini(weak, amp=2.0, v=0.1), disc, strict_width=False)
    assert traj.warnings
