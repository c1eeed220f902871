import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mutualfront.model import (
    CosineBump,
    InvalidProfile,
    ModelParams,
    ModulatedCosine,
    Mutualism,
    NegativeDelay,
    NonPositiveCoefficient,
    make_initial_data,
    random_modulation,
    regime_discriminant,
    spreading_threshold,
    validate_params,
)


def test_threshold_frozen_value(weak):
    # d (pi / 2b)^2 at d = b = 1
    assert spreading_threshold(weak) == pytest.approx(2.4674011002723395, rel=1e-15)
    p = weak.replace(d2=3.0, b=2.0)
    assert spreading_threshold(p, 2) == pytest.approx(3.0 * (math.pi / 4) ** 2, rel=1e-15)
    with pytest.raises(ValueError):
        spreading_threshold(weak, 3)


@pytest.mark.parametrize("name", ["d1", "d2", "b1", "b2", "c1", "c2", "mu", "b"])
def test_nonpositive_coefficient_names_field(weak, name):
    with pytest.raises(NonPositiveCoefficient) as exc:
        validate_params(weak.replace(**{name: 0.0}))
    assert exc.value.field == name


def test_negative_delay_rejected(weak):
    with pytest.raises(NegativeDelay):
        validate_params(weak.replace(tau2=-0.1))


def test_growth_rates_may_be_negative(weak):
    p = validate_params(weak.replace(a1=-2.0, a2=-1.0))
    assert p.a1 == -2.0


def test_regime_labels(weak, strong):
    assert regime_discriminant(weak).label is Mutualism.WEAK
    assert regime_discriminant(weak).value == 3.0
    assert regime_discriminant(strong).label is Mutualism.STRONG
    crit = weak.replace(b1=1.0, c2=1.0)
    assert regime_discriminant(crit).label is Mutualism.CRITICAL


def test_params_dict_round_trip(weak):
    assert ModelParams.from_dict(weak.to_dict()) == weak
    with pytest.raises((TypeError, ValueError)):
        ModelParams.from_dict({**weak.to_dict(), "d3": 1.0})


def test_cosine_endpoints_exact():
    prof = CosineBump(2.0, 1.5)
    assert prof(np.array([-1.5, 1.5])).tolist() == [0.0, 0.0]
    assert prof(0.0) == 2.0
    assert prof(np.array([2.0, -7.0])).tolist() == [0.0, 0.0]


def test_default_v0_is_logistic_level(weak):
    ini = make_initial_data({"u0": {"kind": "cosine", "amplitude": 0.3}}, weak)
    assert ini.v_far == 0.5
    ini = make_initial_data({"u0": {"kind": "cosine", "amplitude": 0.3}}, weak.replace(a2=-1.0))
    assert ini.v_far == 0.0


@pytest.mark.parametrize("spec", [
    {"u0": {"kind": "constant", "value": 1.0}},
    {"u0": {"kind": "cosine", "amplitude": -1.0}},
    {"u0": {"kind": "cosine"}, "v0": {"kind": "constant", "value": -0.1}},
    {"u0": {"kind": "spline"}},
    {"u0": {"kind": "cosine", "amplitude": 1.0, "phase": 0.2}},
    {"u0": {"kind": "skewed_cosine", "amplitude": 1.0, "skew": 1.5}},
    {"v0": {"kind": "gaussian", "base": 1.0}},
])
def test_invalid_profiles(weak, spec):
    with pytest.raises(InvalidProfile):
        make_initial_data(spec, weak)


def test_tabulated_profile(weak):
    x = np.linspace(-1, 1, 21)
    ini = make_initial_data({"u0": {"kind": "tabulated", "x": x.tolist(), "y": (1 - x**2).tolist()},
                             "v0": {"kind": "tabulated", "x": [-3.0, 3.0], "y": [0.2, 0.4]}}, weak)
    assert ini.u0(np.array([0.25]))[0] == pytest.approx(1 - 0.0625, abs=1e-3)
    assert ini.u0(np.array([1.2]))[0] == 0.0
    assert ini.v0(np.array([10.0]))[0] == 0.4


def test_random_modulation_seeded():
    a = random_modulation(np.random.default_rng(7), 5, 0.4)
    b = random_modulation(np.random.default_rng(7), 5, 0.4)
    assert a == b
    assert sum(abs(c) for c in a) == pytest.approx(0.4)
    with pytest.raises(InvalidProfile):
        random_modulation(np.random.default_rng(0), 3, 1.0)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10_000), modes=st.integers(1, 8), strength=st.floats(0.0, 0.95))
def test_modulated_cosine_is_admissible_u0(seed, modes, strength):
    coeffs = random_modulation(np.random.default_rng(seed), modes, strength)
    prof = ModulatedCosine(1.0, 1.0, coeffs)
    x = np.linspace(-1, 1, 401)
    y = prof(x)
    assert y[0] == 0.0 and y[-1] == 0.0
    assert np.all(y[1:-1] > 0)
