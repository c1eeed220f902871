import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from mutualfront.tridiag import implicit_update, solve_tridiagonal


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 40), seed=st.integers(0, 2**31 - 1))
def test_solver_matches_dense(n, seed):
    rng = np.random.default_rng(seed)
    lower = rng.uniform(-1, 1, n - 1)
    upper = rng.uniform(-1, 1, n - 1)
    diag = 2.5 + rng.uniform(0, 1, n)
    rhs = rng.normal(size=n)
    dense = np.diag(diag) + np.diag(lower, -1) + np.diag(upper, 1)
    assert np.allclose(solve_tridiagonal(lower, diag, upper, rhs), np.linalg.solve(dense, rhs))


def test_singular_system_raises():
    with pytest.raises(np.linalg.LinAlgError):
        solve_tridiagonal(np.zeros(2), np.zeros(3), np.zeros(2), np.ones(3))


@settings(max_examples=40, deadline=None)
@given(u=arrays(float, st.integers(5, 60), elements=st.floats(0, 10)),
       dt=st.floats(1e-4, 1.0), D=st.floats(0.01, 5.0))
def test_dirichlet_flux_identity(u, dt, D):
    # summing the interior equations telescopes to the two boundary fluxes
    u = u.copy()
    u[0] = u[-1] = 0.0
    dz = 1.0 / (u.size - 1)
    new = implicit_update(u, dt, dz, D, 0.0, 0.0, 0.0, "dirichlet")
    lhs = np.sum(new[1:-1] - u[1:-1])
    rhs = -dt * D / dz**2 * (new[1] + new[-2])
    assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + np.sum(np.abs(u))))
    assert new[0] == 0.0 and new[-1] == 0.0
    assert np.all(new >= -1e-12)


@settings(max_examples=40, deadline=None)
@given(u=arrays(float, st.integers(5, 60), elements=st.floats(0, 10)),
       dt=st.floats(1e-4, 1.0), D=st.floats(0.01, 5.0))
def test_neumann_conserves_trapezoid_mass(u, dt, D):
    dz = 0.1
    new = implicit_update(u, dt, dz, D, 0.0, 0.0, 0.0, "neumann")
    w = np.ones(u.size)
    w[0] = w[-1] = 0.5
    assert np.dot(w, new) == pytest.approx(np.dot(w, u), rel=1e-10, abs=1e-10)


def test_neumann_keeps_constants_and_loss_is_implicit():
    u = np.full(9, 3.0)
    assert np.allclose(implicit_update(u, 0.5, 0.1, 2.0, 0.0, 0.0, 0.0, "neumann"), 3.0)
    out = implicit_update(u, 0.5, 0.1, 2.0, 0.0, 4.0, 0.0, "neumann")
    assert np.allclose(out, 3.0 / (1 + 0.5 * 4.0))


def test_drift_with_neumann_rejected():
    with pytest.raises(ValueError):
        implicit_update(np.ones(5), 0.1, 0.1, 1.0, 1.0, 0.0, 0.0, "neumann")
    with pytest.raises(ValueError):
        implicit_update(np.ones(5), 0.1, 0.1, 1.0, 0.0, 0.0, 0.0, "periodic")


def test_drift_convergence_to_exact_mode():
    # w_t = w_zz + c w_z on (0, pi) with w = e^{-cz/2} sin z decays at rate 1 + c^2/4
    c = 0.8
    n = 801
    z = np.linspace(0, np.pi, n)
    w0 = np.exp(-c * z / 2) * np.sin(z)
    w = w0.copy()
    dt, steps = 1e-4, 1000
    for _ in range(steps):
        w = implicit_update(w, dt, z[1] - z[0], 1.0, c, 0.0, 0.0, "dirichlet")
    exact = w0 * np.exp(-(1 + c * c / 4) * dt * steps)
    assert np.max(np.abs(w - exact)) < 2e-4
