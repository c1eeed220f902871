"""Scan the growth rate a1 across the spreading threshold.

Below the threshold a small population stays inside a bounded habitat and
dies out; above it the fronts keep moving. Run with ``python3 demos/vanishing_vs_spreading.py``.
"""
import warnings

from mutualfront import Discretization, ModelParams, classify_regime, integrate, make_initial_data
from mutualfront.model import spreading_threshold

params = ModelParams(d1=1, d2=1, a1=1, a2=1, b1=2, b2=1, c1=1, c2=2, mu=1, b=1)
threshold = spreading_threshold(params)
disc = Discretization(n_u=201, n_v=801, L=40.0, dt=2e-3, t_end=10.0)
initial = {"u0": {"kind": "cosine", "amplitude": 0.05}, "v0": {"kind": "constant", "value": 0.05}}

print(f"threshold for a1: {threshold:.4f}")
print(f"{'a1/threshold':>12} {'class':>14} {'h(T)':>8} {'max u(T)':>10}")
warnings.simplefilter("ignore", RuntimeWarning)
for ratio in (0.1, 0.5, 1.5, 2.0, 3.0):
    p = params.replace(a1=ratio * threshold)
    traj = integrate(p, make_initial_data(initial, p), disc)
    rep = classify_regime(traj, p, disc)
    print(f"{ratio:>12.2f} {rep.classification.value:>14} {traj.h[-1]:>8.3f} {traj.max_u[-1]:>10.3g}")
