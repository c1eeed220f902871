"""Strong mutualism with large growth rates: watch the solution blow up.

Compares the blowup time for a few initial amplitudes and delays.
"""
import warnings

from mutualfront import Discretization, ModelParams, classify_regime, integrate, make_initial_data
from mutualfront.model import spreading_threshold

params = ModelParams(d1=1, d2=1, a1=1, a2=1, b1=1, b2=2, c1=2, c2=1, mu=1, b=1)
thr = spreading_threshold(params)
params = params.replace(a1=2 * thr, a2=2 * thr)
disc = Discretization(n_u=201, n_v=801, L=20.0, dt=1e-3, t_end=10.0)
warnings.simplefilter("ignore", RuntimeWarning)
print(f"{'amplitude':>9} {'tau':>5} {'t_blow':>8}")
for amp in (0.5, 1.0, 5.0):
    for tau in (0.0, 0.2):
        p = params.replace(tau1=tau, tau2=tau)
        ini = make_initial_data({"u0": {"kind": "cosine", "amplitude": amp},
                                 "v0": {"kind": "constant", "value": amp}}, p)
        rep = classify_regime(integrate(p, ini, disc), p, disc)
        t_blow = f"{rep.t_blow:.4f}" if rep.t_blow is not None else "-"
        print(f"{amp:>9.1f} {tau:>5.1f} {t_blow:>8}  {rep.classification.value}")
