"""Check a simulated solution against the fast-decay supersolution envelope.

Prints the envelope constants, then how close u and the fronts came to the
envelope over the run.
"""
import warnings

from mutualfront import Discretization, ModelParams, check_supersolution_dominates, integrate, make_initial_data
from mutualfront.analysis import fast_supersolution

base = ModelParams(d1=1, d2=1, a1=1, a2=1, b1=1, b2=2, c1=1, c2=1, mu=1, b=1)
b0 = fast_supersolution(base).b0
params = base.replace(b=b0 / 2)
spec = fast_supersolution(params)
print(f"b0 = {spec.b0:.6f}  beta = {spec.beta:.4f}  delta = {spec.delta:.5f}  admissible = {spec.admissible}")

initial = make_initial_data({"u0": {"kind": "cosine", "amplitude": 0.5 * spec.delta},
                             "v0": {"kind": "constant", "value": 0.5 * spec.v_bar}}, params)
disc = Discretization(n_u=201, n_v=801, L=8.0, dt=1e-4, t_end=2.0, output_interval=0.05)
warnings.simplefilter("ignore", RuntimeWarning)
traj = integrate(params, initial, disc)
rep = check_supersolution_dominates(traj, spec, params)
print(f"violations: {rep.violations} of {rep.steps_checked} checks")
print(f"smallest front margin: {rep.min_front_margin:.4g}")
print(f"h(T) = {traj.h[-1]:.5f}, envelope limit 2bk = {spec.sigma_limit:.5f}")
