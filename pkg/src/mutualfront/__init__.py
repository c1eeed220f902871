"""Simulation of a delayed mutualistic reaction-diffusion system with two Stefan fronts."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    InitialData,
    ModelParams,
    Mutualism,
    make_initial_data,
    regime_discriminant,
    spreading_threshold,
    validate_params,
)
from .solver import Discretization, Trajectory, integrate, run, sample_solution  # noqa: E402
from .analysis import (  # noqa: E402
    Regime,
    bounds_K,
    check_supersolution_dominates,
    classify_regime,
    compare_trajectories,
    decay_fit,
    fast_supersolution,
    first_eigenvalue_shifted,
)

__all__ = [
    "InitialData",
    "ModelParams",
    "Mutualism",
    "make_initial_data",
    "regime_discriminant",
    "spreading_threshold",
    "validate_params",
    "Discretization",
    "Trajectory",
    "integrate",
    "run",
    "sample_solution",
    "Regime",
    "bounds_K",
    "check_supersolution_dominates",
    "classify_regime",
    "compare_trajectories",
    "decay_fit",
    "fast_supersolution",
    "first_eigenvalue_shifted",
]
