"""Named experiment setups, expressed as config mappings.

``weak-bounds``   weak mutualism with data under the a-priori bounds at m = 1.05
``spreading``     weak mutualism, a1 twice the spreading threshold: slow spreading
``blowup``        strong mutualism, both a_i twice their thresholds: blowup
``fast-decay``    strong mutualism on a habitat of half the critical width b0 with
                  small data: fast solution, checked against the supersolution
``convergence``   smooth weak-mutualism problem for the self-convergence study
"""
from __future__ import annotations

import copy
import math

from .analysis import fast_supersolution
from .config import CONFIG_SCHEMA_VERSION, ExperimentConfig, config_from_dict
from .model import ModelParams

__all__ = ["PRESETS", "preset_dict", "load_preset"]

_Q = (0.5 * math.pi) ** 2  # d (pi / 2b)^2 with d = b = 1

_WEAK = {"d1": 1.0, "d2": 1.0, "a1": 1.0, "a2": 1.0, "b1": 2.0, "b2": 1.0, "c1": 1.0, "c2": 2.0,
         "mu": 1.0, "b": 1.0}
_STRONG = {"d1": 1.0, "d2": 1.0, "b1": 1.0, "b2": 2.0, "c1": 2.0, "c2": 1.0, "mu": 1.0, "b": 1.0,
           "a1": 2.0 * _Q, "a2": 2.0 * _Q}


def _fast_decay_params() -> dict:
    p = {"d1": 1.0, "d2": 1.0, "a1": 1.0, "a2": 1.0, "b1": 1.0, "b2": 2.0, "c1": 1.0, "c2": 1.0,
         "mu": 1.0, "b": 1.0}
    b0 = fast_supersolution(ModelParams(**p), 2.0).b0
    p["b"] = 0.5 * b0
    return p


def _presets() -> dict[str, dict]:
    return {
        "weak-bounds": {
            "mode": "run",
            "params": dict(_WEAK),
            "initial": {"u0": {"kind": "cosine", "amplitude": 1.0},
                        "v0": {"kind": "constant", "value": 1.0}},
            "disc": {"n_u": 401, "n_v": 401, "L": 14.0, "dt": 1e-4, "t_end": 5.0},
        },
        "spreading": {
            "mode": "run",
            "params": dict(_WEAK, a1=2.0 * _Q),
            "initial": {"u0": {"kind": "cosine", "amplitude": 0.5},
                        "v0": {"kind": "constant", "value": 0.5}},
            "disc": {"n_u": 401, "n_v": 801, "L": 60.0, "dt": 1e-3, "t_end": 10.0},
        },
        "blowup": {
            "mode": "run",
            "params": dict(_STRONG),
            "initial": {"u0": {"kind": "cosine", "amplitude": 1.0},
                        "v0": {"kind": "constant", "value": 1.0}},
            "disc": {"n_u": 401, "n_v": 401, "L": 20.0, "dt": 1e-4, "t_end": 10.0},
        },
        "fast-decay": {
            "mode": "certify-fast",
            "params": _fast_decay_params(),
            "certify": {"k": 2.0, "u0_fraction": 0.5, "v0_fraction": 0.5},
            "disc": {"n_u": 401, "n_v": 401, "L": 12.0, "dt": 1e-4, "t_end": 5.0,
                     "output_interval": 0.05},
        },
        "convergence": {
            "mode": "convergence",
            "params": dict(_WEAK),
            "initial": {"u0": {"kind": "cosine", "amplitude": 0.5},
                        "v0": {"kind": "constant", "value": 0.5}},
            "disc": {"n_u": 101, "n_v": 401, "L": 8.0, "dt": 1e-4, "t_end": 0.5},
            "convergence": {"levels": 4, "space_n_u": 51, "space_n_v": 201, "time_dt": 4e-3},
        },
    }


PRESETS = tuple(_presets())


def preset_dict(name: str) -> dict:
    """Raw config mapping for a preset, ready to edit and pass to `config_from_dict`."""
    presets = _presets()
    if name not in presets:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(presets)}")
    raw = copy.deepcopy(presets[name])
    raw["schema_version"] = CONFIG_SCHEMA_VERSION
    return raw


def load_preset(name: str) -> ExperimentConfig:
    return config_from_dict(preset_dict(name))
