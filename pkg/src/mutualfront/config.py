"""Experiment configuration files.

A config is a TOML document. Every table and key is optional except
``schema_version``; omitted values take the defaults below.

.. code-block:: toml

    schema_version = 1
    mode = "run"          # run | compare | certify-fast | sweep | convergence
    frame = "affine"      # affine | cutoff
    seed = 0              # drives [initial.perturb]

    [params]              # d1 d2 a1 a2 b1 b2 c1 c2 mu b tau1 tau2
    a1 = 1.0

    [initial]
    u0 = { kind = "cosine", amplitude = 0.5 }
    v0 = { kind = "constant", value = 0.5 }
    perturb = { modes = 4, strength = 0.3 }   # optional, u0 must be a cosine

    [disc]                # n_u n_v L dt t_end blowup_threshold cfl_safety output_interval max_retries
    [classifier]          # tail_fraction velocity_tol r2_min spread_factor fit_fraction
    [output]
    dir = "out"
    [compare]             # second run, must start above the first
    upper = { u0 = { kind = "cosine", amplitude = 0.8 }, v0 = { kind = "constant", value = 0.6 } }
    tol = 1e-6
    [certify]
    k = 2.0
    override = false      # allow a certificate outside strong mutualism
    u0_fraction = 0.5     # u0 = u0_fraction * delta * cos(pi x / 2b) unless [initial] sets u0
    v0_fraction = 0.5     # v0 = v0_fraction * k a2 / c2 unless [initial] sets v0
    tol = 1e-8
    [sweep]
    axes = [ { name = "a1", min = 1.0, max = 8.0, count = 8 } ]
    [convergence]
    levels = 4
    space_n_u = 51        # coarsest grids of the spatial study (dt from [disc])
    space_n_v = 201
    time_dt = 4e-3        # coarsest step of the temporal study (grids from [disc])

Sweep axis names are `ModelParams` fields or ``u0.amplitude``, ``v0.value``.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import tomli

from .analysis import ClassifierConfig, InadmissibleRate, WrongParameter, fast_supersolution
from .model import (
    InitialData,
    ModelError,
    ModelParams,
    Mutualism,
    make_initial_data,
    random_modulation,
    regime_discriminant,
    validate_params,
)
from .solver import ConfigError, Discretization

__all__ = [
    "CONFIG_SCHEMA_VERSION",
    "MODES",
    "ParseError",
    "SchemaVersionMismatch",
    "ValidationError",
    "SweepAxis",
    "CertifySettings",
    "ConvergenceSettings",
    "ExperimentConfig",
    "parse_config",
    "read_config_file",
    "config_from_dict",
    "DEFAULT_PARAMS",
]

CONFIG_SCHEMA_VERSION = 1
MODES = ("run", "compare", "certify-fast", "sweep", "convergence")
PROFILE_AXES = ("u0.amplitude", "v0.value")

DEFAULT_PARAMS = ModelParams(d1=1.0, d2=1.0, a1=1.0, a2=1.0, b1=2.0, b2=1.0,
                             c1=1.0, c2=2.0, mu=1.0, b=1.0)


class ParseError(ValueError):
    """Malformed TOML or an unknown key; ``key`` names the offending entry."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class SchemaVersionMismatch(ValueError):
    pass


class ValidationError(ValueError):
    pass


@dataclass(frozen=True)
class SweepAxis:
    name: str
    min: float
    max: float
    count: int

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.min])
        return np.linspace(self.min, self.max, self.count)


@dataclass(frozen=True)
class CertifySettings:
    k: float = 2.0
    override: bool = False
    u0_fraction: float = 0.5
    v0_fraction: float = 0.5
    tol: float = 1e-8


@dataclass(frozen=True)
class ConvergenceSettings:
    levels: int = 4
    space_n_u: int = 51
    space_n_v: int = 201
    time_dt: float = 4e-3


@dataclass(frozen=True)
class ExperimentConfig:
    params: ModelParams
    initial: dict
    disc: Discretization
    mode: str = "run"
    frame: str = "affine"
    seed: int = 0
    output_dir: str = "out"
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    compare_upper: dict | None = None
    compare_tol: float = 1e-6
    certify: CertifySettings = field(default_factory=CertifySettings)
    sweep_axes: tuple[SweepAxis, ...] = ()
    convergence: ConvergenceSettings = field(default_factory=ConvergenceSettings)

    def initial_data(self, spec: dict | None = None) -> InitialData:
        """Initial data for ``spec`` (default: the ``[initial]`` table)."""
        return make_initial_data(self.resolved_initial(spec), self.params, extent=self.disc.L)

    def resolved_initial(self, spec: dict | None = None) -> dict:
        """Profile spec with the seeded perturbation applied."""
        spec = dict(self.initial if spec is None else spec)
        perturb = spec.pop("perturb", None)
        if perturb:
            u0 = dict(spec.get("u0", {"kind": "cosine", "amplitude": 1.0}))
            if u0.get("kind") != "cosine":
                raise ValidationError("initial.perturb needs a cosine u0")
            rng = np.random.default_rng(self.seed)
            coeffs = random_modulation(rng, int(perturb.get("modes", 4)), float(perturb.get("strength", 0.3)))
            spec["u0"] = {"kind": "modulated_cosine", "amplitude": float(u0.get("amplitude", 1.0)),
                          "coefficients": list(coeffs)}
        return spec

    def replace(self, **changes: Any) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


# ---------------------------------------------------------------------------
# parsing

_TOP = {"schema_version", "mode", "frame", "seed", "params", "initial", "disc", "classifier",
        "output", "compare", "certify", "sweep", "convergence"}
_PARAM_KEYS = {f.name for f in dataclasses.fields(ModelParams)}
_DISC_KEYS = {f.name for f in dataclasses.fields(Discretization)}
_CLASSIFIER_KEYS = {f.name for f in dataclasses.fields(ClassifierConfig)}
_CERTIFY_KEYS = {f.name for f in dataclasses.fields(CertifySettings)}
_CONV_KEYS = {f.name for f in dataclasses.fields(ConvergenceSettings)}
_INITIAL_KEYS = {"u0", "v0", "perturb"}
_PERTURB_KEYS = {"modes", "strength"}
_AXIS_KEYS = {"name", "min", "max", "count"}


def _table(raw: Mapping, key: str, prefix: str = "") -> dict:
    val = raw.get(key, {})
    if not isinstance(val, Mapping):
        raise ParseError(f"{prefix}{key} must be a table", key=f"{prefix}{key}")
    return dict(val)


def _reject_unknown(table: Mapping, allowed: set, prefix: str) -> None:
    for key in table:
        if key not in allowed:
            full = f"{prefix}{key}"
            raise ParseError(f"unknown key {full!r}", key=full)


def _number(table: Mapping, key: str, prefix: str, kind=float):
    val = table[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ValidationError(f"{prefix}{key} must be a number, got {val!r}")
    if kind is int:
        if isinstance(val, float) and not val.is_integer():
            raise ValidationError(f"{prefix}{key} must be an integer, got {val!r}")
        return int(val)
    return float(val)


def _numbers(table: Mapping, allowed_int: set, prefix: str) -> dict:
    out = {}
    for key, val in table.items():
        if val is None:
            out[key] = None
            continue
        out[key] = _number(table, key, prefix, int if key in allowed_int else float)
    return out


def read_config_file(path) -> dict:
    """Parse the TOML of ``path`` without validating it."""
    path = Path(path)
    text = path.read_text()
    try:
        return tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None


def parse_config(path) -> ExperimentConfig:
    """Read and validate a TOML experiment config."""
    return config_from_dict(read_config_file(path))


def config_from_dict(raw: Mapping[str, Any]) -> ExperimentConfig:
    """Validate an already-parsed config mapping (see module docstring for the schema)."""
    _reject_unknown(raw, _TOP, "")
    if "schema_version" not in raw:
        raise SchemaVersionMismatch(f"missing schema_version (expected {CONFIG_SCHEMA_VERSION})")
    if raw["schema_version"] != CONFIG_SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            f"schema_version {raw['schema_version']!r} is not supported (expected {CONFIG_SCHEMA_VERSION})")

    mode = raw.get("mode", "run")
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {MODES}, got {mode!r}")
    frame = raw.get("frame", "affine")
    if frame not in ("affine", "cutoff"):
        raise ValidationError(f"frame must be 'affine' or 'cutoff', got {frame!r}")
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ValidationError("seed must be a nonnegative integer")

    ptab = _table(raw, "params")
    _reject_unknown(ptab, _PARAM_KEYS, "params.")
    try:
        params = validate_params(DEFAULT_PARAMS.replace(**_numbers(ptab, set(), "params.")))
    except ModelError as exc:
        raise ValidationError(f"params: {exc}") from None

    itab = _table(raw, "initial")
    _reject_unknown(itab, _INITIAL_KEYS, "initial.")
    if "perturb" in itab:
        pt = _table(itab, "perturb", "initial.")
        _reject_unknown(pt, _PERTURB_KEYS, "initial.perturb.")

    dtab = _table(raw, "disc")
    _reject_unknown(dtab, _DISC_KEYS, "disc.")
    disc = Discretization(**_numbers(dtab, {"n_u", "n_v", "max_retries"}, "disc."))

    ctab = _table(raw, "classifier")
    _reject_unknown(ctab, _CLASSIFIER_KEYS, "classifier.")
    classifier = ClassifierConfig(**_numbers(ctab, set(), "classifier."))

    otab = _table(raw, "output")
    _reject_unknown(otab, {"dir"}, "output.")
    output_dir = str(otab.get("dir", "out"))

    cmp_tab = _table(raw, "compare")
    _reject_unknown(cmp_tab, {"upper", "tol"}, "compare.")
    upper = cmp_tab.get("upper")
    if upper is not None:
        upper = dict(upper)
        _reject_unknown(upper, {"u0", "v0"}, "compare.upper.")
    compare_tol = float(cmp_tab.get("tol", 1e-6))

    cert_tab = _table(raw, "certify")
    _reject_unknown(cert_tab, _CERTIFY_KEYS, "certify.")
    override = cert_tab.pop("override", False)
    if not isinstance(override, bool):
        raise ValidationError("certify.override must be true or false")
    certify = CertifySettings(override=override, **_numbers(cert_tab, set(), "certify."))

    sw_tab = _table(raw, "sweep")
    _reject_unknown(sw_tab, {"axes"}, "sweep.")
    axes = []
    for i, ax in enumerate(sw_tab.get("axes", [])):
        ax = dict(ax)
        _reject_unknown(ax, _AXIS_KEYS, f"sweep.axes[{i}].")
        missing = _AXIS_KEYS - set(ax)
        if missing:
            raise ValidationError(f"sweep.axes[{i}] is missing {sorted(missing)}")
        if ax["name"] not in _PARAM_KEYS and ax["name"] not in PROFILE_AXES:
            raise ValidationError(f"sweep axis {ax['name']!r} is not a model parameter or profile axis")
        axis = SweepAxis(str(ax["name"]), _number(ax, "min", "sweep."), _number(ax, "max", "sweep."),
                         _number(ax, "count", "sweep.", int))
        if axis.count < 1 or axis.max < axis.min:
            raise ValidationError(f"sweep axis {axis.name!r} needs count >= 1 and min <= max")
        axes.append(axis)

    cv_tab = _table(raw, "convergence")
    _reject_unknown(cv_tab, _CONV_KEYS, "convergence.")
    convergence = ConvergenceSettings(**_numbers(cv_tab, {"levels", "space_n_u", "space_n_v"}, "convergence."))

    cfg = ExperimentConfig(params=params, initial=itab, disc=disc, mode=mode, frame=frame, seed=seed,
                           output_dir=output_dir, classifier=classifier, compare_upper=upper,
                           compare_tol=compare_tol, certify=certify, sweep_axes=tuple(axes),
                           convergence=convergence)
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    p = cfg.params
    try:
        cfg.disc.check(p)
    except ConfigError as exc:
        raise ValidationError(f"disc: {exc}") from None
    try:
        if cfg.mode != "certify-fast":
            cfg.initial_data()
        if cfg.mode == "compare":
            if cfg.compare_upper is None:
                raise ValidationError("mode 'compare' needs a [compare] upper profile")
            cfg.initial_data(cfg.compare_upper)
    except ModelError as exc:
        raise ValidationError(f"initial: {exc}") from None

    if cfg.mode == "sweep" and not 1 <= len(cfg.sweep_axes) <= 2:
        raise ValidationError("mode 'sweep' needs one or two axes")

    if cfg.mode == "convergence":
        cv = cfg.convergence
        if cv.levels < 3:
            raise ValidationError("convergence needs at least 3 levels")
        if cv.space_n_u < 5 or cv.space_n_v < 5 or not cv.time_dt > 0:
            raise ValidationError("convergence grids need >= 5 nodes and a positive time_dt")
        if cfg.frame != "affine":
            raise ValidationError("convergence compares nested affine grids; use frame = 'affine'")

    if cfg.mode == "certify-fast":
        label = regime_discriminant(p).label
        if label is not Mutualism.STRONG and not cfg.certify.override:
            raise ValidationError(
                f"certify-fast needs strong mutualism (b1 c2 < b2 c1), got {label.value}; "
                "set certify.override = true to run the check anyway")
        try:
            spec = fast_supersolution(p, cfg.certify.k)
        except (WrongParameter, InadmissibleRate) as exc:
            raise ValidationError(f"certify: {exc}") from None
        if not spec.admissible and not cfg.certify.override:
            raise ValidationError(f"certify-fast needs b <= b0 = {spec.b0!r}, got b = {p.b!r}")
        for key in ("u0_fraction", "v0_fraction"):
            val = getattr(cfg.certify, key)
            if not 0 < val <= 1 and not cfg.certify.override:
                raise ValidationError(f"certify.{key} must lie in (0, 1]")
