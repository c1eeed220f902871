"""Model parameters, initial profiles and the analytic regime discriminants.

The system evolves an invasive species ``u`` on a moving habitat ``[g(t), h(t)]``
and a native species ``v`` on the whole line, coupled through delayed
cooperative terms::

    u_t = d1 u_xx + u (a1 - b1 u + c1 v(t - tau1, x))
    v_t = d2 v_xx + v (a2 + b2 u(t - tau2, x) - c2 v)

with Stefan fronts ``h' = -mu u_x(h)`` and ``g' = -mu u_x(g)``.
"""
from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np
from scipy.interpolate import PchipInterpolator

__all__ = [
    "ModelError",
    "NonPositiveCoefficient",
    "NegativeDelay",
    "InvalidProfile",
    "ModelParams",
    "ValidatedParams",
    "validate_params",
    "Mutualism",
    "RegimeDiscriminant",
    "regime_discriminant",
    "spreading_threshold",
    "CosineBump",
    "SkewedCosine",
    "ModulatedCosine",
    "random_modulation",
    "ConstantProfile",
    "GaussianPerturbed",
    "Tabulated",
    "InitialData",
    "make_initial_data",
    "profile_from_spec",
]


class ModelError(ValueError):
    """Base class for invalid model input."""


class NonPositiveCoefficient(ModelError):
    def __init__(self, name: str, value: float):
        super().__init__(f"coefficient {name!r} must be strictly positive, got {value!r}")
        self.field = name
        self.value = value


class NegativeDelay(ModelError):
    def __init__(self, name: str, value: float):
        super().__init__(f"delay {name!r} must be nonnegative, got {value!r}")
        self.field = name
        self.value = value


class InvalidProfile(ModelError):
    pass


_POSITIVE = ("d1", "d2", "b1", "b2", "c1", "c2", "mu", "b")
_DELAYS = ("tau1", "tau2")


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the delayed mutualistic free-boundary system.

    ``b1`` and ``c2`` are intra-specific competition coefficients, ``b2`` and
    ``c1`` inter-specific cooperation. ``b`` is the initial half-length of
    the ``u``-habitat, so ``-g(0) = h(0) = b``.
    """

    d1: float
    d2: float
    a1: float
    a2: float
    b1: float
    b2: float
    c1: float
    c2: float
    mu: float
    b: float
    tau1: float = 0.0
    tau2: float = 0.0

    def replace(self, **changes: float) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, float]:
        return {f.name: float(getattr(self, f.name)) for f in dataclasses.fields(ModelParams)}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ModelParams":
        names = {f.name for f in dataclasses.fields(ModelParams)}
        unknown = set(data) - names
        if unknown:
            raise ModelError(f"unknown parameter(s): {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})


@dataclass(frozen=True)
class ValidatedParams(ModelParams):
    """`ModelParams` whose positivity and delay constraints have been checked."""

    def __post_init__(self):
        for name in _POSITIVE:
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise NonPositiveCoefficient(name, value)
        for name in ("a1", "a2"):
            if not math.isfinite(getattr(self, name)):
                raise ModelError(f"{name} must be finite")
        for name in _DELAYS:
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise NegativeDelay(name, value)

    def replace(self, **changes: float) -> "ValidatedParams":
        return dataclasses.replace(self, **changes)


def validate_params(params: ModelParams) -> ValidatedParams:
    """Check the positivity constraints and return the validated wrapper.

    Raises `NonPositiveCoefficient` naming the offending field, or
    `NegativeDelay`.
    """
    if isinstance(params, ValidatedParams):
        return params
    return ValidatedParams(**params.to_dict())


class Mutualism(str, enum.Enum):
    WEAK = "WeakMutualism"
    STRONG = "StrongMutualism"
    CRITICAL = "Critical"


@dataclass(frozen=True)
class RegimeDiscriminant:
    value: float
    label: Mutualism


def regime_discriminant(params: ModelParams) -> RegimeDiscriminant:
    """Sign of ``b1*c2 - b2*c1``: self-limitation versus cooperation."""
    p = validate_params(params)
    value = p.b1 * p.c2 - p.b2 * p.c1
    if value > 0:
        label = Mutualism.WEAK
    elif value < 0:
        label = Mutualism.STRONG
    else:
        label = Mutualism.CRITICAL
    return RegimeDiscriminant(value, label)


def spreading_threshold(params: ModelParams, species: int = 1) -> float:
    """Principal Dirichlet eigenvalue ``d_i (pi / 2b)^2`` of the initial habitat.

    ``species=1`` gives the threshold on ``a1`` for unbounded spreading;
    ``species=2`` the matching threshold on ``a2`` used by the blowup test.
    """
    p = validate_params(params)
    if species not in (1, 2):
        raise ValueError("species must be 1 or 2")
    d = p.d1 if species == 1 else p.d2
    return d * (math.pi / (2.0 * p.b)) ** 2


# ---------------------------------------------------------------------------
# profiles


@dataclass(frozen=True)
class CosineBump:
    """``amplitude * cos(pi x / 2 half_width)`` on ``[-half_width, half_width]``, 0 outside."""

    amplitude: float
    half_width: float

    kind = "cosine"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = np.abs(x) <= self.half_width
        # cos(pi/2) is not exactly zero in floating point
        out = np.where(inside, self.amplitude * np.cos(0.5 * np.pi * x / self.half_width), 0.0)
        out = np.where(np.abs(x) == self.half_width, 0.0, out)
        return out

    def to_spec(self) -> dict:
        return {"kind": self.kind, "amplitude": self.amplitude}


@dataclass(frozen=True)
class SkewedCosine:
    """Asymmetric bump ``A cos(pi x/2w) (1 + skew sin(pi x/2w))``; needs ``|skew| < 1``."""

    amplitude: float
    half_width: float
    skew: float

    kind = "skewed_cosine"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        s = 0.5 * np.pi * x / self.half_width
        out = self.amplitude * np.cos(s) * (1.0 + self.skew * np.sin(s))
        out = np.where(np.abs(x) < self.half_width, out, 0.0)
        return out

    def to_spec(self) -> dict:
        return {"kind": self.kind, "amplitude": self.amplitude, "skew": self.skew}


@dataclass(frozen=True)
class ModulatedCosine:
    """Cosine bump times ``1 + sum_k c_k sin(k pi (x + w) / 2w)``.

    Positivity holds because ``sum |c_k| < 1`` is required. Used for seeded
    random perturbations of ``u0``.
    """

    amplitude: float
    half_width: float
    coefficients: tuple[float, ...]

    kind = "modulated_cosine"

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        if sum(abs(c) for c in coeffs) >= 1.0:
            raise InvalidProfile("modulation coefficients must satisfy sum |c_k| < 1")
        object.__setattr__(self, "coefficients", coeffs)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        w = self.half_width
        mod = np.ones_like(x)
        for k, c in enumerate(self.coefficients, start=1):
            mod = mod + c * np.sin(k * np.pi * (x + w) / (2.0 * w))
        out = self.amplitude * np.cos(0.5 * np.pi * x / w) * mod
        return np.where(np.abs(x) < w, out, 0.0)

    def to_spec(self) -> dict:
        return {"kind": self.kind, "amplitude": self.amplitude, "coefficients": list(self.coefficients)}


def random_modulation(rng: np.random.Generator, modes: int, strength: float) -> tuple[float, ...]:
    """Draw ``modes`` coefficients with ``sum |c_k| = strength`` (``0 <= strength < 1``)."""
    if not 0.0 <= strength < 1.0:
        raise InvalidProfile("perturbation strength must lie in [0, 1)")
    raw = rng.uniform(-1.0, 1.0, size=modes)
    total = float(np.sum(np.abs(raw)))
    if total == 0.0:
        return tuple(0.0 for _ in range(modes))
    return tuple((strength * raw / total).tolist())


@dataclass(frozen=True)
class ConstantProfile:
    value: float

    kind = "constant"

    def __call__(self, x):
        return np.full(np.shape(x), float(self.value))

    @property
    def far_field(self) -> float:
        return float(self.value)

    def to_spec(self) -> dict:
        return {"kind": self.kind, "value": self.value}


@dataclass(frozen=True)
class GaussianPerturbed:
    """Constant level plus a Gaussian bump; the far field is ``base``."""

    base: float
    amplitude: float
    center: float = 0.0
    width: float = 1.0

    kind = "gaussian"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.base + self.amplitude * np.exp(-0.5 * ((x - self.center) / self.width) ** 2)

    @property
    def far_field(self) -> float:
        return float(self.base)

    def to_spec(self) -> dict:
        return {"kind": self.kind, "base": self.base, "amplitude": self.amplitude,
                "center": self.center, "width": self.width}


@dataclass(frozen=True)
class Tabulated:
    """Monotone cubic (PCHIP) interpolant of tabulated samples.

    Outside the table the profile is 0 when ``zero_outside`` is set (used for
    ``u0``), otherwise it is held at the end value.
    """

    x: tuple[float, ...]
    y: tuple[float, ...]
    zero_outside: bool = False
    _interp: Any = field(init=False, repr=False, compare=False)

    kind = "tabulated"

    def __post_init__(self):
        xs = np.asarray(self.x, dtype=float)
        ys = np.asarray(self.y, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 2:
            raise InvalidProfile("tabulated profile needs matching 1-D x and y with >= 2 samples")
        if np.any(np.diff(xs) <= 0):
            raise InvalidProfile("tabulated x must be strictly increasing")
        object.__setattr__(self, "x", tuple(xs.tolist()))
        object.__setattr__(self, "y", tuple(ys.tolist()))
        object.__setattr__(self, "_interp", PchipInterpolator(xs, ys, extrapolate=False))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = self._interp(x)
        lo, hi = self.x[0], self.x[-1]
        if self.zero_outside:
            fill_lo = fill_hi = 0.0
        else:
            fill_lo, fill_hi = self.y[0], self.y[-1]
        out = np.where(x < lo, fill_lo, out)
        out = np.where(x > hi, fill_hi, out)
        return out

    @property
    def far_field(self) -> float:
        return float(0.5 * (self.y[0] + self.y[-1]))

    def to_spec(self) -> dict:
        return {"kind": self.kind, "x": list(self.x), "y": list(self.y)}


@dataclass(frozen=True)
class InitialData:
    """Initial profiles ``u0`` on ``[-b, b]`` and ``v0`` on the line.

    The history on ``[-tau, 0]`` is taken constant in time and equal to these
    profiles. ``v_far`` is the value ``v0`` takes beyond the computational
    window.
    """

    u0: Any
    v0: Any
    b: float
    v_far: float

    def to_spec(self) -> dict:
        return {"u0": self.u0.to_spec(), "v0": self.v0.to_spec()}


def profile_from_spec(spec: Mapping[str, Any], half_width: float, *, for_u: bool):
    spec = dict(spec)
    kind = spec.pop("kind", None)
    try:
        if kind == "cosine":
            prof = CosineBump(float(spec.pop("amplitude", 1.0)), half_width)
        elif kind == "skewed_cosine":
            prof = SkewedCosine(float(spec.pop("amplitude", 1.0)), half_width,
                                float(spec.pop("skew", 0.0)))
        elif kind == "modulated_cosine" and for_u:
            prof = ModulatedCosine(float(spec.pop("amplitude", 1.0)), half_width,
                                   tuple(spec.pop("coefficients")))
        elif kind == "constant":
            prof = ConstantProfile(float(spec.pop("value")))
        elif kind == "gaussian":
            prof = GaussianPerturbed(float(spec.pop("base")), float(spec.pop("amplitude")),
                                     float(spec.pop("center", 0.0)), float(spec.pop("width", 1.0)))
        elif kind == "tabulated":
            prof = Tabulated(tuple(spec.pop("x")), tuple(spec.pop("y")), zero_outside=for_u)
        else:
            raise InvalidProfile(f"unknown profile kind {kind!r}")
    except KeyError as exc:
        raise InvalidProfile(f"profile {kind!r} is missing field {exc.args[0]!r}") from None
    if spec:
        raise InvalidProfile(f"unknown field(s) for profile {kind!r}: {sorted(spec)}")
    return prof


def _check_u0(u0, b: float, n: int = 2001) -> None:
    x = np.linspace(-b, b, n)
    values = u0(x)
    if not np.all(np.isfinite(values)):
        raise InvalidProfile("u0 is not finite on [-b, b]")
    scale = max(1.0, float(np.max(np.abs(values))))
    if abs(values[0]) > 1e-12 * scale or abs(values[-1]) > 1e-12 * scale:
        raise InvalidProfile(f"u0 must vanish at x = +-b, got {values[0]!r}, {values[-1]!r}")
    if not np.all(values[1:-1] > 0):
        raise InvalidProfile("u0 must be strictly positive on (-b, b)")


def _check_v0(v0, extent: float, n: int = 2001) -> None:
    x = np.linspace(-extent, extent, n)
    values = v0(x)
    if not np.all(np.isfinite(values)):
        raise InvalidProfile("v0 must be bounded")
    if np.any(values < 0):
        raise InvalidProfile("v0 must be nonnegative")


def make_initial_data(spec: Mapping[str, Any], params: ModelParams, extent: float | None = None) -> InitialData:
    """Build and check initial data from a profile description.

    ``spec`` has ``"u0"`` and ``"v0"`` entries, each a mapping with a ``kind``
    key (``cosine``, ``skewed_cosine``, ``modulated_cosine``, ``constant``, ``gaussian`` or
    ``tabulated``) and that profile's fields. ``v0`` may be omitted, in which
    case it defaults to the logistic level ``a2/c2`` (or 0 when ``a2 <= 0``).

    Both profiles are sampled densely; `InvalidProfile` is raised when ``u0``
    does not vanish at ``+-b`` or is not positive inside, or ``v0`` is
    negative or not finite.
    """
    p = validate_params(params)
    u_spec = spec.get("u0", {"kind": "cosine", "amplitude": 1.0})
    v_spec = spec.get("v0", {"kind": "constant", "value": max(p.a2, 0.0) / p.c2})
    u0 = profile_from_spec(u_spec, p.b, for_u=True)
    v0 = profile_from_spec(v_spec, p.b, for_u=False)
    _check_u0(u0, p.b)
    _check_v0(v0, extent if extent is not None else 10.0 * p.b)
    return InitialData(u0=u0, v0=v0, b=p.b, v_far=v0.far_field)
