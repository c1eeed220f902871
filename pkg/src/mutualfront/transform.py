"""Front-fixing coordinate maps.

Two ways of pinning the moving habitat ``[g(t), h(t)]`` to a fixed reference
interval are provided:

* the affine normalization ``s = (x - g) / (h - g)`` on ``[0, 1]``, valid for
  any ``g < h`` and used for production stepping;
* the cutoff straightening ``x = y + xi(y) (g + b) + zeta(y) (h - b)`` on
  ``[-b, b]``, a diffeomorphism only while both fronts stay within ``b/8`` of
  their initial positions. It is kept as a short-horizon cross-check.

Both are wrapped as *frames* (`AffineFrame`, `CutoffFrame`) exposing the
reference grid, the physical node positions and the transformed diffusion and
drift coefficients of the ``u`` equation.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

__all__ = [
    "TransformOutOfRange",
    "DegenerateInterval",
    "CutoffPair",
    "build_cutoffs",
    "TransformCoefficients",
    "transform_valid",
    "transform_coefficients",
    "cutoff_position",
    "affine_map",
    "affine_inverse",
    "AffineFrame",
    "CutoffFrame",
    "frame_from_name",
]


class TransformOutOfRange(ValueError):
    pass


class DegenerateInterval(ValueError):
    pass


def _septic_step(t: np.ndarray, nu: int = 0) -> np.ndarray:
    """C^3 smoothstep ``35t^4 - 84t^5 + 70t^6 - 20t^7`` and its derivatives.

    First three derivatives vanish at both ends; ``max s' = 140/64``.
    """
    t = np.clip(t, 0.0, 1.0)
    if nu == 0:
        return t**4 * (35.0 - 84.0 * t + 70.0 * t**2 - 20.0 * t**3)
    if nu == 1:
        return 140.0 * t**3 * (1.0 - t) ** 3
    if nu == 2:
        return 420.0 * t**2 * (1.0 - t) ** 2 * (1.0 - 2.0 * t)
    if nu == 3:
        return 840.0 * t * (1.0 - t) * (1.0 - 5.0 * t + 5.0 * t**2)
    raise ValueError("derivative order must be 0..3")


@dataclass(frozen=True)
class CutoffPair:
    """Cutoff ``zeta`` equal to 1 near ``y = b`` and 0 away from it, with ``xi(y) = zeta(-y)``.

    ``zeta`` is 1 for ``|y - b| <= b/8``, 0 for ``|y - b| >= b/2``, joined by a
    septic smoothstep on each side, so it is C^3 and ``|zeta'| <= 35/(6b)``.
    """

    b: float

    @property
    def _inner(self) -> float:
        return self.b / 8.0

    @property
    def _width(self) -> float:
        return 3.0 * self.b / 8.0

    def zeta(self, y, nu: int = 0):
        y = np.asarray(y, dtype=float)
        r = np.abs(y - self.b)
        t = (self.b / 2.0 - r) / self._width  # 1 at inner plateau edge, 0 at outer
        val = _septic_step(t, nu)
        if nu:
            # chain rule through t = (b/2 - |y - b|) / width
            dt_dy = -np.sign(y - self.b) / self._width
            val = val * dt_dy**nu
            val = np.where((r <= self._inner) | (r >= self.b / 2.0), 0.0, val)
        return val

    def xi(self, y, nu: int = 0):
        y = np.asarray(y, dtype=float)
        return (-1.0) ** nu * self.zeta(-y, nu)


@lru_cache(maxsize=64)
def build_cutoffs(b: float) -> CutoffPair:
    if not b > 0:
        raise ValueError("b must be positive")
    return CutoffPair(float(b))


class TransformCoefficients(NamedTuple):
    A: np.ndarray | float
    B: np.ndarray | float
    C: np.ndarray | float


def transform_valid(g: float, h: float, b: float) -> bool:
    """True while both fronts are within ``b/8`` of ``-b`` and ``b`` (boundary included)."""
    return max(abs(g + b), abs(h - b)) <= b / 8.0


def cutoff_position(g: float, h: float, y, cutoffs: CutoffPair):
    """Physical position ``x(y) = y + xi(y) (g + b) + zeta(y) (h - b)``."""
    y = np.asarray(y, dtype=float)
    b = cutoffs.b
    return y + cutoffs.xi(y) * (g + b) + cutoffs.zeta(y) * (h - b)


def transform_coefficients(g: float, h: float, y, cutoffs: CutoffPair) -> TransformCoefficients:
    """Coefficients of the straightened ``u`` equation.

    ``C = dy/dx``, ``A = C**2`` and ``B = d^2y/dx^2``, so that
    ``u_xx = A w_yy + B w_y`` for ``w(y) = u(x(y))``.
    """
    b = cutoffs.b
    if not transform_valid(g, h, b):
        raise TransformOutOfRange(
            f"max(|g+b|, |h-b|) = {max(abs(g + b), abs(h - b))!r} exceeds b/8 = {b / 8!r}"
        )
    y = np.asarray(y, dtype=float)
    jac = 1.0 + cutoffs.xi(y, 1) * (g + b) + cutoffs.zeta(y, 1) * (h - b)
    C = 1.0 / jac
    A = C * C
    B = -(cutoffs.xi(y, 2) * (g + b) + cutoffs.zeta(y, 2) * (h - b)) * C**3
    return TransformCoefficients(A, B, C)


def affine_map(g: float, h: float, x):
    """Normalized coordinate ``(x - g) / (h - g)``, 0 at ``g`` and 1 at ``h``."""
    if not h > g:
        raise DegenerateInterval(f"need g < h, got g={g!r}, h={h!r}")
    return (np.asarray(x, dtype=float) - g) / (h - g)


def affine_inverse(g: float, h: float, s):
    if not h > g:
        raise DegenerateInterval(f"need g < h, got g={g!r}, h={h!r}")
    return g + np.asarray(s, dtype=float) * (h - g)


# ---------------------------------------------------------------------------
# frames used by the stepper


@lru_cache(maxsize=32)
def uniform_grid(a: float, b: float, n: int) -> np.ndarray:
    out = np.linspace(a, b, n)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class AffineFrame:
    """Reference coordinate ``s in [0, 1]``.

    Under ``x = g + s (h - g)`` the ``u`` equation becomes
    ``w_t = d1/(h-g)^2 w_ss + ((1-s) g' + s h')/(h-g) w_s + reaction``.
    """

    name = "affine"

    def grid(self, n: int, b: float) -> np.ndarray:
        return uniform_grid(0.0, 1.0, n)

    def positions(self, g: float, h: float, grid: np.ndarray) -> np.ndarray:
        return affine_inverse(g, h, grid)

    def coefficients(self, g, h, g_dot, h_dot, grid, d1):
        width = h - g
        if not width > 0:
            raise DegenerateInterval(f"need g < h, got g={g!r}, h={h!r}")
        diffusion = np.full(grid.shape, d1 / width**2)
        drift = ((1.0 - grid) * g_dot + grid * h_dot) / width
        return diffusion, drift


@dataclass(frozen=True)
class CutoffFrame:
    """Reference coordinate ``y in [-b, b]`` of the cutoff straightening.

    ``w_t = d1 A w_yy + [d1 B + (xi g' + zeta h') C] w_y + reaction``.
    """

    b: float

    name = "cutoff"

    @property
    def cutoffs(self) -> CutoffPair:
        return build_cutoffs(self.b)

    def grid(self, n: int, b: float) -> np.ndarray:
        return uniform_grid(-self.b, self.b, n)

    def positions(self, g: float, h: float, grid: np.ndarray) -> np.ndarray:
        return cutoff_position(g, h, grid, self.cutoffs)

    def coefficients(self, g, h, g_dot, h_dot, grid, d1):
        cut = self.cutoffs
        A, B, C = transform_coefficients(g, h, grid, cut)
        diffusion = d1 * A
        drift = d1 * B + (cut.xi(grid) * g_dot + cut.zeta(grid) * h_dot) * C
        return diffusion, drift


def frame_from_name(name: str, b: float):
    if name == "affine":
        return AffineFrame()
    if name == "cutoff":
        return CutoffFrame(float(b))
    raise ValueError(f"unknown frame {name!r}")
