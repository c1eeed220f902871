"""Backward-Euler update for 1-D drift-diffusion-reaction on a uniform grid."""
from __future__ import annotations

import numpy as np
from scipy.linalg.lapack import dgtsv

__all__ = ["implicit_update", "solve_tridiagonal"]


def solve_tridiagonal(lower, diag, upper, rhs):
    """Solve ``lower[i-1] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]``."""
    *_, x, info = dgtsv(lower, diag, upper, rhs)
    if info != 0:
        raise np.linalg.LinAlgError(f"tridiagonal solve failed (info={info})")
    return x


def implicit_update(u, dt, dz, diffusion, drift, loss, source, bc):
    """Advance ``u_t = D u_zz + E u_z - loss*u + source`` by one backward-Euler step.

    ``diffusion``, ``drift``, ``loss`` and ``source`` are per-node arrays (or
    scalars) evaluated at the old time level; ``loss`` multiplies the new
    ``u`` so a nonnegative ``loss`` keeps the matrix diagonally dominant.
    Derivatives are central differences.

    ``bc="dirichlet"`` pins both end nodes to zero; ``bc="neumann"`` imposes a
    zero gradient through mirrored ghost nodes (no drift is allowed then).
    """
    n = u.shape[0]
    r = (dt / dz**2) * np.asarray(diffusion, dtype=float)
    q = (dt / (2.0 * dz)) * np.asarray(drift, dtype=float)
    diag = np.empty(n)
    diag[:] = 1.0 + dt * np.asarray(loss, dtype=float) + 2.0 * r
    rhs = u + dt * np.asarray(source, dtype=float)
    sub = np.empty(n)
    sup = np.empty(n)
    sub[:] = q - r   # coefficient of u[i-1] in row i
    sup[:] = -(r + q)   # coefficient of u[i+1] in row i

    if bc == "dirichlet":
        out = np.zeros(n)
        out[1:-1] = solve_tridiagonal(sub[2:-1], diag[1:-1], sup[1:-2], rhs[1:-1])
        return out
    if bc == "neumann":
        if np.any(q != 0):
            raise ValueError("drift is not supported with Neumann ends")
        upper = sup[:-1].copy()
        lower = sub[1:].copy()
        upper[0] = 2.0 * sup[0]
        lower[-1] = 2.0 * sub[-1]
        return solve_tridiagonal(lower, diag, upper, rhs)
    raise ValueError(f"unknown boundary condition {bc!r}")
