"""Neumann Poisson solver on the channel and the Leray projection built on it.

The Laplacian decouples per x1-Fourier mode into real tridiagonal systems
(-k^2 + D2^2) p_k = r_k, with the Neumann condition eliminated through ghost
points.  The k=0 system is singular (pure Neumann); solvability is enforced
by projecting the right-hand side onto the compatible subspace, and the
constant is fixed by the mean-zero gauge.  Mode matrices are factorized once
per grid shape and cached.
"""

from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import CompatibilityError, SingularSystemError
from .fields import ChannelField, ScalarField
from .grid import ChannelGrid


def _ghost_laplacian(n2: int, h2: float) -> np.ndarray:
    """Second-derivative matrix with ghost-point Neumann rows at both ends."""
    d2 = np.zeros((n2, n2))
    inv_h2 = 1.0 / h2 ** 2
    for j in range(1, n2 - 1):
        d2[j, j - 1] = inv_h2
        d2[j, j] = -2.0 * inv_h2
        d2[j, j + 1] = inv_h2
    d2[0, 0] = -2.0 * inv_h2
    d2[0, 1] = 2.0 * inv_h2
    d2[-1, -1] = -2.0 * inv_h2
    d2[-1, -2] = 2.0 * inv_h2
    return d2


@lru_cache(maxsize=32)
def _mode_solvers(n1: int, n2: int, h2: float):
    """Precomputed inverses of (-k^2 + D2^2) for every rfft mode of the grid.

    Returns (inv_k for k >= 1 stacked, pinned inverse for k = 0, left null
    vector of the k = 0 matrix).
    """
    d2 = _ghost_laplacian(n2, h2)
    k = np.fft.rfftfreq(n1, d=1.0 / n1)  # 0, 1, ..., n1/2
    mats = d2[None, :, :] - (k[1:, None, None] ** 2) * np.eye(n2)[None, :, :]
    inv_pos = np.linalg.inv(mats)

    # left null vector of the singular k = 0 matrix: trapezoid-like weights
    null = np.ones(n2)
    null[0] = null[-1] = 0.5

    pinned = d2.copy()
    pinned[0, :] = 0.0
    pinned[0, 0] = 1.0
    try:
        inv0 = np.linalg.inv(pinned)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - defensive
        raise SingularSystemError("k=0 gauge-pinned Neumann system is singular") from exc
    return inv_pos, inv0, null


def neumann_solve(rhs, grid: ChannelGrid | None = None,
                  bdry_top: np.ndarray | None = None,
                  bdry_bot: np.ndarray | None = None,
                  tol_compat: float = 1e-8):
    """Solve Delta p = rhs with d2 p(x1, x2_min/max) = bdry_bot/top, mean(p) = 0.

    The k = 0 Fourier mode is solvable only when the integral of ``rhs`` plus
    the boundary flux vanishes; a defect below ``tol_compat`` (relative to the
    data size) is treated as discretization noise and projected out, anything
    larger raises :class:`CompatibilityError`.

    ``rhs`` may be a :class:`ScalarField` (grid taken from it) or a bare
    array with ``grid`` given; the return type matches the input.
    """
    as_field = isinstance(rhs, ScalarField)
    if as_field:
        grid = rhs.grid
        rhs = rhs.values
    if grid is None:
        raise ValueError("grid is required when rhs is a bare array")
    rhs = np.asarray(rhs, float)
    n1, n2 = grid.shape
    inv_pos, inv0, null = _mode_solvers(n1, n2, grid.h2)

    rhat = np.fft.rfft(rhs, axis=0)
    two_over_h = 2.0 / grid.h2
    if bdry_bot is not None:
        rhat[:, 0] += two_over_h * np.fft.rfft(np.asarray(bdry_bot, float))
    if bdry_top is not None:
        rhat[:, -1] -= two_over_h * np.fft.rfft(np.asarray(bdry_top, float))

    # k = 0 solvability: null . rhat0 ~ integral of rhs + boundary flux
    r0 = rhat[0].real.copy()
    defect = float(null @ r0)
    width = grid.x2_max - grid.x2_min
    area = 2.0 * np.pi * width
    scale = (np.sqrt(area) * grid.l2_norm(rhs)
             + np.sqrt(2.0 * np.pi / n1) * two_over_h
             * (np.linalg.norm(bdry_bot) if bdry_bot is not None else 0.0)
             + np.sqrt(2.0 * np.pi / n1) * two_over_h
             * (np.linalg.norm(bdry_top) if bdry_top is not None else 0.0))
    # defect is in rfft scaling (factor n1) and units of rhs; relative measure:
    rel_defect = abs(defect) * grid.h2 * (2.0 * np.pi / n1) / max(scale, 1e-300)
    if rel_defect > tol_compat:
        raise CompatibilityError(
            f"k=0 Neumann mode incompatible: relative defect {rel_defect:.3e} "
            f"> tol_compat {tol_compat:.3e}")
    r0 -= (defect / (null @ null)) * null

    phat = np.empty_like(rhat)
    p0 = inv0 @ r0
    p0 -= (grid.w2 @ p0) / width  # mean-zero gauge
    phat[0] = p0
    phat[1:] = np.einsum("kij,kj->ki", inv_pos, rhat[1:])

    p = np.fft.irfft(phat, n=n1, axis=0)
    return ScalarField(grid, p) if as_field else p


def leray(h: ChannelField, tol_compat: float | None = None) -> ChannelField:
    """Leray projection onto divergence-free fields tangent to the walls.

    Solves Delta g = -div h with d2 g = -h2 on the walls and returns h + grad g.
    The wall rows of d2 g are set to the imposed Neumann data, so the output's
    normal component vanishes to round-off; its divergence is O(h2^2).

    The compatibility defect of this particular Neumann problem is pure
    discretization error (the continuous problem is always solvable), so the
    default tolerance here is grid-aware rather than the strict solver default.
    """
    grid = h.grid
    if tol_compat is None:
        tol_compat = max(1e-8, 100.0 * grid.h2 ** 2)
    bdry_bot = -h.c2[:, 0]
    bdry_top = -h.c2[:, -1]
    g = neumann_solve(-h.divergence(), grid, bdry_top=bdry_top,
                      bdry_bot=bdry_bot, tol_compat=tol_compat)
    d2g = grid.d2(g)
    d2g[:, 0] = bdry_bot
    d2g[:, -1] = bdry_top
    return ChannelField(grid, h.data + np.stack([grid.d1(g), d2g]))


class PoincareConstant(NamedTuple):
    """Best discrete constant in ||f|| <= c ||d1 f|| for zero-zonal-mean f."""
    sharp: float
    crude_bound: float


def poincare_constant(grid) -> PoincareConstant:
    """Poincare constant for the x1-periodic direction.

    For zero-zonal-mean fields on a period-2*pi circle the sharp constant is
    1/k_min = 1; the elementary length-based bound is the period 2*pi.
    """
    del grid  # period is fixed at 2*pi for every grid in this package
    return PoincareConstant(sharp=1.0, crude_bound=2.0 * np.pi)
