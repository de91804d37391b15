"""Scalar and vector fields on a grid, zonal projections, Sobolev norms."""

from __future__ import annotations

import numpy as np

from .errors import NotSolenoidal, OrderTooHigh
from .grid import ChannelGrid

#: highest Sobolev order the second-order cross-channel stencils support
MAX_SOBOLEV_ORDER = 4


class ScalarField:
    """A real scalar sampled on a grid (axis 0 <-> x1, axis 1 <-> x2)."""

    def __init__(self, grid, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if values.shape != grid.shape:
            raise ValueError(f"values shape {values.shape} != grid shape {grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        self.grid = grid
        self.values = values

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


class ChannelField:
    """A two-component vector field on a channel grid.

    Components are stored stacked in ``data`` with shape (2, n1, n2) so the
    time steppers can treat a state as a single array.
    """

    def __init__(self, grid: ChannelGrid, data: np.ndarray):
        data = np.asarray(data, dtype=float)
        if data.shape != (2, *grid.shape):
            raise ValueError(f"data shape {data.shape} != (2, {grid.n1}, {grid.n2})")
        if not np.all(np.isfinite(data)):
            raise ValueError("field values must be finite")
        self.grid = grid
        self.data = data

    @classmethod
    def from_components(cls, grid: ChannelGrid, c1: np.ndarray, c2: np.ndarray) -> "ChannelField":
        return cls(grid, np.stack([np.asarray(c1, float), np.asarray(c2, float)]))

    @classmethod
    def from_stream(cls, grid: ChannelGrid, psi: np.ndarray) -> "ChannelField":
        """Perpendicular gradient (-d2 psi, d1 psi); divergence free by construction."""
        return cls.from_components(grid, -grid.d2(psi), grid.d1(psi))

    @property
    def c1(self) -> np.ndarray:
        return self.data[0]

    @property
    def c2(self) -> np.ndarray:
        return self.data[1]

    def copy(self) -> "ChannelField":
        return ChannelField(self.grid, self.data.copy())

    def divergence(self) -> np.ndarray:
        return self.grid.d1(self.data[0]) + self.grid.d2(self.data[1])

    def l2_norm(self) -> float:
        return float(np.sqrt(max(self.grid.integrate(self.data[0] ** 2)
                                 + self.grid.integrate(self.data[1] ** 2), 0.0)))


def zonal_mean(values: np.ndarray) -> np.ndarray:
    """x1-average, broadcast back to the full grid (projection P0)."""
    return np.broadcast_to(values.mean(axis=-2, keepdims=True), values.shape).copy()


def fluctuation(values: np.ndarray) -> np.ndarray:
    """Zero-zonal-mean part (projection I - P0)."""
    return values - values.mean(axis=-2, keepdims=True)


def p0(field):
    """Zonal average of a field; accepts arrays, ScalarField, or ChannelField."""
    if isinstance(field, ChannelField):
        return ChannelField(field.grid, zonal_mean(field.data))
    if isinstance(field, ScalarField):
        return ScalarField(field.grid, zonal_mean(field.values))
    return zonal_mean(np.asarray(field, float))


def pperp(field):
    """Fluctuating (zero zonal mean) part of a field."""
    if isinstance(field, ChannelField):
        return ChannelField(field.grid, fluctuation(field.data))
    if isinstance(field, ScalarField):
        return ScalarField(field.grid, fluctuation(field.values))
    return fluctuation(np.asarray(field, float))


def _check_order(k: int):
    if not isinstance(k, (int, np.integer)) or k < 0:
        raise OrderTooHigh(f"Sobolev order must be a nonnegative integer, got {k!r}")
    if k > MAX_SOBOLEV_ORDER:
        raise OrderTooHigh(
            f"Sobolev order {k} exceeds supported maximum {MAX_SOBOLEV_ORDER}: "
            "repeated second-order stencils lose accuracy beyond that")


def sobolev_norm(field, k: int, grid=None) -> float:
    """Discrete H^k norm: sum of L^2 norms of all partials of order <= k.

    x1-derivatives are spectral (exact on the grid), x2-derivatives use the
    second-order stencils of the grid, applied repeatedly for higher orders.
    Orders above ``MAX_SOBOLEV_ORDER`` raise :class:`OrderTooHigh`.
    """
    _check_order(k)
    if isinstance(field, ChannelField):
        grid = field.grid
        comps = [field.data[0], field.data[1]]
    elif isinstance(field, ScalarField):
        grid = field.grid
        comps = [field.values]
    else:
        if grid is None:
            raise ValueError("grid is required when passing a bare array")
        arr = np.asarray(field, float)
        comps = [arr[i] for i in range(arr.shape[0])] if arr.ndim == 3 else [arr]

    total = 0.0
    for comp in comps:
        # d2 applied repeatedly; each column reused across the x1 orders
        d2_powers = [comp]
        for _ in range(k):
            d2_powers.append(grid.d2(d2_powers[-1]))
        for a2 in range(k + 1):
            for a1 in range(k + 1 - a2):
                g = d2_powers[a2]
                if a1 > 0:
                    g = grid.d1(g, order=a1)
                total += grid.integrate(g * g)
    return float(np.sqrt(max(total, 0.0)))


def require_solenoidal(field: ChannelField, tol: float = 1e-6):
    """Raise :class:`NotSolenoidal` unless div(field) is small relative to the field.

    ``tol`` is relative to the L^2 size of the field gradient scale; fields
    built from a stream function pass at spectral/stencil accuracy.
    """
    div = field.divergence()
    scale = field.l2_norm()
    if scale == 0.0:
        return
    resid = field.grid.l2_norm(div)
    if resid > tol * scale:
        raise NotSolenoidal(
            f"relative divergence {resid / scale:.3e} exceeds tolerance {tol:.3e}")


def stream_function(field: ChannelField, tol: float = 1e-6) -> np.ndarray:
    """Stream function psi with (-d2 psi, d1 psi) ~= field, psi(x1, x2_min) = 0.

    The field must be (discretely) divergence free; the reconstruction is the
    cumulative trapezoid of -c1 in x2, so the round trip is exact in x1 and
    O(h2^2) in x2.
    """
    require_solenoidal(field, tol=tol)
    grid = field.grid
    psi = np.zeros(grid.shape)
    increments = -0.5 * grid.h2 * (field.c1[:, 1:] + field.c1[:, :-1])
    psi[:, 1:] = np.cumsum(increments, axis=1)
    return psi
