"""Computational grids.

Three geometries are used throughout the package:

* ``ChannelGrid`` -- periodic in x1 (period 2*pi, Fourier collocation) and a
  bounded interval in x2 discretized with a uniform node set that includes
  both endpoints (second-order finite differences).
* ``TorusGrid``  -- doubly periodic, fully spectral.
* ``PolarGrid``  -- unit disk, spectral in the angle, half-offset radial
  nodes so the coordinate singularity at r=0 carries no node.

All grids expose ``d1``/``d2`` partial derivatives along the two array axes
(axis 0 <-> x1, axis 1 <-> x2) and an ``integrate`` quadrature consistent
with the discretization (exact for trigonometric polynomials in periodic
directions, trapezoidal across the channel).
"""

from __future__ import annotations

from functools import cached_property

import numpy as np


def spectral_derivative(values: np.ndarray, axis: int, length: float = 2.0 * np.pi,
                        order: int = 1) -> np.ndarray:
    """Differentiate a periodic sampling along ``axis`` via the FFT.

    For odd derivative orders the Nyquist mode is zeroed, which keeps the
    result real and makes the operator skew-adjoint on the grid.
    """
    n = values.shape[axis]
    k = 2.0 * np.pi / length * np.fft.rfftfreq(n, d=1.0 / n)
    fac = (1j * k) ** order
    if order % 2 == 1 and n % 2 == 0:
        fac[-1] = 0.0
    vhat = np.fft.rfft(values, axis=axis)
    shape = [1] * values.ndim
    shape[axis] = k.size
    return np.fft.irfft(vhat * fac.reshape(shape), n=n, axis=axis)


def _fd_derivative(values: np.ndarray, h: float) -> np.ndarray:
    """Second-order first derivative along the last axis on a bounded interval.

    Centered stencil in the interior, one-sided three-point stencils at the
    two endpoints; both are O(h^2).
    """
    out = np.empty_like(values)
    out[..., 1:-1] = (values[..., 2:] - values[..., :-2]) / (2.0 * h)
    out[..., 0] = (-3.0 * values[..., 0] + 4.0 * values[..., 1] - values[..., 2]) / (2.0 * h)
    out[..., -1] = (3.0 * values[..., -1] - 4.0 * values[..., -2] + values[..., -3]) / (2.0 * h)
    return out


class ChannelGrid:
    """Periodic-in-x1 channel T x [x2_min, x2_max].

    Parameters
    ----------
    n1 : even number of collocation points in x1 (period 2*pi).
    n2 : number of x2 nodes, endpoints included; spacing h2 = width/(n2-1).
    """

    periodic2 = False

    def __init__(self, n1: int, n2: int, x2_min: float = -1.0, x2_max: float = 1.0):
        if n1 < 4 or n1 % 2 != 0:
            raise ValueError(f"n1 must be even and >= 4, got {n1}")
        if n2 < 5:
            raise ValueError(f"n2 must be >= 5, got {n2}")
        if not x2_max > x2_min:
            raise ValueError("x2_max must exceed x2_min")
        self.n1 = n1
        self.n2 = n2
        self.x2_min = float(x2_min)
        self.x2_max = float(x2_max)
        self.h2 = (self.x2_max - self.x2_min) / (n2 - 1)
        self.x1 = 2.0 * np.pi * np.arange(n1) / n1
        self.x2 = np.linspace(self.x2_min, self.x2_max, n2)
        # rfft wavenumbers for the periodic direction
        self.k1 = np.fft.rfftfreq(n1, d=1.0 / n1)

    @property
    def shape(self):
        return (self.n1, self.n2)

    @cached_property
    def mesh(self):
        return np.meshgrid(self.x1, self.x2, indexing="ij")

    @cached_property
    def w2(self) -> np.ndarray:
        """Trapezoid quadrature weights across the channel."""
        w = np.full(self.n2, self.h2)
        w[0] = w[-1] = 0.5 * self.h2
        return w

    def d1(self, values: np.ndarray, order: int = 1) -> np.ndarray:
        return spectral_derivative(values, axis=-2, order=order)

    def d2(self, values: np.ndarray) -> np.ndarray:
        return _fd_derivative(values, self.h2)

    def integrate(self, values: np.ndarray) -> float:
        return float((2.0 * np.pi / self.n1) * np.sum(values @ self.w2))

    def l2_norm(self, values: np.ndarray) -> float:
        return float(np.sqrt(max(self.integrate(values * values), 0.0)))

    def mean(self, values: np.ndarray) -> float:
        area = 2.0 * np.pi * (self.x2_max - self.x2_min)
        return self.integrate(values) / area


class TorusGrid:
    """Doubly periodic square torus of side 2*pi, fully spectral."""

    periodic2 = True

    def __init__(self, n1: int, n2: int | None = None):
        n2 = n1 if n2 is None else n2
        if n1 < 4 or n1 % 2 != 0 or n2 < 4 or n2 % 2 != 0:
            raise ValueError(f"torus resolutions must be even and >= 4, got {(n1, n2)}")
        self.n1 = n1
        self.n2 = n2
        self.x1 = 2.0 * np.pi * np.arange(n1) / n1
        self.x2 = 2.0 * np.pi * np.arange(n2) / n2
        self.k1 = np.fft.rfftfreq(n1, d=1.0 / n1)

    @property
    def shape(self):
        return (self.n1, self.n2)

    @cached_property
    def mesh(self):
        return np.meshgrid(self.x1, self.x2, indexing="ij")

    def d1(self, values: np.ndarray, order: int = 1) -> np.ndarray:
        return spectral_derivative(values, axis=-2, order=order)

    def d2(self, values: np.ndarray, order: int = 1) -> np.ndarray:
        return spectral_derivative(values, axis=-1, order=order)

    def integrate(self, values: np.ndarray) -> float:
        return float((2.0 * np.pi) ** 2 * np.mean(values))

    def l2_norm(self, values: np.ndarray) -> float:
        return float(np.sqrt(max(self.integrate(values * values), 0.0)))

    def mean(self, values: np.ndarray) -> float:
        return float(np.mean(values))


class PolarGrid:
    """Unit disk; axis 0 is the angle (spectral), axis 1 the radius.

    Radial nodes sit at r_j = (j + 1/2) dr with dr = 1/nr, so no node falls
    on the coordinate singularity and midpoint quadrature in r is O(dr^2).
    """

    periodic2 = False

    def __init__(self, ntheta: int, nr: int):
        if ntheta < 4 or ntheta % 2 != 0:
            raise ValueError(f"ntheta must be even and >= 4, got {ntheta}")
        if nr < 2:
            raise ValueError(f"nr must be >= 2, got {nr}")
        self.ntheta = ntheta
        self.nr = nr
        self.dr = 1.0 / nr
        self.theta = 2.0 * np.pi * np.arange(ntheta) / ntheta
        self.r = (np.arange(nr) + 0.5) * self.dr

    @property
    def shape(self):
        return (self.ntheta, self.nr)

    @cached_property
    def mesh(self):
        return np.meshgrid(self.theta, self.r, indexing="ij")

    def d1(self, values: np.ndarray, order: int = 1) -> np.ndarray:
        """Angular derivative (spectral)."""
        return spectral_derivative(values, axis=-2, order=order)

    def d2(self, values: np.ndarray) -> np.ndarray:
        """Radial derivative (second order, one-sided at the two rims)."""
        return _fd_derivative(values, self.dr)

    def integrate(self, values: np.ndarray) -> float:
        # midpoint rule in r against the area element r dr dtheta
        return float((2.0 * np.pi / self.ntheta) * self.dr * np.sum(values * self.r))

    def l2_norm(self, values: np.ndarray) -> float:
        return float(np.sqrt(max(self.integrate(values * values), 0.0)))

    def mean(self, values: np.ndarray) -> float:
        return self.integrate(values) / np.pi
