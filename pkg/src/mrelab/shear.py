"""Shear profiles gamma(x2) e1 and the analytic families used in scenarios."""

from __future__ import annotations

import numpy as np

from .grid import ChannelGrid, _fd_derivative


class ShearProfile:
    """A background shear gamma(x2) sampled on the channel's x2 nodes.

    Derivatives may be supplied analytically; otherwise they fall back to the
    grid's second-order stencils.
    """

    def __init__(self, grid: ChannelGrid, gamma: np.ndarray,
                 dgamma: np.ndarray | None = None,
                 d2gamma: np.ndarray | None = None):
        gamma = np.asarray(gamma, float)
        if gamma.shape != (grid.n2,):
            raise ValueError(f"gamma must have shape ({grid.n2},), got {gamma.shape}")
        self.grid = grid
        self.gamma = gamma
        self.dgamma = (np.asarray(dgamma, float) if dgamma is not None
                       else _fd_derivative(gamma, grid.h2))
        self.d2gamma = (np.asarray(d2gamma, float) if d2gamma is not None
                        else _fd_derivative(self.dgamma, grid.h2))

    @classmethod
    def constant(cls, grid: ChannelGrid, c: float = 1.0) -> "ShearProfile":
        z = np.zeros(grid.n2)
        return cls(grid, np.full(grid.n2, float(c)), z, z)

    @classmethod
    def linear(cls, grid: ChannelGrid, c0: float, slope: float) -> "ShearProfile":
        """gamma = c0 + slope * (x2 - x2_min)."""
        gamma = c0 + slope * (grid.x2 - grid.x2_min)
        return cls(grid, gamma, np.full(grid.n2, float(slope)), np.zeros(grid.n2))

    @classmethod
    def cosine(cls, grid: ChannelGrid, eps: float) -> "ShearProfile":
        """gamma = eps * cos(x2); vanishes wherever cos does."""
        return cls(grid, eps * np.cos(grid.x2), -eps * np.sin(grid.x2),
                   -eps * np.cos(grid.x2))

    @classmethod
    def power(cls, grid: ChannelGrid, alpha: float) -> "ShearProfile":
        """gamma = x2^alpha (degenerate at x2 = 0; use on [0, 1] channels)."""
        x2 = grid.x2
        gamma = np.sign(x2) * np.abs(x2) ** alpha
        with np.errstate(divide="ignore", invalid="ignore"):
            dg = alpha * np.abs(x2) ** (alpha - 1.0)
        dg = np.where(np.isfinite(dg), dg, 0.0)
        return cls(grid, gamma, dg)

    @property
    def c0(self) -> float:
        """Minimum magnitude of the shear (non-degeneracy constant)."""
        return float(np.min(np.abs(self.gamma)))

    @property
    def gmax(self) -> float:
        return float(np.max(np.abs(self.gamma)))

    def deriv_sup(self, order: int) -> float:
        """Sup norm of the requested derivative (0, 1, or 2)."""
        arr = (self.gamma, self.dgamma, self.d2gamma)[order]
        return float(np.max(np.abs(arr)))
