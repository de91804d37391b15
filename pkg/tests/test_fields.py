"""Fields, zonal projections, and Sobolev norms."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mrelab import ChannelField, ChannelGrid, OrderTooHigh, sobolev_norm
from mrelab.errors import NotSolenoidal
from mrelab.fields import (fluctuation, p0, pperp, require_solenoidal,
                           stream_function, zonal_mean)

GRID = ChannelGrid(16, 17)


def _random_field(seed):
    rng = np.random.default_rng(seed)
    return ChannelField(GRID, rng.standard_normal((2,) + GRID.shape))


@settings(deadline=None, max_examples=25)
@given(st.integers(min_value=0, max_value=10_000))
def test_projection_algebra(seed):
    h = _random_field(seed).data
    # idempotence, complementarity, orthogonality of the decomposition
    assert np.allclose(zonal_mean(zonal_mean(h)), zonal_mean(h), atol=1e-13)
    assert np.allclose(fluctuation(fluctuation(h)), fluctuation(h), atol=1e-13)
    assert np.allclose(zonal_mean(h) + fluctuation(h), h, atol=1e-13)
    assert np.max(np.abs(zonal_mean(fluctuation(h)))) < 1e-13


def test_p0_pperp_dispatch_on_field_types():
    h = _random_field(0)
    assert isinstance(p0(h), ChannelField)
    assert np.allclose(p0(h).data + pperp(h).data, h.data, atol=1e-13)


def test_sobolev_norm_oracle_single_mode():
    # f = sin(x1) sin(pi (x2+1)/2): every derivative has a closed form, so
    # the squared H^k norm is a finite sum of products of 1D integrals.
    grid = ChannelGrid(32, 257)
    x1, x2 = grid.mesh
    s = np.pi / 2.0
    f = np.sin(x1) * np.sin(s * (x2 + 1.0))
    # 1D factors: int sin^2/cos^2 over the circle = pi; over [-1,1] = 1
    def h2(k):
        total = 0.0
        for a1 in range(k + 1):
            for a2 in range(k + 1 - a1):
                total += np.pi * 1.0 * s ** (2 * a2)
        return total
    for k in (0, 1, 2):
        exact = np.sqrt(h2(k))
        val = sobolev_norm(f, k, grid=grid)
        assert abs(val - exact) / exact < 2e-3, (k, val, exact)


def test_sobolev_norm_order_cap():
    with pytest.raises(OrderTooHigh):
        sobolev_norm(np.ones(GRID.shape), 5, grid=GRID)


def test_from_stream_is_divergence_free_and_tangent():
    grid = ChannelGrid(32, 33)
    x1, x2 = grid.mesh
    psi = np.sin(2 * x1) * np.sin(np.pi * (x2 + 1.0))
    b = ChannelField.from_stream(grid, psi)
    require_solenoidal(b)
    assert np.max(np.abs(b.c2[:, [0, -1]])) < 1e-12


def test_require_solenoidal_raises():
    grid = ChannelGrid(16, 17)
    x1, x2 = grid.mesh
    bad = ChannelField.from_components(grid, np.sin(x1), np.zeros(grid.shape))
    with pytest.raises(NotSolenoidal):
        require_solenoidal(bad)


def test_stream_function_round_trip():
    grid = ChannelGrid(32, 129)
    x1, x2 = grid.mesh
    psi = np.sin(x1) * np.sin(np.pi * (x2 + 1.0))
    b = ChannelField.from_stream(grid, psi)
    psi2 = stream_function(b)
    b2 = ChannelField.from_stream(grid, psi2)
    assert ChannelField(grid, b2.data - b.data).l2_norm() < 1e-3 * b.l2_norm()
