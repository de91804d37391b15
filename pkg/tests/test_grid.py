"""Grids: spectral/FD derivatives, quadrature, and shape conventions."""

import numpy as np
import pytest

from mrelab.grid import ChannelGrid, PolarGrid, TorusGrid, spectral_derivative


def test_spectral_derivative_exact_on_trig():
    n = 32
    x = 2 * np.pi * np.arange(n) / n
    f = np.sin(3 * x) + 0.5 * np.cos(5 * x)
    df = 3 * np.cos(3 * x) - 2.5 * np.sin(5 * x)
    assert np.allclose(spectral_derivative(f, axis=0), df, atol=1e-12)
    d2f = -9 * np.sin(3 * x) - 12.5 * np.cos(5 * x)
    assert np.allclose(spectral_derivative(f, axis=0, order=2), d2f, atol=1e-11)


def test_spectral_derivative_custom_length():
    n = 64
    length = 3.0
    x = length * np.arange(n) / n
    f = np.sin(2 * np.pi * x / length)
    df = (2 * np.pi / length) * np.cos(2 * np.pi * x / length)
    assert np.allclose(spectral_derivative(f, axis=0, length=length), df,
                       atol=1e-12)


def test_channel_d1_acts_on_second_to_last_axis():
    grid = ChannelGrid(32, 17)
    x1, x2 = grid.mesh
    stacked = np.stack([np.sin(x1), np.cos(x1) * x2])
    out = grid.d1(stacked)
    assert np.allclose(out[0], np.cos(x1), atol=1e-12)
    assert np.allclose(out[1], -np.sin(x1) * x2, atol=1e-12)


def test_channel_d2_second_order_convergence():
    errs = []
    for n2 in (33, 65, 129):
        grid = ChannelGrid(8, n2)
        f = np.broadcast_to(np.sin(2.0 * grid.x2), grid.shape)
        df = np.broadcast_to(2.0 * np.cos(2.0 * grid.x2), grid.shape)
        errs.append(np.max(np.abs(grid.d2(f) - df)))
    orders = np.log2(np.array(errs[:-1]) / errs[1:])
    assert np.all(orders > 1.9)


def test_channel_trapezoid_integration():
    grid = ChannelGrid(16, 129)
    x1, x2 = grid.mesh
    val = grid.integrate(np.cos(x1) ** 2 * (1 - x2 ** 2))
    # integral of cos^2 over the circle is pi; of (1 - x2^2) over [-1,1] is 4/3
    assert abs(val - np.pi * 4.0 / 3.0) < 1e-3  # trapezoid is O(h2^2)


def test_channel_constructor_validation():
    with pytest.raises(ValueError):
        ChannelGrid(7, 17)   # odd n1
    with pytest.raises(ValueError):
        ChannelGrid(8, 3)    # too few wall-normal nodes


def test_torus_fully_spectral():
    grid = TorusGrid(32)
    x1, x2 = grid.mesh
    f = np.sin(x1) * np.cos(2 * x2)
    assert np.allclose(grid.d2(f), -2 * np.sin(x1) * np.sin(2 * x2), atol=1e-11)
    assert abs(grid.integrate(f)) < 1e-12
    assert abs(grid.integrate(f * f) - np.pi ** 2) < 1e-10


def test_polar_grid_quadrature_and_dtheta():
    grid = PolarGrid(64, 40)
    tg, rg = grid.mesh
    # area of the unit disk
    assert abs(grid.integrate(np.ones(grid.shape)) - np.pi) < 1e-3
    f = rg * np.cos(tg)
    assert np.allclose(grid.d1(f), -rg * np.sin(tg), atol=1e-11)
