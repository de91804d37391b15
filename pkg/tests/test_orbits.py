"""Orbit detection, averaging, and the relaxation-target machinery."""

import numpy as np
import pytest

from mrelab import AdvectingField
from mrelab.errors import CriticalPoint
from mrelab.grid import PolarGrid, TorusGrid
from mrelab.orbits import (Orbit, build_gbar, detect_period,
                           heat_on_orbit_oracle, mb_membership, orbit_average,
                           p0_class_decay_check, torus_spectral_eval)

DISK = AdvectingField.rotation(PolarGrid(32, 16))
CELL = AdvectingField.cellular(TorusGrid(32, 32))


def test_disk_period_is_two_pi():
    orbit = detect_period(np.array([0.5, 0.0]), DISK)
    assert orbit.period == pytest.approx(2 * np.pi, abs=1e-9)
    assert orbit.lattice_shift == (0, 0)
    assert orbit.psi_drift < 1e-10


def test_disk_center_is_critical():
    with pytest.raises(CriticalPoint):
        detect_period(np.array([1e-12, 0.0]), DISK)


def test_cellular_period_grows_toward_separatrix():
    p_inner = detect_period(np.array([np.pi / 2, np.pi / 2 + 0.3]), CELL).period
    p_outer = detect_period(np.array([np.pi / 2, np.pi / 2 + 1.2]), CELL).period
    assert p_inner < p_outer
    assert p_inner > 2 * np.pi  # slower than the linearized center frequency


def test_cellular_psi_is_conserved_along_orbits():
    orbit = detect_period(np.array([1.0, 1.3]), CELL)
    assert orbit.psi_drift < 1e-9


def test_orbit_average_of_member_function_vanishes():
    # g = f(psi) B_1 h(x_1) has zero mean on every closed orbit
    def g(pts):
        pts = np.asarray(pts, float)
        psi = 0.5 * (pts[..., 0] ** 2 + pts[..., 1] ** 2)
        return (1.0 + psi) * (-pts[..., 1]) * np.cos(pts[..., 0])
    orbit = detect_period(np.array([0.7, 0.0]), DISK)
    assert abs(orbit_average(g, orbit)) < 1e-10


def test_torus_spectral_eval_exact_on_band_limited_data():
    grid = TorusGrid(16, 16)
    x1, x2 = grid.mesh
    values = np.sin(2 * x1) * np.cos(x2) + 0.3 * np.cos(x1)
    rng = np.random.default_rng(0)
    pts = rng.uniform(0, 2 * np.pi, size=(40, 2))
    exact = np.sin(2 * pts[:, 0]) * np.cos(pts[:, 1]) + 0.3 * np.cos(pts[:, 0])
    assert np.max(np.abs(torus_spectral_eval(values, pts) - exact)) < 1e-12


def test_heat_on_orbit_oracle_matches_fourier_modes():
    orbit = detect_period(np.array([0.8, 0.0]), DISK, n_samples=64)

    def g(pts):
        pts = np.asarray(pts, float)
        theta = np.arctan2(pts[..., 1], pts[..., 0])
        return np.cos(theta) + 0.5 * np.sin(3 * theta)

    t = 0.7
    out = heat_on_orbit_oracle(g, orbit, t)
    theta = orbit.s  # unit angular speed: s is the angle
    exact = np.exp(-t) * np.cos(theta) + 0.5 * np.exp(-9 * t) * np.sin(3 * theta)
    assert np.max(np.abs(out - exact)) < 1e-8


def test_build_gbar_rotation_fast_path():
    grid = PolarGrid(16, 8)
    field = AdvectingField.rotation(grid)
    tg, rg = grid.mesh
    g0 = rg ** 2 + rg * np.cos(tg)
    gbar = build_gbar(g0, field)
    assert np.allclose(gbar.values, rg ** 2, atol=1e-12)
    assert np.all(gbar.status == gbar.PERIODIC)
    assert np.allclose(gbar.periods, 2 * np.pi)


def test_build_gbar_generic_detection_on_cell():
    grid = TorusGrid(16, 16)
    field = AdvectingField.cellular(grid)
    mask = (field.psi >= 0.5) & (field.psi <= 0.8)

    def g0(pts):
        return np.asarray(pts, float)[..., 0]

    gbar = build_gbar(g0, field, mask=mask, s_max=200.0)
    sel = mask & (gbar.status == gbar.PERIODIC)
    assert sel.sum() > 0
    # the x1-average over an orbit around (pi/2, pi/2) equals pi/2 by symmetry
    assert np.max(np.abs(gbar.values[sel & (grid.mesh[0] < np.pi)
                                     & (grid.mesh[1] < np.pi)] - np.pi / 2)) < 1e-6


def test_mb_membership_flags_constant_function():
    seeds = [np.array([r, 0.0]) for r in (0.3, 0.6, 0.9)]
    rep = mb_membership(lambda pts: np.ones(np.asarray(pts).shape[:-1]),
                        DISK, seeds)
    # the orbit-mean criterion is the one that rules out constants; the
    # weighted integral of 1/(r + eps) on the disk stays finite
    assert rep["max_orbit_mean"] == pytest.approx(1.0, abs=1e-10)


def test_p0_class_decay_check_pass_and_fail():
    t = np.linspace(0, 5, 11)
    ell = 2 * np.pi
    good = np.exp(-t)  # decays at the asserted rate exactly
    assert p0_class_decay_check(t, good, ell)["pass"]
    bad = np.exp(-0.5 * t)
    assert not p0_class_decay_check(t, bad, ell, slack=1.05)["pass"]
