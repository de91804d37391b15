"""Channel solver: velocity, linearized operator, stepping, diagnostics."""

import numpy as np
import pytest

from mrelab import (ChannelField, ChannelGrid, CflViolation, DomainViolation,
                    LinOpConfig, MreState, ShearProfile, apply_La,
                    linear_pressure, mre_rhs, random_initial_field,
                    run_channel, step, velocity)
from mrelab.diag import fit_log_slope
from mrelab.fields import sobolev_norm, zonal_mean
from mrelab.mre import (a_evolution_check, decay_bound_monitor,
                        semigroup_decay_experiment, total_field_energy)

GRID = ChannelGrid(32, 33)
SHEAR = ShearProfile.constant(GRID, 1.0)
TILTED = ShearProfile.linear(GRID, 1.0, 0.05)


def _mode_field(grid, j=1, m=1, amp=1.0):
    x1, x2 = grid.mesh
    psi = amp * np.sin(j * x1) * np.sin(m * np.pi * (x2 + 1.0) / 2.0)
    return ChannelField.from_stream(grid, psi)


def test_velocity_scaling_is_quadratic_plus_linear():
    # u(eps b) = eps * linear + eps^2 * quadratic: the residual after
    # subtracting the linear response scales with slope >= 1.95 in log-log
    f = _mode_field(GRID)
    eps_list = [1e-2, 1e-3, 1e-4]
    resid = []
    for eps in eps_list:
        b = ChannelField(GRID, eps * f.data)
        u = velocity(b, SHEAR)
        lin = velocity(ChannelField(GRID, 1e-8 * f.data), SHEAR)
        resid.append(ChannelField(
            GRID, u.data - (eps / 1e-8) * lin.data).l2_norm())
    slope = np.polyfit(np.log(eps_list), np.log(resid), 1)[0]
    assert slope >= 1.95, (resid, slope)


def test_linear_operator_matches_nonlinear_rhs_at_small_amplitude():
    eps = 1e-6
    f = _mode_field(GRID)
    b = ChannelField(GRID, eps * f.data)
    nonlinear = mre_rhs(b, SHEAR).data / eps
    linear = apply_La(f, LinOpConfig(shear=SHEAR)).data
    diff = ChannelField(GRID, nonlinear - linear).l2_norm()
    assert diff <= 1e-4 * ChannelField(GRID, linear).l2_norm()


def test_apply_La_rejects_zonal_input():
    x1, x2 = GRID.mesh
    zonal = ChannelField.from_components(
        GRID, np.broadcast_to(np.sin(np.pi * x2), GRID.shape),
        np.zeros(GRID.shape))
    with pytest.raises(DomainViolation):
        apply_La(zonal, LinOpConfig(shear=SHEAR))


def test_apply_La_diagonal_in_x1_modes():
    # constant coefficients in x1: the operator cannot mix x1 frequencies
    f = _mode_field(GRID, j=2)
    out = apply_La(f, LinOpConfig(shear=TILTED, a=0.1 * np.sin(GRID.x2)))
    hat = np.fft.rfft(out.data, axis=1)
    energy = np.sum(np.abs(hat) ** 2, axis=(0, 2))
    off = np.sum(energy) - energy[2]
    assert off <= 1e-20 * np.sum(energy)


def test_apply_La_output_tangent():
    f = _mode_field(GRID, j=1, m=2)
    out = apply_La(f, LinOpConfig(shear=TILTED))
    scale = np.max(np.abs(out.data))
    assert np.max(np.abs(out.c2[:, [0, -1]])) <= 1e-10 * scale


def test_linear_pressure_vanishes_for_constant_shear():
    # gamma' = 0 and div f = 0 make the pressure problem data identically 0
    f = _mode_field(GRID)
    p = linear_pressure(f, SHEAR)
    assert np.max(np.abs(p.values)) < 1e-12


def test_linear_pressure_grid_convergence():
    # oracle: the same pressure on a twice-refined x2 grid
    vals = []
    for n2 in (33, 65, 129):
        grid = ChannelGrid(16, n2)
        shear = ShearProfile.linear(grid, 1.0, 0.05)
        f = _mode_field(grid)
        p = linear_pressure(f, shear).values
        mid = (grid.n2 - 1) // 2
        vals.append(p[4, mid])  # same physical point on every grid
    errs = [abs(vals[0] - vals[2]), abs(vals[1] - vals[2])]
    assert errs[1] < 0.4 * errs[0]


def test_step_backward_forward_consistency():
    # one step forward then backward differs from identity at O(dt^5);
    # the integrating factor handles the stiff wave term exactly, so the
    # admissible steps are large enough to see the order above round-off
    b0 = random_initial_field(GRID, 1e-3, seed=2)
    state = MreState(0.0, b0, SHEAR)
    errs = []
    dts = [0.04, 0.02]  # small enough that the backward factor stays finite
    for dt in dts:
        fwd = step(state, dt, integrator="ifrk4", reproject=False)
        back = step(MreState(0.0, ChannelField(GRID, fwd.b.data), SHEAR),
                    -dt, integrator="ifrk4", reproject=False)
        errs.append(ChannelField(GRID, back.b.data - b0.data).l2_norm())
    order = np.log2(errs[0] / errs[1])
    assert order >= 4.0, (errs, order)


def test_step_cfl_violation_raises():
    b0 = random_initial_field(GRID, 1e-3, seed=2)
    with pytest.raises(CflViolation):
        step(MreState(0.0, b0, SHEAR), 10.0, integrator="rk4")


def test_run_channel_energy_identity_and_drift():
    b0 = random_initial_field(GRID, 1e-3, seed=4)
    series, states = run_channel(SHEAR, b0, 2.0, dt=0.05, keep_states=True)
    tol = 1e-6 * series["l2_B"][0] ** 2
    assert np.max(series["energy_defect"][1:]) <= tol
    assert np.max(series["div_drift"]) <= 1e-9
    assert np.all(np.diff(series["l2_B"]) <= 1e-12)


def test_total_field_energy_matches_l2_column():
    b0 = random_initial_field(GRID, 1e-3, seed=4)
    series, states = run_channel(SHEAR, b0, 0.2, dt=0.05, keep_states=True)
    st = states[-1]
    assert series["l2_B"][-1] == pytest.approx(
        np.sqrt(total_field_energy(st)), rel=1e-12)


def test_decay_bound_ratios_below_one():
    eps = 1e-3
    b0 = random_initial_field(GRID, eps, seed=6)
    series, _ = run_channel(TILTED, b0, 5.0, dt=0.05)
    series = decay_bound_monitor(series, eps, TILTED.c0)
    for col in ("ratio_fperp", "ratio_a", "ratio_m", "ratio_u"):
        assert np.max(series[col]) <= 1.0 + 1e-9, col


def test_a_evolution_consistency():
    # centered-difference check needs finely spaced states (dt <= 0.02)
    eps = 1e-2
    b0 = random_initial_field(GRID, eps, seed=11)
    _, states = run_channel(TILTED, b0, 1.0, dt=0.02, sample_every=2,
                            keep_states=True)
    assert a_evolution_check(states, TILTED) <= 5e-2


def test_semigroup_rate_constant_shear():
    grid = ChannelGrid(16, 33)
    shear = ShearProfile.constant(grid, 1.0)
    f0 = _mode_field(grid, amp=1e-3)
    series = semigroup_decay_experiment(f0, LinOpConfig(shear=shear),
                                        t_end=6.0, n_samples=61)
    rate = -fit_log_slope(series["t"], series["l2_f"], t_min=1.0)
    assert rate == pytest.approx(1.0, abs=0.01)


def test_random_initial_field_properties():
    b = random_initial_field(GRID, 1e-3, seed=0)
    assert sobolev_norm(b, 4) == pytest.approx(1e-3, rel=1e-12)
    assert np.max(np.abs(zonal_mean(b.data))) < 1e-16
    assert np.max(np.abs(b.c2[:, [0, -1]])) < 1e-16
