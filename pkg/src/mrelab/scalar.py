"""Degenerate scalar relaxation dt g = (B.grad)^2 g on channel, torus, and disk.

The advecting field B is steady and solenoidal; along each of its periodic
orbits the equation is a 1D heat flow, so g relaxes to orbit averages.  The
module provides the explicit shear solutions (including the H^1-growth
counterexample family), an RK4 collocation solver, and the decay/Lp
diagnostics used by the acceptance scenarios.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .diag import DiagSeries, fit_log_slope, fit_loglog_slope
from .errors import CflViolation, NotEigenfunction
from .fields import ScalarField, sobolev_norm
from .grid import ChannelGrid, PolarGrid, TorusGrid, spectral_derivative


class AdvectingField:
    """A steady advecting field B on a grid, one of three kinds.

    * ``shear``:       B = (V(x2), 0) on a channel or torus.
    * ``rotation``:    B = (-y, x) on the unit disk (polar grid).
    * ``hamiltonian``: B = (-d2 psi, d1 psi) on the torus.

    ``b_func`` gives B at arbitrary points (Cartesian) for trajectory work;
    ``psi_func`` is the conserved stream function where one exists.
    """

    def __init__(self, kind: str, grid, *, v_profile: np.ndarray | None = None,
                 v_func: Callable | None = None, psi: np.ndarray | None = None,
                 psi_func: Callable | None = None, b_func: Callable | None = None):
        if kind not in ("shear", "rotation", "hamiltonian"):
            raise ValueError(f"unknown field kind {kind!r}")
        self.kind = kind
        self.grid = grid
        self.v_profile = v_profile
        self.v_func = v_func
        self.psi = psi
        self.psi_func = psi_func
        self.b_func = b_func
        if kind == "hamiltonian":
            self.b_samples = np.stack([-grid.d2(psi), grid.d1(psi)])

    # -- constructors -------------------------------------------------------

    @classmethod
    def shear(cls, grid, v_func: Callable) -> "AdvectingField":
        """V(x2) e1 on a channel or torus grid."""
        profile = np.asarray(v_func(grid.x2), float)

        def b_func(x):
            x = np.asarray(x, float)
            return np.stack([np.asarray(v_func(x[..., 1]), float),
                             np.zeros(x[..., 1].shape)], axis=-1)

        def psi_func(x):
            # x2 itself is conserved along shear orbits
            return np.asarray(x, float)[..., 1]

        return cls("shear", grid, v_profile=profile, v_func=v_func,
                   b_func=b_func, psi_func=psi_func)

    @classmethod
    def rotation(cls, grid: PolarGrid) -> "AdvectingField":
        """Rigid rotation (-y, x): every circle is an orbit of period 2 pi."""

        def b_func(x):
            x = np.asarray(x, float)
            return np.stack([-x[..., 1], x[..., 0]], axis=-1)

        def psi_func(x):
            x = np.asarray(x, float)
            return 0.5 * (x[..., 0] ** 2 + x[..., 1] ** 2)

        return cls("rotation", grid, b_func=b_func, psi_func=psi_func)

    @classmethod
    def hamiltonian(cls, grid: TorusGrid, psi_func: Callable,
                    b_func: Callable | None = None) -> "AdvectingField":
        """B = perp-grad of a 2 pi-periodic stream function."""
        x1, x2 = grid.mesh
        pts = np.stack([x1, x2], axis=-1)
        psi = np.asarray(psi_func(pts), float)
        if b_func is None:
            h = 1e-6

            def b_func(x, _p=psi_func, _h=h):
                x = np.asarray(x, float)
                e1 = np.zeros_like(x); e1[..., 0] = _h
                e2 = np.zeros_like(x); e2[..., 1] = _h
                d1 = (_p(x + e1) - _p(x - e1)) / (2 * _h)
                d2 = (_p(x + e2) - _p(x - e2)) / (2 * _h)
                return np.stack([-d2, d1], axis=-1)

        return cls("hamiltonian", grid, psi=psi, psi_func=psi_func, b_func=b_func)

    @classmethod
    def cellular(cls, grid: TorusGrid) -> "AdvectingField":
        """The sin(x) sin(y) cell flow; closed orbits inside each cell."""

        def psi_func(x):
            x = np.asarray(x, float)
            return np.sin(x[..., 0]) * np.sin(x[..., 1])

        def b_func(x):
            x = np.asarray(x, float)
            return np.stack([-np.sin(x[..., 0]) * np.cos(x[..., 1]),
                             np.cos(x[..., 0]) * np.sin(x[..., 1])], axis=-1)

        return cls.hamiltonian(grid, psi_func, b_func)

    # -- grid operators ------------------------------------------------------

    def b_dot_grad(self, values: np.ndarray) -> np.ndarray:
        """Directional derivative B.grad on grid samples.

        On the disk the rotation field gives exactly the angular derivative.
        """
        grid = self.grid
        if self.kind == "shear":
            return self.v_profile[None, :] * grid.d1(values)
        if self.kind == "rotation":
            return grid.d1(values)
        return self.b_samples[0] * grid.d1(values) + self.b_samples[1] * grid.d2(values)

    def advective_scale(self) -> float:
        """Spectral-radius estimate of (B.grad)^2 on this grid (for CFL)."""
        grid = self.grid
        k1max = grid.shape[0] // 2
        if self.kind == "shear":
            return float(np.max(self.v_profile ** 2) * k1max ** 2)
        if self.kind == "rotation":
            return float(k1max ** 2)
        k2max = grid.shape[1] // 2
        bmax2 = float(np.max(self.b_samples[0] ** 2 + self.b_samples[1] ** 2))
        return bmax2 * (k1max ** 2 + k2max ** 2)


@dataclass
class ScalarState:
    t: float
    g: ScalarField
    field: AdvectingField


def scalar_rhs(state: ScalarState) -> ScalarField:
    """(B.grad)^2 g on the grid."""
    f = state.field
    return ScalarField(f.grid, f.b_dot_grad(f.b_dot_grad(state.g.values)))


def cfl_limit_scalar(field: AdvectingField) -> float:
    """Largest step RK4 tolerates for (B.grad)^2 on this grid (with margin)."""
    return 2.5 / max(field.advective_scale(), 1e-14)


def step_scalar(state: ScalarState, dt: float) -> ScalarState:
    """One RK4 step; raises :class:`CflViolation` beyond the stability limit."""
    limit = cfl_limit_scalar(state.field)
    if dt > limit:
        raise CflViolation(f"dt = {dt:.3e} exceeds scalar stability limit {limit:.3e}")
    f = state.field
    y = state.g.values
    op = lambda v: f.b_dot_grad(f.b_dot_grad(v))  # noqa: E731
    k1 = op(y)
    k2 = op(y + 0.5 * dt * k1)
    k3 = op(y + 0.5 * dt * k2)
    k4 = op(y + dt * k3)
    g_new = ScalarField(f.grid, y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4))
    return replace(state, t=state.t + dt, g=g_new)


# ---------------------------------------------------------------------------
# exact shear solutions
# ---------------------------------------------------------------------------

def shear_exact_eigen(g0_1d: np.ndarray, v_profile: np.ndarray, lam: float,
                      t: float, grid, tol: float = 1e-8) -> ScalarField:
    """Closed-form shear solution for single-frequency initial data.

    Requires -d1^2 (g0 - mean) = lam^2 (g0 - mean); then
    g(x1, x2, t) = mean + exp(-lam^2 V(x2)^2 t) (g0(x1) - mean).
    """
    g0_1d = np.asarray(g0_1d, float)
    if g0_1d.shape != (grid.shape[0],):
        raise ValueError(f"g0 must be sampled on the {grid.shape[0]} x1 nodes")
    mean = float(np.mean(g0_1d))
    osc = g0_1d - mean
    resid = -spectral_derivative(osc, axis=0, order=2) - lam ** 2 * osc
    scale = max(float(np.max(np.abs(osc))), 1e-300)
    if np.max(np.abs(resid)) > tol * lam ** 2 * scale:
        raise NotEigenfunction(
            f"g0 - mean is not a lam^2 = {lam ** 2:g} eigenfunction of -d1^2 "
            f"(relative residual {np.max(np.abs(resid)) / (lam ** 2 * scale):.3e})")
    decay = np.exp(-lam ** 2 * np.asarray(v_profile, float) ** 2 * t)
    return ScalarField(grid, mean + osc[:, None] * decay[None, :])


def shear_exact_d2(g0_1d: np.ndarray, v_func: Callable, dv_func: Callable,
                   lam: float, t: float, grid) -> np.ndarray:
    """Exact cross-shear gradient of the eigen-solution:

    d2 g = -2 t lam^2 V(x2) V'(x2) exp(-lam^2 V^2 t) (g0 - mean).
    """
    g0_1d = np.asarray(g0_1d, float)
    osc = g0_1d - float(np.mean(g0_1d))
    v = np.asarray(v_func(grid.x2), float)
    dv = np.asarray(dv_func(grid.x2), float)
    env = -2.0 * t * lam ** 2 * v * dv * np.exp(-lam ** 2 * v ** 2 * t)
    return osc[:, None] * env[None, :]


# ---------------------------------------------------------------------------
# run loop and diagnostics
# ---------------------------------------------------------------------------

def shear_gbar(field: AdvectingField, g0: np.ndarray,
               v_zero_tol: float = 1e-12) -> np.ndarray:
    """Relaxation target for a shear field: x1-average where V != 0, g0 where V = 0."""
    vmax = float(np.max(np.abs(field.v_profile)))
    frozen = np.abs(field.v_profile) < v_zero_tol * max(vmax, 1e-300)
    target = np.broadcast_to(g0.mean(axis=0, keepdims=True), g0.shape).copy()
    target[:, frozen] = g0[:, frozen]
    return target


def run_scalar(field: AdvectingField, g0: np.ndarray, t_end: float,
               dt: float | None = None, n_samples: int = 101,
               gbar: np.ndarray | None = None, fit_tail: float = 0.5,
               keep_snapshots: bool = False,
               max_norm_order: int = 2) -> tuple[DiagSeries, list[np.ndarray]]:
    """Integrate the relaxation equation and record distances to the target.

    Columns: t, l2_dist, h1_dist, h2_dist, linf_g, l2_Bgrad, rate_fit; the
    rate_fit column is the log-slope of l2_dist over the trailing ``fit_tail``
    fraction of [0, t] (0 until two samples are available).
    """
    grid = field.grid
    g0 = np.asarray(g0, float)
    if dt is None:
        dt = 0.4 * cfl_limit_scalar(field)
    if gbar is None:
        if field.kind == "shear":
            gbar = shear_gbar(field, g0)
        elif field.kind == "rotation":
            gbar = np.broadcast_to(g0.mean(axis=0, keepdims=True), g0.shape).copy()
        else:
            raise ValueError("hamiltonian runs need an explicit gbar "
                             "(use orbit averaging)")

    state = ScalarState(0.0, ScalarField(grid, g0.copy()), field)
    sample_times = np.linspace(0.0, t_end, n_samples)
    series = DiagSeries()
    snapshots: list[np.ndarray] = []
    times: list[float] = []
    dists: list[float] = []

    def record(st: ScalarState):
        diff = st.g.values - gbar
        row = {"t": st.t,
               "l2_dist": grid.l2_norm(diff),
               "linf_g": float(np.max(np.abs(st.g.values))),
               "l2_Bgrad": grid.l2_norm(field.b_dot_grad(st.g.values))}
        for order, name in ((1, "h1_dist"), (2, "h2_dist")):
            if order <= max_norm_order:
                row[name] = sobolev_norm(diff, order, grid=grid)
            else:
                row[name] = float("nan")
        times.append(st.t)
        dists.append(row["l2_dist"])
        if len(times) >= 3 and st.t > 0:
            try:
                row["rate_fit"] = fit_log_slope(np.array(times), np.array(dists),
                                                t_min=(1.0 - fit_tail) * st.t)
            except ValueError:
                row["rate_fit"] = 0.0
        else:
            row["rate_fit"] = 0.0
        series.append(row)
        if keep_snapshots:
            snapshots.append(st.g.values.copy())

    record(state)
    for tq in sample_times[1:]:
        while state.t < tq - 1e-12:
            state = step_scalar(state, min(dt, tq - state.t))
        record(state)
    return series, snapshots


def h1_growth_experiment(eps: float, t_end: float = 40.0, c: float = 1.0,
                         n1: int = 16, n2: int = 64,
                         n_samples: int = 201) -> dict:
    """Transient H^1 growth for V = eps cos(x2), g0 = c + eps cos(x1) on the torus.

    Tracks ||d2 g|| from the solver and from the closed form, the growth
    factor relative to the first positive sample, and a log-log exponent fit.
    """
    grid = TorusGrid(n1, n2)
    field = AdvectingField.shear(grid, lambda y: eps * np.cos(y))
    x1 = grid.x1
    g0_1d = c + eps * np.cos(x1)
    g0 = np.broadcast_to(g0_1d[:, None], grid.shape).copy()

    state = ScalarState(0.0, ScalarField(grid, g0), field)
    dt = 0.4 * cfl_limit_scalar(field)
    sample_times = np.linspace(0.0, t_end, n_samples)
    series = DiagSeries()
    for i, tq in enumerate(sample_times):
        while state.t < tq - 1e-12:
            state = step_scalar(state, min(dt, tq - state.t))
        solver_d2 = grid.l2_norm(grid.d2(state.g.values))
        exact = shear_exact_d2(g0_1d, lambda y: eps * np.cos(y),
                               lambda y: -eps * np.sin(y), 1.0, state.t, grid)
        series.append({"t": state.t, "h1_solver": solver_d2,
                       "h1_exact": grid.l2_norm(exact)})

    t = series["t"]
    solver = series["h1_solver"]
    exact = series["h1_exact"]
    base = solver[1]
    peak_idx = int(np.argmax(solver))
    rel_err = float(np.max(np.abs(solver[1:] - exact[1:]) / np.max(exact)))
    alpha = fit_loglog_slope(t, solver, t_min=t[1], t_max=t[peak_idx])
    return {"series": series,
            "growth_factor": float(np.max(solver) / max(base, 1e-300)),
            "peak_time": float(t[peak_idx]),
            "solver_vs_exact": rel_err,
            "growth_exponent": alpha}


def nonvanishing_shear_decay(v_func: Callable, g0: np.ndarray, k: int,
                             t_end: float, grid: ChannelGrid | None = None,
                             n_samples: int = 161) -> dict:
    """Exponential relaxation to the x1-average for a shear with min|V| > 0.

    Returns the series, the fitted asymptotic L2 log-slope, the guaranteed
    rate -(1/2) c0^2 (with the unit x1 Poincare constant), and the sharp
    slowest per-mode rate -c0^2 k_min^2.
    """
    if grid is None:
        grid = ChannelGrid(32, 65, 0.0, 1.0)
    field = AdvectingField.shear(grid, v_func)
    c0 = float(np.min(np.abs(field.v_profile)))
    if c0 <= 0:
        raise ValueError("shear must be non-vanishing; use lp_relaxation_check")
    if k > 2:
        raise ValueError("distance norms recorded up to H^2 only")
    g0 = np.asarray(g0, float)
    series, snaps = run_scalar(field, g0, t_end, n_samples=n_samples,
                               max_norm_order=k, keep_snapshots=True)
    slope = fit_log_slope(series["t"], series["l2_dist"],
                          t_min=0.5 * t_end)
    mean0 = g0.mean(axis=0)
    mean_drift = max(float(np.max(np.abs(s.mean(axis=0) - mean0))) for s in snaps)
    return {"series": series,
            "measured_slope": slope,
            "guaranteed_rate": 0.5 * c0 ** 2,
            "sharp_rate": c0 ** 2,
            "mean_drift": mean_drift}


def lp_relaxation_check(v_func: Callable, g0: np.ndarray, p_list=(1, 2, 4),
                        t_end: float = 100.0, grid: ChannelGrid | None = None,
                        n_samples: int = 201, fit_window=(10.0, 100.0)) -> dict:
    """Relaxation to the piecewise target for shears that may vanish.

    Records L^p distances to the target (x1-average where V != 0, frozen g0
    where V = 0) and fits the log-log slope of the squared L^2 distance over
    ``fit_window``.
    """
    if grid is None:
        grid = ChannelGrid(16, 257, 0.0, 1.0)
    field = AdvectingField.shear(grid, v_func)
    g0 = np.asarray(g0, float)
    gbar = shear_gbar(field, g0)
    state = ScalarState(0.0, ScalarField(grid, g0.copy()), field)
    dt = 0.4 * cfl_limit_scalar(field)
    # log-spaced sampling resolves both the transient and the power-law tail
    sample_times = np.unique(np.concatenate(
        [[0.0], np.geomspace(max(t_end * 1e-3, 10 * dt), t_end, n_samples - 1)]))

    cols: dict[str, list[float]] = {"t": []}
    for p in p_list:
        cols[f"l{p}_dist"] = []
    for tq in sample_times:
        while state.t < tq - 1e-12:
            state = step_scalar(state, min(dt, tq - state.t))
        diff = np.abs(state.g.values - gbar)
        cols["t"].append(state.t)
        for p in p_list:
            cols[f"l{p}_dist"].append(grid.integrate(diff ** p) ** (1.0 / p))
    series = DiagSeries(cols)

    t = series["t"]
    l2 = series["l2_dist"] if 2 in p_list else None
    slope_sq = (fit_loglog_slope(t, l2 ** 2, t_min=fit_window[0],
                                 t_max=fit_window[1]) if l2 is not None else None)
    final = {f"l{p}_dist": float(series[f"l{p}_dist"][-1]) for p in p_list}
    initial = {f"l{p}_dist": float(series[f"l{p}_dist"][0]) for p in p_list}
    decreased = {p: final[f"l{p}_dist"] < 0.95 * initial[f"l{p}_dist"] for p in p_list}
    return {"series": series, "l2sq_loglog_slope": slope_sq,
            "final": final, "decreased": decreased}
