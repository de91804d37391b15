"""Scenario files, deterministic runs, sweeps, and the verification suites.

A scenario is a declarative TOML file::

    [scenario]
    name = "mre-decay-const-shear"
    kind = "mre-decay"          # selects the runner
    seed = 11
    slack = 1.1

    [grid]    # sizes for the runner's domain
    [time]    # dt, t_end, sampling cadence
    [params]  # physics parameters; profiles as named families

Profiles are named analytic families, never code: ``constant(c)``,
``linear(c0, slope)``, ``cos(eps)``, ``power(alpha)``, ``sinsin``.

Each run writes ``series.csv`` (module CSV schema), optional snapshots, and
``manifest.json`` with a scenario hash and per-assertion pass/fail.  Reruns
with the same scenario and seed reproduce the CSV byte-for-byte; random
streams come from numpy's seeded ``default_rng`` (PCG64).
"""

from __future__ import annotations

import hashlib
import json
import time as _time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from itertools import product
from pathlib import Path

import numpy as np

try:
    import tomllib
except ImportError:  # python < 3.11
    import tomli as tomllib

from . import __version__
from .diag import DiagSeries, fit_log_slope
from .elliptic import leray
from .errors import ConfigError, CriticalPoint, NoReturn, StepFailure
from .fields import ChannelField, sobolev_norm
from .grid import ChannelGrid, PolarGrid, TorusGrid
from .mre import (LinOpConfig, decay_bound_monitor, random_initial_field,
                  run_channel, semigroup_decay_experiment)
from .orbits import (OrbitAverage, build_gbar, detect_period,
                     heat_on_orbit_oracle, mb_membership,
                     orbit_mean_conservation, p0_class_decay_check,
                     torus_spectral_eval)
from .scalar import (AdvectingField, ScalarField, ScalarState,
                     cfl_limit_scalar, h1_growth_experiment,
                     lp_relaxation_check, nonvanishing_shear_decay,
                     run_scalar, shear_exact_eigen, step_scalar)
from .shear import ShearProfile
from .snapshots import write_snapshot

MRE_CSV_COLUMNS = ["t", "l2_B", "l2_u", "hk_fperp", "hk2_a", "hm_b",
                   "energy_defect", "ratio_fperp", "ratio_a", "ratio_m",
                   "ratio_u"]
SCALAR_CSV_COLUMNS = ["t", "l2_dist", "h1_dist", "h2_dist", "linf_g",
                      "l2_Bgrad", "rate_fit"]
ORBIT_CSV_COLUMNS = ["x0_1", "x0_2", "period", "shift_k1", "shift_k2",
                     "psi_value", "status"]


# ---------------------------------------------------------------------------
# scenario loading
# ---------------------------------------------------------------------------

@dataclass
class Scenario:
    name: str
    kind: str
    seed: int = 0
    slack: float = 1.1
    grid: dict = dc_field(default_factory=dict)
    time: dict = dc_field(default_factory=dict)
    params: dict = dc_field(default_factory=dict)
    out: str | None = None

    @classmethod
    def from_dict(cls, raw: dict, source: str = "<dict>") -> "Scenario":
        if not raw:
            raise ConfigError("empty scenario", path=source)
        sc = raw.get("scenario")
        if not isinstance(sc, dict):
            raise ConfigError("missing [scenario] table", path=source)
        for key in ("name", "kind"):
            if key not in sc:
                raise ConfigError(f"missing required key {key!r}",
                                  path=f"{source}:scenario")
        if sc["kind"] not in RUNNERS:
            raise ConfigError(
                f"unknown kind {sc['kind']!r}; known: {sorted(RUNNERS)}",
                path=f"{source}:scenario.kind")
        seed = sc.get("seed", 0)
        if not isinstance(seed, int):
            raise ConfigError("seed must be an integer",
                              path=f"{source}:scenario.seed")
        slack = float(sc.get("slack", 1.1))
        if slack <= 0:
            raise ConfigError("slack must be positive",
                              path=f"{source}:scenario.slack")
        dt = raw.get("time", {}).get("dt")
        if dt is not None and dt <= 0:
            raise ConfigError("dt must be positive", path=f"{source}:time.dt")
        return cls(name=str(sc["name"]), kind=str(sc["kind"]), seed=seed,
                   slack=slack, grid=dict(raw.get("grid", {})),
                   time=dict(raw.get("time", {})),
                   params=dict(raw.get("params", {})),
                   out=sc.get("out"))

    @classmethod
    def from_toml(cls, path) -> "Scenario":
        path = Path(path)
        if not path.exists():
            raise ConfigError("no such scenario file", path=str(path))
        try:
            raw = tomllib.loads(path.read_text())
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML: {exc}", path=str(path)) from exc
        return cls.from_dict(raw, source=str(path))

    def to_dict(self) -> dict:
        return {"scenario": {"name": self.name, "kind": self.kind,
                             "seed": self.seed, "slack": self.slack},
                "grid": self.grid, "time": self.time, "params": self.params}

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def shear_from_params(grid, spec: dict, path: str = "params.gamma") -> ShearProfile:
    """Instantiate a named shear family on the grid's x2 nodes."""
    if not isinstance(spec, dict) or "family" not in spec:
        raise ConfigError("profile must be a table with a 'family' key", path=path)
    family = spec["family"]
    try:
        if family == "constant":
            return ShearProfile.constant(grid, float(spec.get("c", 1.0)))
        if family == "linear":
            return ShearProfile.linear(grid, float(spec["c0"]), float(spec["slope"]))
        if family == "cos":
            return ShearProfile.cosine(grid, float(spec["eps"]))
        if family == "power":
            return ShearProfile.power(grid, float(spec["alpha"]))
    except KeyError as exc:
        raise ConfigError(f"family {family!r} is missing parameter {exc}",
                          path=path) from exc
    raise ConfigError(f"unknown profile family {family!r}", path=path)


def v_callable_from_params(spec: dict, path: str = "params.v"):
    """Analytic V(x2) for scalar shears (kept callable for exact orbits)."""
    if not isinstance(spec, dict) or "family" not in spec:
        raise ConfigError("profile must be a table with a 'family' key", path=path)
    family = spec["family"]
    try:
        if family == "constant":
            c = float(spec.get("c", 1.0))
            return lambda y: c * np.ones_like(np.asarray(y, float))
        if family == "linear":
            c0, slope = float(spec["c0"]), float(spec["slope"])
            return lambda y: c0 + slope * np.asarray(y, float)
        if family == "cos":
            eps = float(spec["eps"])
            return lambda y: eps * np.cos(np.asarray(y, float))
        if family == "power":
            alpha = float(spec["alpha"])
            return lambda y: np.asarray(y, float) ** alpha
    except KeyError as exc:
        raise ConfigError(f"family {family!r} is missing parameter {exc}",
                          path=path) from exc
    raise ConfigError(f"unknown profile family {family!r}", path=path)


# ---------------------------------------------------------------------------
# runners (one per scenario kind)
# ---------------------------------------------------------------------------

def _random_band_limited(grid: ChannelGrid, rng, kmax: int = 6, mmax: int = 6):
    """Random smooth vector field used by the projection suite."""
    x1, x2 = grid.mesh
    s2 = np.pi * (x2 - grid.x2_min) / (grid.x2_max - grid.x2_min)
    comps = []
    for _ in range(2):
        arr = np.zeros(grid.shape)
        for j in range(kmax + 1):
            for m in range(mmax + 1):
                a, b, c, d = rng.standard_normal(4) / (1.0 + j * j + m * m)
                arr += (a * np.cos(j * x1) + b * np.sin(j * x1)) \
                    * (c * np.cos(m * s2) + d * np.sin(m * s2))
        comps.append(arr)
    return ChannelField.from_components(grid, *comps)


def run_projection_suite(sc: Scenario, out_dir: Path) -> tuple[dict, dict]:
    """Projection algebra + Leray invariants on random band-limited fields."""
    from .fields import fluctuation, zonal_mean
    n_fields = int(sc.params.get("n_fields", 100))
    n1 = int(sc.grid.get("n1", 64))
    n2 = int(sc.grid.get("n2", 65))
    grid = ChannelGrid(n1, n2)
    rng = np.random.default_rng(sc.seed)
    spectral_tol = float(sc.params.get("spectral_tol", 1e-10))

    worst = {k: 0.0 for k in
             ("d1_p0", "p0_d2_commute", "p0_multiplier", "p0_pperp",
              "leray_d1_commute", "leray_p0_commute", "p0_leray_c2",
              "leray_tangent")}
    rows = DiagSeries()
    for i in range(n_fields):
        h = _random_band_limited(grid, rng)
        scale = max(h.l2_norm(), 1e-300)
        d = h.data
        worst["d1_p0"] = max(worst["d1_p0"],
                             float(np.max(np.abs(grid.d1(zonal_mean(d))))) / scale)
        worst["p0_d2_commute"] = max(worst["p0_d2_commute"], float(np.max(np.abs(
            zonal_mean(grid.d2(d)) - grid.d2(zonal_mean(d))))) / scale)
        mult = 1.0 + grid.x2 ** 2
        worst["p0_multiplier"] = max(worst["p0_multiplier"], float(np.max(np.abs(
            zonal_mean(mult[None, :] * d[0]) - mult[None, :] * zonal_mean(d[0])))) / scale)
        worst["p0_pperp"] = max(worst["p0_pperp"],
                                float(np.max(np.abs(zonal_mean(fluctuation(d))))) / scale)
        ph = leray(h)
        lp_d1 = leray(ChannelField(grid, grid.d1(d)))
        worst["leray_d1_commute"] = max(worst["leray_d1_commute"], ChannelField(
            grid, lp_d1.data - grid.d1(ph.data)).l2_norm() / scale)
        lp_p0 = leray(ChannelField(grid, zonal_mean(d)))
        worst["leray_p0_commute"] = max(worst["leray_p0_commute"], ChannelField(
            grid, lp_p0.data - zonal_mean(ph.data)).l2_norm() / scale)
        worst["p0_leray_c2"] = max(worst["p0_leray_c2"],
                                   float(np.max(np.abs(ph.c2.mean(axis=0)))) / scale)
        worst["leray_tangent"] = max(worst["leray_tangent"],
                                     float(np.max(np.abs(ph.c2[:, [0, -1]]))) / scale)
        rows.append({"field": float(i), **worst})

    # FD-direction convergence under refinement: Leray idempotence defect
    defects = []
    for n2r in (33, 65, 129):
        gr = ChannelGrid(64, n2r)
        hr = _random_band_limited(gr, np.random.default_rng(sc.seed + 1))
        p1 = leray(hr)
        p2 = leray(p1)
        defects.append(ChannelField(gr, p2.data - p1.data).l2_norm() / hr.l2_norm())
    orders = [float(np.log2(defects[i] / defects[i + 1])) for i in range(2)]

    rows.to_csv(out_dir / "series.csv")
    spectral_keys = ("d1_p0", "p0_multiplier", "p0_pperp", "leray_d1_commute",
                     "leray_p0_commute", "leray_tangent")
    assertions = {
        "spectral_identities": all(worst[k] <= spectral_tol for k in spectral_keys),
        "fd_identities_small": worst["p0_d2_commute"] <= 1e-10
        and worst["p0_leray_c2"] <= 10.0 * grid.h2 ** 2,
        "fd_order_ge_1.9": min(orders) >= 1.9,
    }
    return assertions, {"worst": worst, "idempotence_defects": defects,
                        "refinement_orders": orders}


def _mre_common(sc: Scenario):
    grid = ChannelGrid(int(sc.grid.get("n1", 64)), int(sc.grid.get("n2", 65)))
    shear = shear_from_params(grid, sc.params.get("gamma", {"family": "constant"}))
    eps = float(sc.params.get("eps", 1e-3))
    b0 = random_initial_field(grid, eps, seed=sc.seed)
    return grid, shear, eps, b0


def run_mre_decay(sc: Scenario, out_dir: Path) -> tuple[dict, dict]:
    """Nonlinear run with all decay-envelope ratios monitored."""
    grid, shear, eps, b0 = _mre_common(sc)
    t_end = float(sc.time.get("t_end", 30.0))
    dt = float(sc.time.get("dt", 0.05))
    k_order = int(sc.params.get("k_order", 3))
    series, states = run_channel(shear, b0, t_end, dt=dt,
                                 sample_every=int(sc.time.get("sample_every", 2)),
                                 k_order=k_order, keep_states=True)
    series = decay_bound_monitor(series, eps, shear.c0)
    series.select(MRE_CSV_COLUMNS).to_csv(out_dir / "series.csv")
    snap_every = int(sc.time.get("snapshot_every", max(1, len(states) // 8)))
    for st in states[::snap_every]:
        write_snapshot(out_dir / f"b_t{st.t:08.3f}.mrl", st.b.data)

    slack = sc.slack
    ratios = {c: float(np.max(series[c]))
              for c in ("ratio_fperp", "ratio_a", "ratio_m", "ratio_u")}
    l2b = series["l2_B"]
    assertions = {
        "ratio_fperp_le_slack": ratios["ratio_fperp"] <= slack,
        "ratio_a_le_slack": ratios["ratio_a"] <= slack,
        "ratio_m_le_slack": ratios["ratio_m"] <= slack,
        "ratio_u_le_slack": ratios["ratio_u"] <= slack,
        "final_x1_independent": float(series["hk_fperp"][-1]) <= 1e-2 * eps,
        "energy_monotone": bool(np.all(np.diff(l2b) <= 1e-12 * l2b[0])),
    }
    return assertions, {"ratios": ratios, "eps": eps, "c0": shear.c0,
                        "final_hk_fperp_over_eps": float(series["hk_fperp"][-1]) / eps,
                        "max_div_drift": float(np.max(series["div_drift"]))}


def run_mre_energy(sc: Scenario, out_dir: Path) -> tuple[dict, dict]:
    """Energy-identity check along a nonlinear run."""
    grid, shear, eps, b0 = _mre_common(sc)
    t_end = float(sc.time.get("t_end", 20.0))
    dt = float(sc.time.get("dt", 0.05))
    series, _ = run_channel(shear, b0, t_end, dt=dt,
                            sample_every=int(sc.time.get("sample_every", 2)))
    series = decay_bound_monitor(series, eps, shear.c0)
    series.select(MRE_CSV_COLUMNS).to_csv(out_dir / "series.csv")
    tol = 1e-6 * float(series["l2_B"][0]) ** 2
    worst = float(np.max(series["energy_defect"][1:]))
    return ({"energy_defect_le_tol": worst <= tol},
            {"worst_defect": worst, "tol": tol})


def run_mre_semigroup(sc: Scenario, out_dir: Path) -> tuple[dict, dict]:
    """Linearized decay: first-mode rate and the 5/8 envelope."""
    n1 = int(sc.grid.get("n1", 16))
    n2 = int(sc.grid.get("n2", 33))
    grid = ChannelGrid(n1, n2)
    shear = shear_from_params(grid, sc.params.get("gamma", {"family": "constant"}))
    x1, x2 = grid.mesh
    psi = np.sin(x1) * np.sin(np.pi * (x2 + 1.0))
    f0 = ChannelField.from_stream(grid, psi)
    f0 = ChannelField(grid, 1e-3 * f0.data / f0.l2_norm())
    t_end = float(sc.time.get("t_end", 10.0))
    cfg = LinOpConfig(shear=shear)
    series = semigroup_decay_experiment(f0, cfg, t_end=t_end,
                                        n_samples=int(sc.time.get("n_samples", 101)))
    series.to_csv(out_dir / "series.csv")
    t = series["t"]
    l2 = series["l2_f"]
    rate = -fit_log_slope(t, l2, t_min=min(1.0, 0.5 * t_end))
    r = (shear.c0 / 1.0) ** 2
    envelope = l2[0] * np.exp(-0.625 * r * t)
    envelope_ok = bool(np.all(l2 <= envelope * (1.0 + 1e-9)))
    return ({"rate_within_1pct": abs(rate - shear.c0 ** 2) <= 0.01 * shear.c0 ** 2,
             "envelope_dominates": envelope_ok},
            {"measured_rate": rate, "envelope_rate": 0.625 * r})


def run_scalar_const(sc: Scenario, out_dir: Path) -> tuple[dict, dict]:
    """Non-vanishing shear relaxation on the channel."""
    grid = ChannelGrid(int(sc.grid.get("n1", 32)), int(sc.grid.get("n2", 65)),
                       0.0, 1.0)
    v_func = v_callable_from_params(sc.params.get("v", {"family": "constant",
                                                        "c": 0.5}))
    rng = np.random.default_rng(sc.seed)
    x1, x2 = grid.mesh
    g0 = np.zeros(grid.shape)
    for j in range(1, 4):
        a, b = rng.standard_normal(2) / (j * j)
        g0 += (a * np.cos(j * x1) + b * np.sin(j * x1)) * np.cos((j - 1) * np.pi * x2)
    report = nonvanishing_shear_decay(v_func, g0, k=2,
                                      t_end=float(sc.time.get("t_end", 40.0)),
                                      grid=grid)
    report["series"].select(SCALAR_CSV_COLUMNS).to_csv(out_dir / "series.csv")
    c0 = float(np.min(np.abs(v_func(grid.x2))))
    assertions = {
        "slope_at_least_half_c0sq": report["measured_slope"] <= -0.5 * c0 ** 2 + 1e-9,
        "x1_mean_conserved": report["mean_drift"] <= 1e-8,
    }
    return assertions, {k: report[k] for k in
                        ("measured_slope", "guaranteed_rate", "sharp_rate",
                         "mean_drift")}


def run_scalar_growth(sc: Scenario, out_dir: Path) -> tuple[dict, dict]:
    """Explicit shear solution on the torus + transient gradient growth."""
    n = int(sc.grid.get("n1", 64))
    eps = float(sc.params.get("eps", 0.5))
    c = float(sc.params.get("c", 1.0))
    t_end = float(sc.time.get("t_end", 10.0))
    grid = TorusGrid(n, n)
    field = AdvectingField.shear(grid, lambda y: eps * np.cos(y))
    g0_1d = c + eps * np.cos(grid.x1)
    g0 = np.broadcast_to(g0_1d[:, None], grid.shape).copy()
    gbar = np.broadcast_to(g0.mean(axis=0, keepdims=True), grid.shape).copy()
    series, snaps = run_scalar(field, g0, t_end, gbar=gbar,
                               n_samples=int(sc.time.get("n_samples", 51)),
                               keep_snapshots=True)
    series.select(SCALAR_CSV_COLUMNS).to_csv(out_dir / "series.csv")
    sup_err = 0.0
    for tq, snap in zip(series["t"], snaps):
        exact = shear_exact_eigen(g0_1d, eps * np.cos(grid.x2), 1.0, tq, grid)
        sup_err = max(sup_err, float(np.max(np.abs(snap - exact.values))))
    growth = h1_growth_experiment(eps, t_end=float(sc.params.get("growth_t_end", 40.0)))
    growth["series"].to_csv(out_dir / "growth.csv")
    assertions = {
        "sup_error_le_1e-4": sup_err <= 1e-4,
        "h1_growth_factor_ge_3": growth["growth_factor"] >= 3.0,
        "growth_oracle_agrees": growth["solver_vs_exact"] <= 1e-4,
    }
    return assertions, {"sup_error": sup_err,
                        "growth_factor": growth["growth_factor"],
                        "growth_exponent": growth["growth_exponent"],
                        "solver_vs_exact": growth["solver_vs_exact"]}


def run_scalar_power(sc: Scenario, out_dir: Path) -> tuple[dict, dict]:
    """Degenerate power-law shear: polynomial relaxation rates.

    Asserts the documented -1/alpha log-log slope for the squared L2
    distance; the per-row heat kernel predicts -1/(2 alpha) instead, so the
    measured value and the alternative prediction are both reported.
    """
    alpha = float(sc.params.get("alpha", 1.0))
    grid = ChannelGrid(int(sc.grid.get("n1", 16)), int(sc.grid.get("n2", 257)),
                       0.0, 1.0)
    x1, _ = grid.mesh
    g0 = np.sin(x1)
    t_end = float(sc.time.get("t_end", 100.0))
    report = lp_relaxation_check(lambda y: np.asarray(y, float) ** alpha, g0,
                                 t_end=t_end, grid=grid,
                                 fit_window=(10.0, t_end))
    report["series"].to_csv(out_dir / "series.csv")
    slope = report["l2sq_loglog_slope"]
    target = -1.0 / alpha
    assertions = {
        "l2sq_slope_matches_minus_1_over_alpha":
            abs(slope - target) <= 0.1 * abs(target),
        "lp_distances_decrease": all(report["decreased"].values()),
    }
    return assertions, {"alpha": alpha, "measured_l2sq_slope": slope,
                        "asserted_slope": target,
                        "heat_kernel_slope": -0.5 / alpha,
                        "final": report["final"]}


def run_disk_rotation(sc: Scenario, out_dir: Path) -> tuple[dict, dict]:
    """Disk rotation: per-radius oracle, periods, and the unit decay rate."""
    ntheta = int(sc.grid.get("ntheta", 64))
    nr = int(sc.grid.get("nr", 32))
    t_end = float(sc.time.get("t_end", 5.0))
    grid = PolarGrid(ntheta, nr)
    field = AdvectingField.rotation(grid)
    tg, rg = grid.mesh
    g0 = rg ** 2 * np.cos(tg)
    series, snaps = run_scalar(field, g0, t_end,
                               n_samples=int(sc.time.get("n_samples", 51)),
                               keep_snapshots=True)
    series.select(SCALAR_CSV_COLUMNS).to_csv(out_dir / "series.csv")

    # per-radius oracle: the orbit through (r, 0) is the grid circle
    rng = np.random.default_rng(sc.seed)
    orbit_rows = DiagSeries()
    periods = []
    radii_idx = range(0, nr, max(1, nr // 8))
    oracle_err = 0.0
    for j in radii_idx:
        r = grid.r[j]
        orbit = detect_period(np.array([r, 0.0]), field, n_samples=ntheta)
        periods.append(orbit.period)
        for tq, snap in zip(series["t"], snaps):
            oracle = heat_on_orbit_oracle(
                lambda pts: (pts[:, 0] ** 2 + pts[:, 1] ** 2)
                * np.cos(np.arctan2(pts[:, 1], pts[:, 0])), orbit, tq)
            # orbit samples start at theta = 0 and are theta-uniform
            oracle_err = max(oracle_err, float(np.max(np.abs(snap[:, j] - oracle))))
        orbit_rows.append({"x0_1": r, "x0_2": 0.0, "period": orbit.period,
                           "shift_k1": 0, "shift_k2": 0,
                           "psi_value": 0.5 * r * r, "status": 0})
    orbit_rows.to_csv(out_dir / "orbits.csv")

    n_seeds = int(sc.params.get("n_period_seeds", 50))
    worst_period = 0.0
    for _ in range(n_seeds):
        r = rng.uniform(0.1, 0.95)
        th = rng.uniform(0.0, 2 * np.pi)
        orb = detect_period(np.array([r * np.cos(th), r * np.sin(th)]), field)
        worst_period = max(worst_period, abs(orb.period - 2 * np.pi))

    rate = -fit_log_slope(series["t"], series["l2_dist"], t_min=0.5 * t_end)
    assertions = {
        "oracle_uniform_error_le_1e-4": oracle_err <= 1e-4,
        "periods_2pi_within_1e-6": worst_period <= 1e-6,
        "decay_rate_1_within_2pct": abs(rate - 1.0) <= 0.02,
    }
    return assertions, {"oracle_err": oracle_err, "worst_period_err": worst_period,
                        "measured_rate": rate}


def run_cellular_annulus(sc: Scenario, out_dir: Path) -> tuple[dict, dict]:
    """Cell-flow annulus: bounded periods, decay envelope, mean conservation."""
    n = int(sc.grid.get("n1", 64))
    n_solver = int(sc.grid.get("n_solver", 128))
    psi_lo = float(sc.params.get("psi_lo", 0.3))
    psi_hi = float(sc.params.get("psi_hi", 0.8))
    grid = TorusGrid(n, n)
    field = AdvectingField.cellular(grid)
    region = (field.psi >= psi_lo) & (field.psi <= psi_hi)

    def g0_func(pts):
        pts = np.asarray(pts, float)
        return np.sin(pts[..., 0])

    gbar = build_gbar(g0_func, field, mask=region, s_max=500.0)
    resolved = region & (gbar.status == OrbitAverage.PERIODIC)
    ell_max = float(np.nanmax(gbar.periods[resolved]))
    t_end = float(sc.time.get("t_end", 3.0 * (ell_max / (2 * np.pi)) ** 2))

    # quadrature points and orbit-average targets live on the detection grid;
    # the PDE itself runs on a finer grid (separatrix filamentation outside
    # the region otherwise aliases into it) and is sampled spectrally at the
    # quadrature points
    pts_quad = np.stack(grid.mesh, axis=-1)[resolved]
    target = gbar.values[resolved]
    cell_area = (2 * np.pi / n) ** 2

    grid_s = TorusGrid(n_solver, n_solver)
    field_s = AdvectingField.cellular(grid_s)
    x1s, _ = grid_s.mesh
    state = ScalarState(0.0, ScalarField(grid_s, np.sin(x1s)), field_s)
    dt = 0.4 * cfl_limit_scalar(field_s)
    n_samples = int(sc.time.get("n_samples", 61))
    sample_times = np.linspace(0.0, t_end, n_samples)
    dists, snaps = [], []
    for tq in sample_times:
        while state.t < tq - 1e-12:
            state = step_scalar(state, min(dt, tq - state.t))
        vals = torus_spectral_eval(state.g.values, pts_quad)
        dists.append(float(np.sqrt(cell_area * np.sum((vals - target) ** 2))))
        snaps.append(state.g.values.copy())
    dists = np.asarray(dists)

    check = p0_class_decay_check(sample_times, dists, ell_max, slack=sc.slack)
    series = DiagSeries({"t": sample_times, "l2_dist": dists,
                         "envelope": check["envelope"],
                         "curve_linear_rate": check["curve_linear_rate"],
                         "curve_double_linear_rate": check["curve_double_linear_rate"]})
    series.to_csv(out_dir / "series.csv")
    write_snapshot(out_dir / "region_mask.mrl", resolved.astype(float))

    # conservation of orbit means along the run
    rng = np.random.default_rng(sc.seed)
    orbits = []
    orbit_rows = DiagSeries()
    attempts = 0
    while len(orbits) < int(sc.params.get("n_orbits", 12)) and attempts < 100:
        attempts += 1
        pt = rng.uniform(0.0, np.pi, size=2)
        pval = float(np.sin(pt[0]) * np.sin(pt[1]))
        if not (psi_lo <= pval <= psi_hi):
            continue
        try:
            orb = detect_period(pt, field, s_max=500.0)
        except (NoReturn, CriticalPoint, StepFailure):
            continue
        orbits.append(orb)
        orbit_rows.append({"x0_1": pt[0], "x0_2": pt[1], "period": orb.period,
                           "shift_k1": orb.lattice_shift[0],
                           "shift_k2": orb.lattice_shift[1],
                           "psi_value": pval, "status": 0})
    orbit_rows.to_csv(out_dir / "orbits.csv")
    cons = orbit_mean_conservation(sample_times, snaps, orbits,
                                   torus_spectral_eval)
    psi_drift = max(o.psi_drift for o in orbits) if orbits else float("nan")

    assertions = {
        "all_sampled_orbits_periodic": len(orbits) > 0
        and int(np.sum(resolved)) == int(np.sum(region)),
        "decay_below_envelope": check["pass"],
        "orbit_means_conserved_1e-5": cons["max_drift"] <= 1e-5,
        "psi_conserved_1e-8": psi_drift <= 1e-8,
    }
    return assertions, {"ell_max": ell_max, "t_end": t_end,
                        "worst_envelope_ratio": check["worst_ratio"],
                        "max_mean_drift": cons["max_drift"],
                        "n_region_points": int(np.sum(region)),
                        "n_unresolved": int(np.sum(region) - np.sum(resolved)),
                        "max_psi_drift": psi_drift}


def run_mb_class(sc: Scenario, out_dir: Path) -> tuple[dict, dict]:
    """Zero-orbit-mean class: construction, counterexample, discrete Poincare."""
    rng = np.random.default_rng(sc.seed)
    pgrid = PolarGrid(int(sc.grid.get("ntheta", 64)), int(sc.grid.get("nr", 32)))
    disk = AdvectingField.rotation(pgrid)

    def disk_member(coeff_f, coeff_h, idx):
        def g(pts):
            pts = np.asarray(pts, float)
            psi = 0.5 * (pts[..., 0] ** 2 + pts[..., 1] ** 2)
            a = sum(c * psi ** j for j, c in enumerate(coeff_f))
            b_i = -pts[..., 1] if idx == 0 else pts[..., 0]
            xi = pts[..., idx]
            h = sum(c * np.cos((j + 1) * xi) + c * np.sin((j + 1) * xi)
                    for j, c in enumerate(coeff_h))
            return a * b_i * h
        return g

    seeds = [np.array([r * np.cos(th), r * np.sin(th)])
             for r, th in zip(rng.uniform(0.15, 0.95, 8),
                              rng.uniform(0, 2 * np.pi, 8))]
    g_disk = disk_member([0.3, 1.0], [1.0, 0.2], 0)
    rep_disk = mb_membership(g_disk, disk, seeds)
    rep_one = mb_membership(lambda pts: np.ones(np.asarray(pts).shape[:-1]),
                            disk, seeds)

    tgrid = TorusGrid(int(sc.grid.get("n1", 64)))
    cell = AdvectingField.cellular(tgrid)

    def g_cell(pts):
        pts = np.asarray(pts, float)
        psi = np.sin(pts[..., 0]) * np.sin(pts[..., 1])
        b1 = -np.sin(pts[..., 0]) * np.cos(pts[..., 1])
        return (1.0 + 0.5 * psi) * b1 * np.cos(pts[..., 0])

    cell_seeds = []
    while len(cell_seeds) < 6:
        pt = rng.uniform(0.0, np.pi, size=2)
        if 0.3 <= np.sin(pt[0]) * np.sin(pt[1]) <= 0.8:
            cell_seeds.append(pt)
    rep_cell = mb_membership(g_cell, cell, cell_seeds, s_max=500.0)

    # discrete Poincare inequality on the disk (ell_max = 2 pi => constant 1)
    n_samples = int(sc.params.get("n_poincare_samples", 200))
    worst_quotient = 0.0
    tg, rg = pgrid.mesh
    pts_grid = np.stack([rg * np.cos(tg), rg * np.sin(tg)], axis=-1)
    for _ in range(n_samples):
        coeff_f = rng.standard_normal(3)
        coeff_h = rng.standard_normal(2)
        idx = int(rng.integers(0, 2))
        gv = disk_member(coeff_f, coeff_h, idx)(pts_grid)
        num = pgrid.l2_norm(gv)
        den = pgrid.l2_norm(pgrid.d1(gv))  # B.grad = d/dtheta for rotation
        if den > 1e-14:
            worst_quotient = max(worst_quotient, num / den)

    DiagSeries({"max_orbit_mean": [rep_disk["max_orbit_mean"],
                                   rep_cell["max_orbit_mean"],
                                   rep_one["max_orbit_mean"]],
                "integral_ratio": [rep_disk["integral_ratio"],
                                   rep_cell["integral_ratio"],
                                   rep_one["integral_ratio"]]}
               ).to_csv(out_dir / "series.csv")
    assertions = {
        "disk_member_orbit_means_le_1e-6": rep_disk["max_orbit_mean"] <= 1e-6,
        "cell_member_orbit_means_le_1e-6": rep_cell["max_orbit_mean"] <= 1e-6,
        "members_integral_finite": rep_disk["verdict"] == "finite"
        and rep_cell["verdict"] == "finite",
        "constant_fails_orbit_mean": rep_one["max_orbit_mean"] > 0.5,
        "discrete_poincare_holds": worst_quotient <= 1.0 * (1.0 + 1e-2),
    }
    return assertions, {"disk": {k: rep_disk[k] for k in
                                 ("max_orbit_mean", "integral_ratio", "verdict")},
                        "cellular": {k: rep_cell[k] for k in
                                     ("max_orbit_mean", "integral_ratio", "verdict")},
                        "worst_poincare_quotient": worst_quotient}


RUNNERS = {
    "projections": run_projection_suite,
    "mre-decay": run_mre_decay,
    "mre-energy": run_mre_energy,
    "mre-semigroup": run_mre_semigroup,
    "shear-const": run_scalar_const,
    "shear-cos-growth": run_scalar_growth,
    "shear-power-alpha": run_scalar_power,
    "disk-rotation": run_disk_rotation,
    "cellular-annulus": run_cellular_annulus,
    "mb-class": run_mb_class,
}

VERIFY_SUITES = {
    "projections": ["projections"],
    "mre": ["mre-energy", "mre-decay-const-shear", "mre-decay-tilted-shear",
            "mre-semigroup"],
    "scalar": ["shear-const", "shear-cos-growth", "shear-power-1",
               "shear-power-2"],
    "orbits": ["disk-rotation", "cellular-annulus", "mb-class"],
}
VERIFY_SUITES["all"] = sum(VERIFY_SUITES.values(), [])


def scenario_dir() -> Path:
    """Directory of the scenario files shipped with the repository."""
    return Path(__file__).resolve().parents[2] / "scenarios"


def run(scenario: Scenario | str | Path, out_dir=None, seed: int | None = None,
        slack: float | None = None) -> dict:
    """Execute a scenario; returns the manifest (also written as JSON)."""
    if not isinstance(scenario, Scenario):
        scenario = Scenario.from_toml(scenario)
    if seed is not None:
        scenario.seed = seed
    if slack is not None:
        scenario.slack = slack
    out_dir = Path(out_dir or scenario.out or f"runs/{scenario.name}")
    out_dir.mkdir(parents=True, exist_ok=True)

    started = _time.time()
    assertions, metrics = RUNNERS[scenario.kind](scenario, out_dir)
    manifest = {
        "name": scenario.name,
        "kind": scenario.kind,
        "scenario_hash": scenario.hash(),
        "code_version": __version__,
        "seed": scenario.seed,
        "slack": scenario.slack,
        "started": started,
        "finished": _time.time(),
        "assertions": assertions,
        "metrics": metrics,
        "passed": all(assertions.values()),
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=float)
    return manifest


def sweep(template: Scenario | str | Path, grid: dict[str, list],
          out_root=None, max_workers: int = 4) -> list[dict]:
    """Cartesian-product parameter sweep; per-run failures are collected."""
    if not isinstance(template, Scenario):
        template = Scenario.from_toml(template)
    keys = list(grid)
    combos = list(product(*(grid[k] for k in keys))) if keys else []
    out_root = Path(out_root or f"runs/{template.name}-sweep")

    def one(combo):
        sc = Scenario.from_dict(template.to_dict(), source="<sweep>")
        label = []
        for key, val in zip(keys, combo):
            _assign(sc, key, val)
            label.append(f"{key.split('.')[-1]}={val}")
        sc.name = f"{template.name}[{','.join(label)}]"
        try:
            return run(sc, out_dir=out_root / "-".join(label))
        except Exception as exc:  # noqa: BLE001 - collected, not fatal
            return {"name": sc.name, "error": f"{type(exc).__name__}: {exc}",
                    "passed": False}

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        manifests = list(pool.map(one, combos))
    with open(out_root / "sweep.json", "w") as fh:
        json.dump(manifests, fh, indent=2, sort_keys=True, default=float)
    return manifests


def _assign(sc: Scenario, dotted: str, value):
    """Assign a dotted parameter path ('eps', 'gamma.slope', 'time.dt')."""
    parts = dotted.split(".")
    if parts[0] in ("time", "grid"):
        table = getattr(sc, parts[0])
        parts = parts[1:]
    elif parts[0] == "seed":
        sc.seed = int(value)
        return
    elif parts[0] == "slack":
        sc.slack = float(value)
        return
    else:
        table = sc.params
        if parts[0] == "params":
            parts = parts[1:]
    for key in parts[:-1]:
        table = table.setdefault(key, {})
        if not isinstance(table, dict):
            raise ConfigError(f"cannot descend into {dotted!r}")
    table[parts[-1]] = value


def verify(suite: str, out_root=None, seed: int | None = None,
           slack: float | None = None) -> tuple[bool, list[dict]]:
    """Run every shipped scenario of a suite; print one line per scenario."""
    if suite not in VERIFY_SUITES:
        raise ConfigError(f"unknown suite {suite!r}; known: {sorted(VERIFY_SUITES)}")
    out_root = Path(out_root or "runs/verify")
    manifests = []
    all_ok = True
    for name in VERIFY_SUITES[suite]:
        path = scenario_dir() / f"{name}.toml"
        try:
            manifest = run(path, out_dir=out_root / name, seed=seed, slack=slack)
        except Exception as exc:  # noqa: BLE001 - reported per scenario
            manifest = {"name": name, "error": f"{type(exc).__name__}: {exc}",
                        "passed": False}
        manifests.append(manifest)
        status = "PASS" if manifest.get("passed") else "FAIL"
        detail = manifest.get("error", "")
        if not manifest.get("passed") and "assertions" in manifest:
            failed = [k for k, v in manifest["assertions"].items() if not v]
            detail = "failed: " + ", ".join(failed)
        print(f"{status:4s} {name} {detail}".rstrip())
        all_ok &= bool(manifest.get("passed"))
    return all_ok, manifests
