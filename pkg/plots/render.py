#!/usr/bin/env python3
"""Render run CSVs into decay figures: semilog/log-log curves with
theoretical envelopes, slope annotations, and orbit-period histograms.

Figures are pure functions of the CSV inputs; nothing is recomputed from
the simulation. Only the documented CSV schema is read.

    python3 plots/render.py --csv runs/decay/series.csv \
        --columns l2_B,hk_fperp --envelope "0.003*exp(-0.625*t)" --out fig.png
"""

from __future__ import annotations

import argparse
import csv
import re
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


class PlotError(Exception):
    """Clean, user-facing rendering error."""


class MissingColumnError(PlotError):
    def __init__(self, missing, available):
        super().__init__(f"missing column(s) {sorted(missing)}; "
                         f"available: {sorted(available)}")


def read_csv_columns(path) -> dict[str, np.ndarray]:
    """Read a headed CSV of floats into named columns."""
    path = Path(path)
    if not path.exists():
        raise PlotError(f"no such file: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PlotError(f"empty CSV: {path}") from None
        cols: dict[str, list[float]] = {name: [] for name in header}
        for row in reader:
            for name, val in zip(header, row):
                cols[name].append(float(val))
    if not any(cols.values()):
        raise PlotError(f"CSV has a header but no rows: {path}")
    return {name: np.asarray(vals) for name, vals in cols.items()}


_ENVELOPE_EXP = re.compile(
    r"^\s*([-+0-9.eE]+)\s*\*\s*exp\(\s*(-?[0-9.eE+-]+)\s*\*\s*t\s*\)\s*$")
_ENVELOPE_POW = re.compile(
    r"^\s*([-+0-9.eE]+)\s*\*\s*t\s*\*\*\s*(-?[0-9.eE+-]+)\s*$")


def parse_envelope(formula: str):
    """Parse 'A*exp(-r*t)' or 'A*t**p' into (callable, label, kind)."""
    m = _ENVELOPE_EXP.match(formula)
    if m:
        a, r = float(m.group(1)), float(m.group(2))
        return (lambda t: a * np.exp(r * t),
                f"${a:g}\\,e^{{{r:g} t}}$", "exp")
    m = _ENVELOPE_POW.match(formula)
    if m:
        a, p = float(m.group(1)), float(m.group(2))
        return (lambda t: a * np.where(t > 0, t, np.nan) ** p,
                f"${a:g}\\,t^{{{p:g}}}$", "power")
    raise PlotError(f"cannot parse envelope {formula!r}; "
                    "expected 'A*exp(-r*t)' or 'A*t**p'")


def _require(cols: dict, names) -> None:
    missing = [n for n in names if n not in cols]
    if missing:
        raise MissingColumnError(missing, cols.keys())


def _fit_slope(x, y):
    mask = (y > 0) & np.isfinite(y) & np.isfinite(x)
    if mask.sum() < 2:
        return None
    return float(np.polyfit(x[mask], np.log(y[mask]), 1)[0])


def plot_decay(csv_path, out_path, columns=None, envelope=None,
               loglog=False, title=None) -> Path:
    """Semilog (or log-log) decay figure with optional envelope and slope.

    The slope annotation is d(log y)/dt on a semilog plot and the log-log
    slope d(log y)/d(log t) when ``loglog`` is set, fitted over the second
    half of the time axis.
    """
    cols = read_csv_columns(csv_path)
    _require(cols, ["t"])
    t = cols["t"]
    if columns is None:
        columns = [n for n in cols if n != "t"]
    _require(cols, columns)

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    tail = t >= 0.5 * t[-1]
    for name in columns:
        y = cols[name]
        if loglog:
            slope = _fit_slope(np.log(np.where(t > 0, t, np.nan))[tail], y[tail])
            ax.loglog(t, y, label=_slope_label(name, slope, "t^"))
        else:
            slope = _fit_slope(t[tail], y[tail])
            ax.semilogy(t, y, label=_slope_label(name, slope, "rate "))
    if envelope is not None:
        env_fn, env_label, _ = parse_envelope(envelope)
        ax.plot(t, env_fn(t), "k--", label=f"envelope {env_label}")
    ax.set_xlabel("t")
    ax.set_ylabel("value")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out_path


def _slope_label(name, slope, prefix):
    return name if slope is None else f"{name} ({prefix}{slope:.3g})"


def plot_ratio(csv_path, out_path, columns=None, bound=1.0, title=None) -> Path:
    """Bound-ratio figure: ratio columns against the admissible level."""
    cols = read_csv_columns(csv_path)
    _require(cols, ["t"])
    if columns is None:
        columns = [n for n in cols if n.startswith("ratio_")]
        if not columns:
            raise MissingColumnError(["ratio_*"], cols.keys())
    _require(cols, columns)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for name in columns:
        ax.plot(cols["t"], cols[name], label=name)
    ax.axhline(bound, color="k", linestyle="--", label=f"bound {bound:g}")
    ax.set_xlabel("t")
    ax.set_ylabel("measured / envelope")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out_path


def plot_period_histogram(csv_path, out_path, bins=20, title=None) -> Path:
    """Histogram of orbit periods from an orbit-table CSV."""
    cols = read_csv_columns(csv_path)
    _require(cols, ["period"])
    periods = cols["period"]
    periods = periods[np.isfinite(periods)]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.hist(periods, bins=bins, edgecolor="black", alpha=0.8)
    ax.set_xlabel("orbit period")
    ax.set_ylabel("count")
    if title:
        ax.set_title(title)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out_path


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Render run CSVs into decay / ratio / histogram figures.")
    parser.add_argument("--csv", required=True, help="input CSV path")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--columns", default=None,
                        help="comma-separated column selection")
    parser.add_argument("--envelope", default=None,
                        help="envelope formula, e.g. '0.003*exp(-0.625*t)'")
    parser.add_argument("--kind", choices=["decay", "ratio", "periods"],
                        default="decay")
    parser.add_argument("--loglog", action="store_true",
                        help="log-log axes with power-law slope fits")
    parser.add_argument("--bound", type=float, default=1.0,
                        help="admissible level for ratio figures")
    parser.add_argument("--title", default=None)
    args = parser.parse_args(argv)
    columns = args.columns.split(",") if args.columns else None
    try:
        if args.kind == "decay":
            out = plot_decay(args.csv, args.out, columns=columns,
                             envelope=args.envelope, loglog=args.loglog,
                             title=args.title)
        elif args.kind == "ratio":
            out = plot_ratio(args.csv, args.out, columns=columns,
                             bound=args.bound, title=args.title)
        else:
            out = plot_period_histogram(args.csv, args.out, title=args.title)
    except PlotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
