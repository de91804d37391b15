"""Time-stamped diagnostic series with deterministic CSV round-tripping."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


class DiagSeries:
    """Columns of floats keyed by name, all of equal length.

    CSV bytes are reproducible: floats are written with repr-exact precision
    ('%.17g'), so identical runs produce identical files.
    """

    def __init__(self, columns: dict[str, list | np.ndarray] | None = None):
        self._cols: dict[str, list[float]] = {}
        if columns:
            for name, vals in columns.items():
                self._cols[name] = [float(v) for v in vals]
        self._check()

    def _check(self):
        lengths = {len(v) for v in self._cols.values()}
        if len(lengths) > 1:
            raise ValueError(f"ragged columns: { {k: len(v) for k, v in self._cols.items()} }")

    def append(self, row: dict[str, float]):
        if self._cols and set(row) != set(self._cols):
            raise ValueError(f"row keys {sorted(row)} != columns {sorted(self._cols)}")
        for name, val in row.items():
            self._cols.setdefault(name, []).append(float(val))

    def add_column(self, name: str, values):
        values = [float(v) for v in values]
        if self._cols and len(values) != len(self):
            raise ValueError(f"column {name!r} has length {len(values)}, expected {len(self)}")
        self._cols[name] = values

    def __len__(self) -> int:
        return len(next(iter(self._cols.values()))) if self._cols else 0

    def __contains__(self, name: str) -> bool:
        return name in self._cols

    def __getitem__(self, name: str) -> np.ndarray:
        return np.asarray(self._cols[name])

    @property
    def columns(self) -> list[str]:
        return list(self._cols)

    def select(self, names: list[str]) -> "DiagSeries":
        missing = [n for n in names if n not in self._cols]
        if missing:
            raise KeyError(f"missing columns: {missing}")
        return DiagSeries({n: self._cols[n] for n in names})

    def to_csv(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self._cols.keys())
            for row in zip(*self._cols.values()):
                writer.writerow(format(v, ".17g") for v in row)

    @classmethod
    def from_csv(cls, path) -> "DiagSeries":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            cols: dict[str, list[float]] = {name: [] for name in header}
            for row in reader:
                for name, val in zip(header, row):
                    cols[name].append(float(val))
        return cls(cols)


def fit_log_slope(t: np.ndarray, y: np.ndarray, t_min: float | None = None,
                  t_max: float | None = None) -> float:
    """Least-squares slope of log(y) against t over a time window."""
    t = np.asarray(t, float)
    y = np.asarray(y, float)
    mask = y > 0
    if t_min is not None:
        mask &= t >= t_min
    if t_max is not None:
        mask &= t <= t_max
    if mask.sum() < 2:
        raise ValueError("not enough positive samples in the fit window")
    return float(np.polyfit(t[mask], np.log(y[mask]), 1)[0])


def fit_loglog_slope(t: np.ndarray, y: np.ndarray, t_min: float | None = None,
                     t_max: float | None = None) -> float:
    """Least-squares slope of log(y) against log(t) over a time window."""
    t = np.asarray(t, float)
    y = np.asarray(y, float)
    mask = (y > 0) & (t > 0)
    if t_min is not None:
        mask &= t >= t_min
    if t_max is not None:
        mask &= t <= t_max
    if mask.sum() < 2:
        raise ValueError("not enough positive samples in the fit window")
    return float(np.polyfit(np.log(t[mask]), np.log(y[mask]), 1)[0])
