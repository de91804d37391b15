"""Diagnostic series, CSV determinism, and slope fits."""

import numpy as np
import pytest

from mrelab.diag import DiagSeries, fit_log_slope, fit_loglog_slope


def test_csv_round_trip_and_byte_determinism(tmp_path):
    rng = np.random.default_rng(0)
    series = DiagSeries({"t": np.linspace(0, 1, 7),
                         "y": rng.standard_normal(7) * 1e-13})
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    series.to_csv(p1)
    DiagSeries.from_csv(p1).to_csv(p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_append_and_select():
    s = DiagSeries()
    s.append({"t": 0.0, "a": 1.0, "b": 2.0})
    s.append({"t": 1.0, "a": 3.0, "b": 4.0})
    sub = s.select(["t", "b"])
    assert sub.columns == ["t", "b"]
    assert np.allclose(sub["b"], [2.0, 4.0])
    with pytest.raises(KeyError):
        s.select(["t", "missing"])


def test_ragged_rows_rejected():
    s = DiagSeries()
    s.append({"t": 0.0, "a": 1.0})
    with pytest.raises(ValueError):
        s.append({"t": 1.0})


def test_fit_log_slope_recovers_rate():
    t = np.linspace(0, 10, 101)
    y = 3.0 * np.exp(-0.625 * t)
    assert fit_log_slope(t, y) == pytest.approx(-0.625, abs=1e-12)
    assert fit_log_slope(t, y, t_min=5.0) == pytest.approx(-0.625, abs=1e-12)


def test_fit_loglog_slope_recovers_power():
    t = np.geomspace(1, 100, 50)
    y = 2.0 * t ** -0.5
    assert fit_loglog_slope(t, y) == pytest.approx(-0.5, abs=1e-12)
