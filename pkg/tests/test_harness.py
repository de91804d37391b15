"""Scenario parsing, deterministic outputs, sweeps, and the CLI."""

import json
from pathlib import Path

import numpy as np
import pytest

from mrelab.cli import main as cli_main
from mrelab.errors import ConfigError
from mrelab.harness import (MRE_CSV_COLUMNS, SCALAR_CSV_COLUMNS, Scenario,
                            _assign, run, scenario_dir, shear_from_params,
                            sweep, v_callable_from_params)
from mrelab.grid import ChannelGrid

MINIMAL = """
[scenario]
name = "tiny"
kind = "mre-semigroup"
seed = 1

[grid]
n1 = 8
n2 = 17

[time]
t_end = 1.0
n_samples = 11

[params.gamma]
family = "constant"
c = 1.0
"""


def _write(tmp_path, text, name="sc.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_scenario_round_trip(tmp_path):
    sc = Scenario.from_toml(_write(tmp_path, MINIMAL))
    assert sc.name == "tiny" and sc.kind == "mre-semigroup"
    assert sc.hash() == Scenario.from_dict(sc.to_dict()).hash()


@pytest.mark.parametrize("mutation, fragment", [
    ("[scenario]\nname = 'x'\n", "missing required key"),
    ("[scenario]\nname = 'x'\nkind = 'nope'\n", "unknown kind"),
    ("[scenario]\nname = 'x'\nkind = 'mre-decay'\nseed = 1.5\n",
     "seed must be an integer"),
    ("[scenario]\nname = 'x'\nkind = 'mre-decay'\n[time]\ndt = -1\n",
     "dt must be positive"),
])
def test_scenario_validation_errors(tmp_path, mutation, fragment):
    with pytest.raises(ConfigError, match=fragment):
        Scenario.from_toml(_write(tmp_path, mutation))


def test_invalid_toml_reports_path(tmp_path):
    path = _write(tmp_path, "not = [valid")
    with pytest.raises(ConfigError, match=str(path)):
        Scenario.from_toml(path)


def test_profile_families():
    grid = ChannelGrid(8, 17)
    shear = shear_from_params(grid, {"family": "linear", "c0": 1.0,
                                     "slope": 0.5})
    assert shear.gamma[0] == pytest.approx(1.0)
    assert shear.gamma[-1] == pytest.approx(2.0)
    v = v_callable_from_params({"family": "cos", "eps": 0.5})
    assert v(0.0) == pytest.approx(0.5)
    with pytest.raises(ConfigError, match="unknown profile family"):
        shear_from_params(grid, {"family": "exotic"})
    with pytest.raises(ConfigError, match="missing parameter"):
        shear_from_params(grid, {"family": "linear", "c0": 1.0})


def test_assign_dotted_paths(tmp_path):
    sc = Scenario.from_toml(_write(tmp_path, MINIMAL))
    _assign(sc, "eps", 1e-4)
    _assign(sc, "gamma.slope", 0.1)
    _assign(sc, "time.dt", 0.01)
    _assign(sc, "seed", 9)
    assert sc.params["eps"] == 1e-4
    assert sc.params["gamma"]["slope"] == 0.1
    assert sc.time["dt"] == 0.01 and sc.seed == 9


def test_run_writes_manifest_and_deterministic_csv(tmp_path):
    sc_path = _write(tmp_path, MINIMAL)
    m1 = run(sc_path, out_dir=tmp_path / "r1")
    m2 = run(sc_path, out_dir=tmp_path / "r2")
    assert m1["passed"] and m2["passed"]
    assert m1["scenario_hash"] == m2["scenario_hash"]
    b1 = (tmp_path / "r1" / "series.csv").read_bytes()
    b2 = (tmp_path / "r2" / "series.csv").read_bytes()
    assert b1 == b2
    manifest = json.loads((tmp_path / "r1" / "manifest.json").read_text())
    assert set(manifest) >= {"name", "kind", "scenario_hash", "code_version",
                             "seed", "assertions", "metrics", "passed"}


def test_sweep_collects_failures(tmp_path):
    sc_path = _write(tmp_path, MINIMAL)
    manifests = sweep(sc_path, {"gamma.family": ["constant", "bogus"]},
                      out_root=tmp_path / "sw", max_workers=1)
    assert len(manifests) == 2
    statuses = sorted(bool(m.get("passed")) for m in manifests)
    assert statuses == [False, True]
    assert any("error" in m for m in manifests)


def test_shipped_scenarios_parse():
    for path in sorted(scenario_dir().glob("*.toml")):
        sc = Scenario.from_toml(path)
        assert sc.name == path.stem


def test_cli_run_exit_codes(tmp_path):
    sc_path = _write(tmp_path, MINIMAL)
    assert cli_main(["run", str(sc_path), "--out", str(tmp_path / "o1")]) == 0
    assert cli_main(["run", str(tmp_path / "nope.toml")]) == 2


def test_cli_sweep(tmp_path, capsys):
    sc_path = _write(tmp_path, MINIMAL)
    code = cli_main(["sweep", str(sc_path), "--grid", "seed=1,2",
                     "--out", str(tmp_path / "sw"), "--workers", "1"])
    assert code == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 2


def test_documented_column_sets():
    assert MRE_CSV_COLUMNS[0] == "t" and "ratio_u" in MRE_CSV_COLUMNS
    assert SCALAR_CSV_COLUMNS == ["t", "l2_dist", "h1_dist", "h2_dist",
                                  "linf_g", "l2_Bgrad", "rate_fit"]
