import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pauliblock.cli import EXIT_ERROR, EXIT_OK, EXIT_WARN, main
from pauliblock.config import ConfigError, expand_grid, parse_config, parse_quantity


def cfg(**kw):
    base = {"schema_version": 1}
    base.update(kw)
    return json.dumps(base)


def test_minimal_rates_config():
    c = parse_config(cfg(scenario="rates", parameters={"eta": 0.28, "orientation": "perp"}))
    assert c.values() == {"eta": 0.28, "orientation": 0.0}


def test_bare_number_rejected():
    with pytest.raises(ConfigError) as exc:
        parse_config(cfg(scenario="quench", parameters={"omega_dr": 4, "gamma_1p": "29 MHz"}))
    assert any("unit" in e for e in exc.value.errors)


def test_all_errors_collected():
    text = cfg(
        scenario="quench",
        parameters={"omega_dr": 4, "gamma_1p": "29 furlongs", "bogus": 1},
        output={"format": "xml"},
        scan={"parameter": "eta", "grid": {"linspace": [1, 0, 0]}},
    )
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert len(exc.value.errors) == 5


def test_unknown_scenario_and_schema():
    with pytest.raises(ConfigError) as exc:
        parse_config(json.dumps({"schema_version": 7, "scenario": "warp"}))
    assert len(exc.value.errors) == 2


def test_zeeman_scan_grid():
    c = parse_config(cfg(scenario="zeeman", scan={"parameter": "x", "grid": {"logspace": [1e-2, 1e2, 200]}}))
    g = c.grid()
    assert len(g) == 200 and g[0] == pytest.approx(1e-2) and g[-1] == pytest.approx(1e2)


def test_units_are_canonical():
    assert parse_quantity("29 MHz", "si_rate").canonical == pytest.approx(2 * math.pi * 29e6)
    assert parse_quantity("4e6 1/s", "si_rate").canonical == 4e6
    assert parse_quantity("4 Mrad/s", "si_rate").canonical == 4e6
    assert parse_quantity("500 G", "field").canonical == pytest.approx(0.05)
    assert parse_quantity("1250 1/Gamma", "time").canonical == 1250.0
    with pytest.raises(ValueError):
        parse_quantity("3 Gamma", "si_rate")


@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=20, unique=True))
def test_list_grid_needs_monotone(values):
    ordered = sorted(values)
    assert expand_grid({"list": ordered}) == ordered
    if ordered != values and ordered[::-1] != values:
        with pytest.raises(ValueError):
            expand_grid({"list": values})


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def test_quench_run_and_determinism(tmp_path, capsys):
    conf = {
        "schema_version": 1,
        "scenario": "quench",
        "parameters": {"omega_dr": "4e6 1/s", "gamma_1p": "29 MHz", "delta_over_gamma_1p": 10, "times": ["1 ms"]},
        "output": {"path": "q"},
    }
    path = _write(tmp_path, "q.json", conf)
    assert main([path, "--out", str(tmp_path / "a")]) == EXIT_OK
    assert "219.524" in capsys.readouterr().out
    assert main([path, "--out", str(tmp_path / "b")]) == EXIT_OK
    for f in ("q.json", "q_populations.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    man = json.loads((tmp_path / "a" / "q.manifest.json").read_text())
    assert man["inputs_canonical"]["gamma_1p"]["unit"] == "1/s"
    assert set(man["files"]) == {"q.json", "q_populations.csv"}
    assert {"config_hash", "versions", "numerical_controls", "wall_time_s"} <= set(man)


def test_env_default_out(tmp_path, monkeypatch):
    conf = {"schema_version": 1, "scenario": "rates", "parameters": {"eta": 0.1}, "output": {"path": "r"}}
    path = _write(tmp_path, "r.json", conf)
    monkeypatch.setenv("PAULIBLOCK_OUT", str(tmp_path / "env"))
    assert main([path]) == EXIT_OK
    assert (tmp_path / "env" / "r.manifest.json").exists()


def test_parallel_scan_matches_serial(tmp_path):
    conf = {
        "schema_version": 1,
        "scenario": "zeeman",
        "parameters": {"level": 0.95},
        "output": {"path": "z"},
        "scan": {"parameter": "x", "grid": {"linspace": [0.0, 4.0, 9]}},
    }
    path = _write(tmp_path, "z.json", conf)
    assert main([path, "--out", str(tmp_path / "s")]) == EXIT_OK
    assert main([path, "--out", str(tmp_path / "p"), "--parallel", "2"]) == EXIT_OK
    for f in ("z_scan.csv", "z_energies.csv", "z_noflip.csv", "z.json"):
        assert (tmp_path / "s" / f).read_bytes() == (tmp_path / "p" / f).read_bytes()
    rows = (tmp_path / "s" / "z_energies.csv").read_text().splitlines()
    assert len(rows) == 10 and rows[0].count(",") == 6


def test_warning_exit(tmp_path):
    conf = {"schema_version": 1, "scenario": "photon", "parameters": {"eta": 0.28, "nu": "0.5 Gamma", "n_points": 101}}
    assert main([_write(tmp_path, "p.json", conf), "--out", str(tmp_path)]) == EXIT_WARN


def test_error_exits(tmp_path):
    assert main([str(tmp_path / "missing.json")]) == EXIT_ERROR
    bad = {"schema_version": 1, "scenario": "rates", "parameters": {"eta": 0.1, "mode": "laser", "k_laser": [0, 0, 0]}}
    assert main([_write(tmp_path, "b.json", bad), "--out", str(tmp_path)]) == EXIT_ERROR
