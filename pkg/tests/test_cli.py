"""Configuration parsing, artifacts, exit codes and the validate command."""
import json
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hybridsim.cli import acceptance, config as cfgmod, io as hio
from hybridsim.cli.main import main


def _summary(out_dir):
    return json.loads((out_dir / "summary.json").read_text())


def _write(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return str(p)


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------


def test_every_preset_loads():
    for name in cfgmod.PRESETS:
        cfg = cfgmod.load_preset(name)
        assert cfg.scenario in cfgmod.SCENARIOS


def test_hz_keys_are_angular_internally():
    cfg = cfgmod.from_mapping({"scenario": "params", "device.gamma_s_Hz": 1000.0})
    assert cfg.si("device.gamma_s_Hz") == pytest.approx(2 * np.pi * 1000.0)


@pytest.mark.parametrize("data", [
    {"scenario": "params", "beam.lenght_m": 1e-5},
    {"scenario": "nope"},
    {"scenario": "params", "beam": {"length_m": 1e-5}},
    {"scenario": "params", "beam.length_m": "long"},
    {"beam.length_m": 1e-5},
])
def test_invalid_mappings_raise(data):
    with pytest.raises(cfgmod.ConfigError):
        cfgmod.from_mapping(data)


@pytest.mark.parametrize("text,expect", [("1:3:3", [1.0, 2.0, 3.0]), ("log:1:100:3", [1.0, 10.0, 100.0]),
                                         ("0.5,2", [0.5, 2.0])])
def test_grid_specs(text, expect):
    assert np.allclose(cfgmod.parse_grid(text), expect)


def test_bad_grid_raises():
    with pytest.raises(cfgmod.ConfigError):
        cfgmod.parse_grid("1:2")


# ---------------------------------------------------------------------------
# writers
# ---------------------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=20))
def test_csv_round_trip_is_exact(values):
    with tempfile.TemporaryDirectory() as tmp:
        p = Path(tmp) / "t.csv"
        p.write_text(hio.csv_text({"x_s": np.array(values)}))
        back = hio.read_csv(p)["x_s"]
    assert np.array_equal(back, np.array(values))


def test_json_replaces_non_finite_with_null():
    assert json.loads(hio.json_text({"a": float("nan"), "b": [1.0, float("inf")]})) == {"a": None, "b": [1.0, None]}


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def test_params_run_summary(tmp_path):
    out = tmp_path / "o"
    assert main(["run", "params_device", "--out", str(out)]) == 0
    s = _summary(out)
    for key in ("g_Hz", "lam_Hz", "kappa_Hz", "gamma_m_Hz"):
        assert key in s["scalars"]
    assert s["targets_passed"] is True
    assert s["resolved"]["g"]["unit"] == "rad/s"
    assert s["config"]["beam.length_m"] == 8e-5
    assert s["overridden"] == []


def test_cool_run_writes_trajectory(tmp_path):
    out = tmp_path / "o"
    code = main(["run", "cool_trajectory", "--out", str(out), "--override", "numerics.n_times=501"])
    assert code == 0
    table = hio.read_csv(out / "trajectory.csv")
    assert list(table) == ["t_s", "n_a", "n_b"]
    assert table["t_s"].size == 501
    s = _summary(out)
    assert "n_f" in s["scalars"]
    assert "omega_m" in s["overridden"]
    assert s["resolved"]["omega_m"]["overridden"] is True


def test_runs_are_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["--override", "numerics.n_times=201"]
    assert main(["run", "cool_trajectory", "--out", str(a)] + args) == 0
    assert main(["run", "cool_trajectory", "--out", str(b)] + args) == 0
    assert (a / "trajectory.csv").read_bytes() == (b / "trajectory.csv").read_bytes()
    sa, sb = _summary(a), _summary(b)
    sa.pop("wall_clock_s")
    sb.pop("wall_clock_s")
    assert sa == sb


def test_summary_config_reconstructs_the_run(tmp_path):
    out = tmp_path / "o"
    assert main(["run", "params_device", "--out", str(out)]) == 0
    echoed = _summary(out)["config"]
    again = tmp_path / "again"
    assert main(["run", _write(tmp_path, echoed, "echo.json"), "--out", str(again)]) == 0
    assert _summary(again)["scalars"] == _summary(out)["scalars"]


@pytest.mark.parametrize("text", ["{not json", json.dumps({"scenario": "params", "beam.colour": 3}),
                                  json.dumps({"scenario": "params", "beam.length_m": -1.0})])
def test_malformed_config_exits_2_without_artifacts(tmp_path, text):
    out = tmp_path / "o"
    assert main(["run", _write(tmp_path, text), "--out", str(out)]) == 2
    assert not out.exists() or not any(out.iterdir())


def test_missed_target_exits_1(tmp_path):
    out = tmp_path / "o"
    assert main(["run", "params_device", "--out", str(out), "--override", "target.n_th.max=10"]) == 1
    assert _summary(out)["targets_passed"] is False


def test_numerical_failure_exits_3(tmp_path):
    out = tmp_path / "o"
    # 2 g > omega_m: the closed moment system is unstable and the cross-checked
    # steady state does not exist
    code = main(["run", "cool_trajectory", "--out", str(out), "--override", "override.g_Hz=2e5",
                 "--override", "cool.mode=\"steady\"", "--override", "cool.g_over_kappa_start=40",
                 "--override", "cool.g_over_kappa_stop=60", "--override", "cool.g_over_kappa_num=2"])
    assert code == 3
    assert not out.exists() or not any(out.iterdir())


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "hybridsim", "run", "params_device", "--out", str(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def test_length_sweep_table(tmp_path):
    out = tmp_path / "o"
    assert main(["sweep", "sweep_length", "--out", str(out)]) == 0
    t = hio.read_csv(out / "sweep.csv")
    assert t["beam.length_m"].size == 50
    for col in ("g_Hz", "lam_Hz", "omega_m_Hz"):
        assert col in t
    crossing = _summary(out)["scalars"]["g_lam_crossing"]
    assert 60e-6 < crossing < 100e-6


def test_single_point_sweep_equals_run(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "params_device", "--out", str(a)]) == 0
    assert main(["sweep", "params_device", "--var", "beam.length_m", "--grid", "8e-5", "--out", str(b)]) == 0
    sa, sb = _summary(a)["scalars"], _summary(b)["scalars"]
    sb.pop("n_points")
    assert sa == sb


def test_coupling_ratio_sweep(tmp_path):
    out = tmp_path / "o"
    cfg = _write(tmp_path, {"scenario": "cool", "cool.mode": "steady", "cool.g_over_kappa_num": 1,
                            "override.omega_m_Hz": 320e3, "override.detuning_Hz": 320e3,
                            "override.g_Hz": 16e3, "override.kappa_Hz": 6e3,
                            "override.gamma_m_Hz": 3.2, "override.n_th": 1000})
    assert main(["sweep", cfg, "--var", "cool.g_over_kappa_start", "--grid", "0.1:1:4",
                 "--out", str(out)]) == 0
    t = hio.read_csv(out / "sweep.csv")
    assert np.all(np.diff(t["n_f"]) < 0)


def test_unknown_sweep_variable_exits_2(tmp_path):
    out = tmp_path / "o"
    assert main(["sweep", "params_device", "--var", "beam.colour", "--grid", "1,2", "--out", str(out)]) == 2
    assert not out.exists() or not any(out.iterdir())


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def test_validate_filter(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["validate", "--filter", "1,2", "--out", str(out)]) == 0
    report = _summary(out)["resolved"]["report"]
    assert [r["id"] for r in report] == [1, 2]
    assert all(r["passed"] for r in report)
    assert "[PASS] criterion 1 device parameters" in capsys.readouterr().out


def test_criterion_ids_are_one_to_twelve():
    assert acceptance.CRITERION_IDS == tuple(range(1, 13))


def test_validate_bad_filter_exits_2(tmp_path):
    assert main(["validate", "--filter", "x", "--out", str(tmp_path / "o")]) == 2


def test_perturbed_modulus_fails_only_the_frequency_criterion(monkeypatch):
    real = cfgmod.load_preset

    def doubled(name):
        cfg = real(name)
        return cfg.with_value("beam.youngs_modulus_Pa", 2 * cfg.raw("beam.youngs_modulus_Pa"))

    monkeypatch.setattr(acceptance, "load_preset", doubled)
    res = {r.id: r for r in acceptance.run_acceptance([1, 2])}
    assert not res[1].passed
    failed = [c.name for c in res[1].checks if not c.passed]
    assert "omega_m/2pi" in failed
    assert res[2].passed
