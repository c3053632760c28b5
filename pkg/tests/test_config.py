import json
import math

import pytest

from memlab.config import SCHEMA, ConfigError, config_from_dict, resolve_seed, validate_config


def write(tmp_path, obj, name="c.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return p


def test_empty_config_gives_full_defaults(tmp_path):
    cfg = validate_config(write(tmp_path, ""))
    d = cfg.as_dict()
    assert d["mode"] == "sweep" and d["jobs"] == 1 and d["seed"] is None
    for section, keys in SCHEMA.items():
        assert set(d[section]) == set(keys)
    assert d["signal"]["fwhm_ns"] == 25.0
    assert d["medium"]["one_photon_detuning_mhz"] == 2300.0
    assert (d["sweep"]["start"], d["sweep"]["stop"]) == (280.0, 560.0)
    assert validate_config(write(tmp_path, {}, "e.json")).as_dict() == d


def test_energy_sweep_resolves_eight_jobs(tmp_path):
    cfg = validate_config(write(tmp_path, {"sweep": {"axis": "energy", "start": 280, "stop": 560, "steps": 8}}))
    vals = cfg.sweep_values()
    assert len(vals) == 8 and vals[0] == 280.0 and vals[-1] == 560.0


def test_apd_efficiency_out_of_range_names_key_and_bound(tmp_path):
    with pytest.raises(ConfigError) as exc:
        validate_config(write(tmp_path, {"calibration": {"apd_efficiency": 1.5}}))
    assert exc.value.key == "calibration.apd_efficiency"
    assert "1.0" in exc.value.detail


@pytest.mark.parametrize(
    "raw, key",
    [
        ({"bogus": 1}, "bogus"),
        ({"medium": {"optical_dept": 3}}, "medium.optical_dept"),
        ({"mode": "both"}, "mode"),
        ({"control": {"fwhm_ns": 0}}, "control.fwhm_ns"),
        ({"calibration": {"rep_rate_hz": -1}}, "calibration.rep_rate_hz"),
        ({"efficiency": {"eta0_width": 1.1}}, "efficiency.eta0_width"),
        ({"sweep": {"axis": "power"}}, "sweep.axis"),
        ({"sweep": {"steps": 0}}, "sweep.steps"),
        ({"sweep": {"start": 600, "stop": 500}}, "sweep.stop"),
        ({"sweep": {"axis": "pulse_width", "start": -1, "stop": 10}}, "sweep.start"),
        ({"sweep": {"values": [1, "a"]}}, "sweep.values[1]"),
        ({"seed": -3}, "seed"),
        ({"jobs": 0}, "jobs"),
        ({"medium": {"optical_depth": "20"}}, "medium.optical_depth"),
        ({"inputs": {"dataset": "missing.csv"}}, "inputs.dataset"),
        ({"inputs": {"scan": [{"detuning_mhz": 0, "path": "missing.csv"}]}}, "inputs.scan[0].path"),
        ({"timing": {"read_delay_ns": 20000}}, "timing"),
    ],
)
def test_rejections_name_the_key(tmp_path, raw, key):
    with pytest.raises(ConfigError) as exc:
        validate_config(write(tmp_path, raw))
    assert exc.value.key == key


def test_invalid_json_reports_line(tmp_path):
    with pytest.raises(ConfigError) as exc:
        validate_config(write(tmp_path, '{\n  "seed": 1,\n  oops\n}'))
    assert exc.value.key == "line 3"


def test_inputs_resolve_relative_to_config(tmp_path):
    (tmp_path / "d.csv").write_text("x,y,sigma_y\n")
    cfg = validate_config(write(tmp_path, {"inputs": {"dataset": "d.csv"}}))
    assert cfg.input_path("dataset") == tmp_path / "d.csv"


def test_typed_views():
    cfg = config_from_dict({"medium": {"optical_depth": 50, "pumping_efficiency": 0.5}})
    m = cfg.medium()
    assert m.optical_depth == 25.0
    assert m.one_photon_detuning == pytest.approx(2 * math.pi * 2.3e9)
    assert cfg.control().peak_rabi == pytest.approx(2 * math.pi * 540e6)
    assert cfg.calibration().apd_efficiency == 0.33
    assert cfg.noise().srs_lin_c == 4e-5
    assert cfg.efficiency().mem_bandwidth_fwhm == 220.0


def test_explicit_values_are_sorted():
    cfg = config_from_dict({"sweep": {"values": [5, 1, 3]}})
    assert list(cfg.sweep_values()) == [1.0, 3.0, 5.0]


def test_seed_precedence():
    env = {"MEMLAB_SEED": "7"}
    assert resolve_seed(3, 5, env) == 3
    assert resolve_seed(None, 5, env) == 7
    assert resolve_seed(None, 5, {}) == 5
    assert resolve_seed(None, None, {}) == 0
    with pytest.raises(ConfigError):
        resolve_seed(None, None, {"MEMLAB_SEED": "x"})
