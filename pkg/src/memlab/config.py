"""Run configuration: JSON file, fully defaulted, every key range-checked.

Every quantity has its unit in its key name (``_ns``, ``_pj``, ``_mhz``,
``_hz``, ``_s``, ``_us``); nothing is converted implicitly. Unknown keys are
errors. Relative paths in ``inputs`` resolve against the config file's
directory.
"""

from __future__ import annotations

import copy
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .counting import SequenceTiming
from .mbsim import ControlPulse, MediumParams, effective_optical_depth, polarization_decay
from .models import AXES, Calibration, EfficiencyParams, NoiseParams

MODES = ("simulate", "synth", "analyze", "fit", "sweep")
SEED_ENV = "MEMLAB_SEED"


class ConfigError(ValueError):
    """Validation failure; ``key`` is the dotted path of the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key
        self.detail = message


_POS = (0.0, math.inf, False)  # (lo, hi, lo inclusive)
_NONNEG = (0.0, math.inf, True)
_UNIT = (0.0, 1.0, True)
_ANY = (-math.inf, math.inf, True)
_OPEN_UNIT = (0.0, 1.0, False)

# section -> key -> (default, bounds) ; bounds None means non-numeric
SCHEMA: dict[str, dict[str, tuple[Any, tuple | None]]] = {
    "medium": {
        "optical_depth": (25.0, _NONNEG),
        "pumping_efficiency": (0.8, _UNIT),
        "polarization_decay_mhz": (polarization_decay() / (2 * math.pi * 1e6), _NONNEG),
        "ground_decoherence_mhz": (0.0, _NONNEG),
        "one_photon_detuning_mhz": (2300.0, _ANY),
        "two_photon_detuning_mhz": (0.0, _ANY),
        "cell_length_m": (0.075, _POS),
    },
    "control": {
        "peak_rabi_mhz": (540.0, _NONNEG),
        "fwhm_ns": (25.0, _POS),
        "center_ns": (0.0, _ANY),
    },
    "signal": {
        "fwhm_ns": (25.0, _POS),
        "lag_ns": (25.0, _ANY),
    },
    "calibration": {
        "split_ratio_sigma": (9.0, _NONNEG),
        "apd_efficiency": (0.33, (0.0, 1.0, False)),
        "rep_rate_hz": (1.0 / 11e-6, _POS),
        "integration_time_s": (60.0, _POS),
        "monitor_rate_hz": (3333.0, _NONNEG),
        "filter_signal_transmission": (0.4, (0.0, 1.0, False)),
        "split_ratio_rel_err": (0.0, _NONNEG),
        "apd_efficiency_rel_err": (0.05 / 0.33, _NONNEG),
        "alpha2": (1.0, _POS),
    },
    "timing": {
        "pump_duration_us": (10.0, _POS),
        "write_time_ns": (0.0, _NONNEG),
        "signal_delay_ns": (0.0, _NONNEG),
        "read_delay_ns": (140.0, _POS),
        "rep_period_us": (11.0, _POS),
    },
    "noise": {
        "fwm_quad_b_per_pj2": (0.0, _NONNEG),
        "srs_lin_c_per_pj": (4e-5, _NONNEG),
        "fl_amp_d": (7e-3, _NONNEG),
        "fl_sat_e_pj": (16.0, _NONNEG),
        "n_srs": (14e-3, _NONNEG),
        "n_fl": (7e-3, _NONNEG),
        "n_fwm": (0.0, _NONNEG),
        "voigt_gauss_fwhm_mhz": (380.0, _POS),
        "voigt_lorentz_fwhm_mhz": (920.0, _POS),
    },
    "efficiency": {
        "eta0_width": (0.128, _UNIT),
        "mem_bandwidth_fwhm_mhz": (220.0, _POS),
        "eta0_energy": (0.107, _UNIT),
        "energy_scale_a_pj": (156.0, _POS),
        "eta0_detuning": (0.13, _UNIT),
        "lorentz_fwhm_mhz": (1000.0, _POS),
        "lorentz_center_mhz": (0.0, _ANY),
        "lorentz_peak_absorbance": (2.0, _NONNEG),
    },
    "sweep": {
        "axis": ("energy", None),
        "start": (280.0, _ANY),
        "stop": (560.0, _ANY),
        "steps": (8, None),
        "values": (None, None),
        # values of the two axes held fixed while one is varied
        "pulse_width_ns": (25.0, _POS),
        "energy_pj": (560.0, _POS),
        "detuning_mhz": (2300.0, _ANY),
    },
    "histogram": {
        "bin_ns": (1.0, _POS),
        "t_start_ns": (-50.0, _ANY),
        "t_stop_ns": (250.0, _ANY),
        "t_max_ns": (155.0, _ANY),
        "noise_per_attempt": (3.06e-3, _NONNEG),
    },
    "grid": {
        "nz": (None, None),
        "nt": (None, None),
        "oversample": (1.0, _POS),
    },
    "inputs": {
        "signal_histogram": (None, None),
        "noise_histogram": (None, None),
        "retrieved_envelope": (None, None),
        "leak_envelope": (None, None),
        "dataset": (None, None),
        "scan": (None, None),
        "metrics": (None, None),
        "fits": (None, None),
    },
    "output": {
        "dir": ("out", None),
        "svg": (False, None),
    },
}

TOP_LEVEL = {"mode": "sweep", "seed": None, "jobs": 1}


def _check_number(key: str, v, bounds) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(key, f"expected a number, got {v!r}")
    v = float(v)
    lo, hi, lo_incl = bounds
    if math.isnan(v):
        raise ConfigError(key, "NaN is not allowed")
    ok_lo = v >= lo if lo_incl else v > lo
    if not ok_lo or v > hi:
        left = "[" if lo_incl else "("
        raise ConfigError(key, f"value {v} outside {left}{lo}, {hi}]")
    return v


def _check_int(key: str, v, minimum: int) -> int:
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise ConfigError(key, f"expected an integer >= {minimum}, got {v!r}")
    return v


@dataclass
class RunConfig:
    mode: str
    seed: int | None
    jobs: int
    sections: dict[str, dict[str, Any]]
    base_dir: Path = field(default_factory=Path.cwd)

    def __getitem__(self, section: str) -> dict[str, Any]:
        return self.sections[section]

    def as_dict(self) -> dict:
        return {"mode": self.mode, "seed": self.seed, "jobs": self.jobs, **copy.deepcopy(self.sections)}

    # typed views -----------------------------------------------------------

    def medium(self) -> MediumParams:
        s = self["medium"]
        two_pi_mhz = 2 * math.pi * 1e6
        return MediumParams(
            optical_depth=effective_optical_depth(s["optical_depth"], s["pumping_efficiency"]),
            excited_decay_gamma=s["polarization_decay_mhz"] * two_pi_mhz,
            ground_decoherence=s["ground_decoherence_mhz"] * two_pi_mhz,
            one_photon_detuning=s["one_photon_detuning_mhz"] * two_pi_mhz,
            two_photon_detuning=s["two_photon_detuning_mhz"] * two_pi_mhz,
            cell_length=s["cell_length_m"],
        )

    def control(self) -> ControlPulse:
        s = self["control"]
        return ControlPulse(2 * math.pi * 1e6 * s["peak_rabi_mhz"], s["fwhm_ns"], s["center_ns"])

    def calibration(self) -> Calibration:
        s = self["calibration"]
        return Calibration(
            split_ratio_sigma=s["split_ratio_sigma"],
            apd_efficiency=s["apd_efficiency"],
            rep_rate=s["rep_rate_hz"],
            integration_time=s["integration_time_s"],
            monitor_rate=s["monitor_rate_hz"],
            filter_signal_transmission=s["filter_signal_transmission"],
            split_ratio_rel_err=s["split_ratio_rel_err"],
            apd_efficiency_rel_err=s["apd_efficiency_rel_err"],
        )

    def timing(self) -> SequenceTiming:
        s = self["timing"]
        return SequenceTiming(
            s["pump_duration_us"], s["write_time_ns"], s["signal_delay_ns"], s["read_delay_ns"], s["rep_period_us"]
        )

    def noise(self) -> NoiseParams:
        s = self["noise"]
        return NoiseParams(
            s["fwm_quad_b_per_pj2"], s["srs_lin_c_per_pj"], s["fl_amp_d"], s["fl_sat_e_pj"],
            s["n_srs"], s["n_fl"], s["n_fwm"], s["voigt_gauss_fwhm_mhz"], s["voigt_lorentz_fwhm_mhz"],
        )

    def efficiency(self) -> EfficiencyParams:
        s = self["efficiency"]
        return EfficiencyParams(
            s["eta0_width"], s["mem_bandwidth_fwhm_mhz"], s["eta0_energy"], s["energy_scale_a_pj"],
            s["eta0_detuning"], s["lorentz_fwhm_mhz"], s["lorentz_center_mhz"], s["lorentz_peak_absorbance"],
        )

    def sweep_values(self) -> np.ndarray:
        """Resolved sweep grid, ascending; one job per value."""
        s = self["sweep"]
        if s["values"] is not None:
            return np.sort(np.asarray(s["values"], dtype=float))
        if s["steps"] == 1:
            return np.array([s["start"]])
        return np.linspace(s["start"], s["stop"], s["steps"])

    def input_path(self, key: str) -> Path | None:
        v = self["inputs"][key]
        return None if v is None else self.base_dir / v

    def resolved_seed(self, cli_seed: int | None = None) -> int:
        return resolve_seed(cli_seed, self.seed)


def resolve_seed(cli_seed: int | None, config_seed: int | None, env: dict | None = None) -> int:
    """CLI flag, then $MEMLAB_SEED, then the config value, then 0."""
    if cli_seed is not None:
        return int(cli_seed)
    env = os.environ if env is None else env
    raw = env.get(SEED_ENV)
    if raw not in (None, ""):
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(SEED_ENV, f"not an integer: {raw!r}") from None
    if config_seed is not None:
        return int(config_seed)
    return 0


def _validate_section(name: str, given: Any) -> dict[str, Any]:
    schema = SCHEMA[name]
    if not isinstance(given, dict):
        raise ConfigError(name, "expected an object")
    for key in given:
        if key not in schema:
            raise ConfigError(f"{name}.{key}", f"unknown key; allowed: {', '.join(sorted(schema))}")
    out = {}
    for key, (default, bounds) in schema.items():
        v = given.get(key, default)
        dotted = f"{name}.{key}"
        if bounds is not None:
            v = _check_number(dotted, v, bounds)
        out[key] = v
    return out


def _validate_special(sec: dict[str, dict[str, Any]]) -> None:
    sw = sec["sweep"]
    if sw["axis"] not in AXES:
        raise ConfigError("sweep.axis", f"expected one of {AXES}, got {sw['axis']!r}")
    _check_int("sweep.steps", sw["steps"], 1)
    if sw["values"] is not None:
        if not isinstance(sw["values"], list) or not sw["values"]:
            raise ConfigError("sweep.values", "expected a non-empty list of numbers")
        for i, v in enumerate(sw["values"]):
            _check_number(f"sweep.values[{i}]", v, _ANY)
    if sw["steps"] > 1 and not sw["stop"] > sw["start"]:
        raise ConfigError("sweep.stop", "must exceed sweep.start")
    positive_axis = sw["axis"] in ("pulse_width", "energy")
    vals = sw["values"] if sw["values"] is not None else [sw["start"], sw["stop"]]
    if positive_axis and min(vals) <= 0:
        raise ConfigError("sweep.start" if sw["values"] is None else "sweep.values", f"{sw['axis']} values must be > 0")
    for k in ("nz", "nt"):
        if sec["grid"][k] is not None:
            _check_int(f"grid.{k}", sec["grid"][k], 3 if k == "nz" else 1)
    if not isinstance(sec["output"]["dir"], str):
        raise ConfigError("output.dir", "expected a string")
    if not isinstance(sec["output"]["svg"], bool):
        raise ConfigError("output.svg", "expected true or false")
    h = sec["histogram"]
    if not h["t_stop_ns"] > h["t_start_ns"]:
        raise ConfigError("histogram.t_stop_ns", "must exceed histogram.t_start_ns")


def _validate_inputs(inputs: dict[str, Any], base: Path) -> None:
    for key, v in inputs.items():
        if v is None:
            continue
        if key == "scan":
            if not isinstance(v, list) or not v:
                raise ConfigError("inputs.scan", "expected a list of {detuning_mhz, path} objects")
            for i, item in enumerate(v):
                dotted = f"inputs.scan[{i}]"
                if not isinstance(item, dict) or set(item) != {"detuning_mhz", "path"}:
                    raise ConfigError(dotted, "expected exactly the keys detuning_mhz and path")
                _check_number(f"{dotted}.detuning_mhz", item["detuning_mhz"], _ANY)
                if not (base / item["path"]).is_file():
                    raise ConfigError(f"{dotted}.path", f"file not found: {item['path']}")
            continue
        if not isinstance(v, str):
            raise ConfigError(f"inputs.{key}", "expected a file path string")
        if not (base / v).is_file():
            raise ConfigError(f"inputs.{key}", f"file not found: {v}")


def config_from_dict(raw: dict, base_dir: Path | str = ".") -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    for key in raw:
        if key not in TOP_LEVEL and key not in SCHEMA:
            allowed = sorted(list(TOP_LEVEL) + list(SCHEMA))
            raise ConfigError(key, f"unknown key; allowed: {', '.join(allowed)}")
    mode = raw.get("mode", TOP_LEVEL["mode"])
    if mode not in MODES:
        raise ConfigError("mode", f"expected exactly one of {MODES}, got {mode!r}")
    seed = raw.get("seed")
    if seed is not None:
        _check_int("seed", seed, 0)
    jobs = _check_int("jobs", raw.get("jobs", 1), 1)
    sections = {name: _validate_section(name, raw.get(name, {})) for name in SCHEMA}
    _validate_special(sections)
    base = Path(base_dir)
    _validate_inputs(sections["inputs"], base)
    cfg = RunConfig(mode, seed, jobs, sections, base)
    # build typed views so cross-field invariants of the domain types are checked now
    for section, build in (
        ("medium", cfg.medium), ("control", cfg.control), ("calibration", cfg.calibration),
        ("timing", cfg.timing), ("noise", cfg.noise), ("efficiency", cfg.efficiency),
    ):
        try:
            build()
        except ValueError as exc:
            raise ConfigError(section, str(exc)) from None
    return cfg


def validate_config(path: str | Path | None) -> RunConfig:
    """Load and validate a JSON config file; ``None`` gives the defaults."""
    if path is None:
        return config_from_dict({})
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    try:
        raw = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}", f"invalid JSON: {exc.msg}") from None
    return config_from_dict(raw, path.parent)


def default_config_dict() -> dict:
    return config_from_dict({}).as_dict()
