"""Parameter sweeps over the closed-form models with seeded Poisson counting."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .config import RunConfig
from .models import (
    eta_vs_control_energy,
    eta_vs_detuning,
    eta_vs_pulse_width,
    mu_one,
    noise_components_vs_energy,
)
from .voigt import voigt_unit_peak

MODEL_COLUMNS = ("eta_e2e", "noise", "noise_fwm", "noise_srs", "noise_fl", "snr", "mu1")
COUNT_COLUMNS = ("signal_counts", "noise_counts", "eta_e2e_measured", "snr_measured")


def _fixed_point(cfg: RunConfig, axis: str, x: float) -> dict[str, float]:
    sw = cfg["sweep"]
    point = {"pulse_width": sw["pulse_width_ns"], "energy": sw["energy_pj"], "detuning": sw["detuning_mhz"]}
    point[axis] = x
    return point


def model_row(cfg: RunConfig, axis: str, x: float) -> dict[str, float | None]:
    """Closed-form figures of merit at one grid point.

    Only the swept parameter moves the efficiency; the noise follows the
    energy model on the energy axis, the detuning model on the detuning axis
    and stays at the far-detuned level (n_srs + n_fwm) on the pulse-width axis.
    """
    ep, npar, cal = cfg.efficiency(), cfg.noise(), cfg.calibration()
    alpha2 = cfg["calibration"]["alpha2"]
    p = _fixed_point(cfg, axis, x)
    if axis == "pulse_width":
        eta = eta_vs_pulse_width(p["pulse_width"], ep)
        fwm, srs, fl = npar.n_fwm, npar.n_srs, 0.0
    elif axis == "energy":
        eta = eta_vs_control_energy(p["energy"], ep)
        parts = noise_components_vs_energy(p["energy"], npar)
        fwm, srs, fl = parts["fwm"], parts["srs"], parts["fluorescence"]
    else:
        eta = eta_vs_detuning(p["detuning"], ep)
        v = voigt_unit_peak(p["detuning"], npar.voigt_gauss_fwhm, npar.voigt_lorentz_fwhm)
        fwm, srs, fl = npar.n_fwm, npar.n_srs, npar.n_fl * v
    noise = fwm + srs + fl
    snr = alpha2 * eta * cal.apd_efficiency / noise if noise > 0 else None
    mu1 = mu_one(alpha2, snr) if snr else None
    return {"eta_e2e": eta, "noise": noise, "noise_fwm": fwm, "noise_srs": srs, "noise_fl": fl, "snr": snr, "mu1": mu1}


def count_row(cfg: RunConfig, model: dict, rng: np.random.Generator) -> dict[str, float | None]:
    """Poisson signal and noise counts over the integration, and the metrics estimated from them."""
    cal = cfg.calibration()
    alpha2 = cfg["calibration"]["alpha2"]
    attempts = cal.attempts
    detected = alpha2 * model["eta_e2e"] * cal.apd_efficiency
    n_s = int(rng.poisson((detected + model["noise"]) * attempts))
    n_n = int(rng.poisson(model["noise"] * attempts))
    eta = (n_s - n_n) / (alpha2 * cal.apd_efficiency * attempts)
    snr = (n_s - n_n) / n_n if n_n > 0 else None
    return {"signal_counts": n_s, "noise_counts": n_n, "eta_e2e_measured": eta, "snr_measured": snr}


def evaluate_point(cfg: RunConfig, x: float, seed: int, index: int) -> dict:
    """One sweep row; failures are caught and reported in the ``error`` field."""
    axis = cfg["sweep"]["axis"]
    row: dict = {"axis": axis, "value": float(x), "error": ""}
    try:
        m = model_row(cfg, axis, float(x))
        rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
        row.update(m)
        row.update(count_row(cfg, m, rng))
    except (ValueError, ZeroDivisionError, FloatingPointError) as exc:
        row.update({k: None for k in MODEL_COLUMNS + COUNT_COLUMNS})
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def run_sweep(cfg: RunConfig, seed: int = 0, jobs: int = 1) -> list[dict]:
    """All grid points, ordered by axis value; each point has its own seed stream."""
    values = cfg.sweep_values()
    tasks = list(enumerate(values))
    if jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(evaluate_point, cfg, x, seed, i) for i, x in tasks]
            rows = [f.result() for f in futures]
    else:
        rows = [evaluate_point(cfg, x, seed, i) for i, x in tasks]
    rows.sort(key=lambda r: r["value"])
    return rows


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else ""
    return str(v)


SWEEP_HEADER = ("axis", "value") + MODEL_COLUMNS + COUNT_COLUMNS + ("error",)


def write_sweep_csv(rows: list[dict], path: str | Path) -> None:
    lines = [",".join(SWEEP_HEADER)]
    for r in rows:
        cells = [_fmt(r.get(k)) for k in SWEEP_HEADER]
        cells[-1] = '"' + cells[-1].replace('"', "'") + '"' if cells[-1] else ""
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")
