"""Synthetic output envelopes shaped like a storage experiment at the operating point."""

from __future__ import annotations

import math

import numpy as np

from memlab.counting import expected_counts
from memlab.mbsim import SignalEnvelope
from memlab.models import Calibration

LN2 = math.log(2.0)
FINE = np.arange(-50.0, 250.0, 0.01)
T_FILTER = 0.4
RETRIEVAL_PEAK = 140.5
LEAK_PEAK = 0.5


def _gauss(t, center, fwhm, photons):
    return photons * np.exp(-4 * LN2 * ((t - center) / fwhm) ** 2) / (fwhm * math.sqrt(math.pi / (4 * LN2)))


def leak_flux(t):
    """Sharp transmitted pulse plus an exponential tail (photons per ns per input photon)."""
    tail = np.where(t > LEAK_PEAK, 0.3 * np.exp(-(t - LEAK_PEAK) / 15.0) / 15.0, 0.0)
    return _gauss(t, LEAK_PEAK, 3.0, 0.5) + tail


def retrieval_shape(t):
    """Unnormalized double-peaked retrieval with a rising leading edge."""
    edge = np.where(t < RETRIEVAL_PEAK, 0.05 * np.exp((t - RETRIEVAL_PEAK) / 4.0) / 4.0, 0.0)
    return _gauss(t, RETRIEVAL_PEAK, 5.0, 1.0) + _gauss(t, 152.0, 5.0, 0.6) + edge


def envelopes(eta_e2e: float = 0.13, window=(120.0, 155.0)):
    """Leak and retrieval envelopes; the retrieval carries ``eta_e2e / T_FILTER`` photons inside ``window``."""
    shape = retrieval_shape(FINE)
    inside = (FINE >= window[0]) & (FINE < window[1])
    area = np.trapezoid(np.where(inside, shape, 0.0), FINE)
    ret = shape * (eta_e2e / T_FILTER) / area
    return (
        SignalEnvelope(FINE, np.sqrt(ret).astype(complex)),
        SignalEnvelope(FINE, np.sqrt(leak_flux(FINE)).astype(complex)),
    )


def noise_for_snr(snr: float, eta_e2e: float, cal: Calibration, window_len: float, span: float) -> float:
    """Flat noise per attempt over ``span`` giving ``snr`` in a window of ``window_len`` ns (alpha2 = 1)."""
    per_ns = eta_e2e * cal.apd_efficiency / snr / window_len
    return per_ns * span


def expected_window(cal, signal, leak, noise, edges, window):
    """Expected (signal+noise, noise) counts inside ``window`` for bins with these ``edges``."""
    lam_s = expected_counts(signal, leak, noise, cal, 1.0, edges)
    lam_n = expected_counts(None, None, noise, cal, 1.0, edges)
    left = edges[:-1]
    mask = (left >= window[0] - 1e-9) & (left < window[1] - 1e-9)
    return float(lam_s[mask].sum()), float(lam_n[mask].sum())


# --- noise scan ----------------------------------------------------------------------

SCAN_ENERGIES = np.linspace(40.0, 560.0, 8)
SCAN_DETUNINGS = np.linspace(-3000.0, 3000.0, 15)
SCAN_TRUTH = {"n_srs": 0.014, "n_fl": 0.007, "n_fwm": 0.0, "fl_sat_e": 16.0, "fwm_b": 0.0}


def noise_scan(seed: int, attempts: float, gauss_fwhm: float = 380.0, lorentz_fwhm: float = 920.0):
    """Poisson noise counts on a detuning x energy grid.

    At every detuning the energy dependence is b E^2 + c E + d E/(e + E) with
    b = 0, c fixed so that SRS reaches n_srs at the largest energy, and d set
    so that fluorescence there equals n_fl times the unit-peak Voigt profile.
    Returns [(delta, Dataset)] and the true (fwm, srs, fluorescence) at the
    largest energy for every detuning.
    """
    from memlab.fitting import Dataset
    from memlab.voigt import voigt_unit_peak

    rng = np.random.default_rng(seed)
    e_max = SCAN_ENERGIES[-1]
    e = SCAN_TRUTH["fl_sat_e"]
    c = SCAN_TRUTH["n_srs"] / e_max
    scan, truth = [], []
    for delta in SCAN_DETUNINGS:
        fl = SCAN_TRUTH["n_fl"] * voigt_unit_peak(delta, gauss_fwhm, lorentz_fwhm)
        d = fl * (e + e_max) / e_max
        mu = SCAN_TRUTH["fwm_b"] * SCAN_ENERGIES**2 + c * SCAN_ENERGIES + d * SCAN_ENERGIES / (e + SCAN_ENERGIES)
        counts = rng.poisson(mu * attempts)
        scan.append((float(delta), Dataset.from_counts(SCAN_ENERGIES, counts, attempts)))
        truth.append((SCAN_TRUTH["fwm_b"] * e_max**2, SCAN_TRUTH["n_srs"], float(fl)))
    return scan, truth


def run_two_stage(scan, gauss_fwhm: float = 380.0, lorentz_fwhm: float = 920.0, jobs: int = 1):
    """Per-detuning energy fits, then the detuning fit of the measured totals at the largest energy."""
    from memlab.fitting import decompose_vs_detuning, fit_total_noise

    rows = decompose_vs_detuning(scan, jobs=jobs)
    by_delta = dict(scan)
    totals = [by_delta[r.delta].sorted() for r in rows]
    fwm = [r.components["fwm"][0] if r.components else math.nan for r in rows]
    fwm_s = [r.components["fwm"][1] if r.components else math.nan for r in rows]
    total = fit_total_noise(
        [r.delta for r in rows], [float(ds.y[-1]) for ds in totals], [float(ds.sigma_y[-1]) for ds in totals],
        gauss_fwhm, lorentz_fwhm, fwm, fwm_s,
    )
    return rows, total
