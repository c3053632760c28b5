"""Closed-form efficiency and noise models, figures of merit and optical-chain helpers.

Units follow the experiment's bookkeeping: times in ns, energies in pJ,
frequencies in MHz (ordinary frequency, not angular), noise in counts per
retrieval attempt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import constants

from .voigt import voigt_unit_peak

LN2 = math.log(2.0)

# Operating point of the Cs D1 memory: peak control power and the quoted
# peak control Rabi frequency it corresponds to.
OPERATING_CONTROL_POWER_MW = 12.9
OPERATING_CONTROL_RABI = 2 * math.pi * 540e6  # rad/s
CS_D1_DIPOLE = 2.7e-29  # C m

AXES = ("pulse_width", "energy", "detuning")


def _require_positive(name: str, value) -> None:
    if np.any(np.asarray(value) <= 0):
        raise ValueError(f"{name} must be > 0, got {value!r}")


@dataclass(frozen=True)
class EfficiencyParams:
    """Parameters of the three empirical end-to-end efficiency curves.

    Defaults are the fitted values for pulse width and control energy. The
    detuning curve was published without numbers, so its Lorentzian is a
    placeholder to be fitted.
    """

    eta0_width: float = 0.128
    mem_bandwidth_fwhm: float = 220.0  # MHz
    eta0_energy: float = 0.107
    energy_scale_a: float = 156.0  # pJ
    eta0_detuning: float = 0.13
    lorentz_fwhm: float = 1000.0  # MHz
    lorentz_center: float = 0.0  # MHz
    lorentz_peak_absorbance: float = 2.0

    def __post_init__(self):
        for name in ("eta0_width", "eta0_energy", "eta0_detuning"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        for name in ("mem_bandwidth_fwhm", "energy_scale_a", "lorentz_fwhm"):
            _require_positive(name, getattr(self, name))
        if self.lorentz_peak_absorbance < 0:
            raise ValueError("lorentz_peak_absorbance must be >= 0")


@dataclass(frozen=True)
class NoiseParams:
    """Noise model parameters.

    ``fwm_quad_b``, ``srs_lin_c``, ``fl_amp_d`` and ``fl_sat_e`` describe the
    control-energy dependence at one detuning; ``n_srs``, ``n_fl`` and
    ``n_fwm`` the detuning dependence at maximal control energy. Defaults are
    the values reported at 334 MHz red detuning and for the detuning scan.
    """

    fwm_quad_b: float = 0.0
    srs_lin_c: float = 4e-5
    fl_amp_d: float = 7e-3
    fl_sat_e: float = 16.0
    n_srs: float = 14e-3
    n_fl: float = 7e-3
    n_fwm: float = 0.0
    voigt_gauss_fwhm: float = 380.0
    voigt_lorentz_fwhm: float = 920.0

    def __post_init__(self):
        for name in ("fwm_quad_b", "srs_lin_c", "fl_amp_d", "fl_sat_e", "n_srs", "n_fl", "n_fwm"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        _require_positive("voigt_gauss_fwhm", self.voigt_gauss_fwhm)
        _require_positive("voigt_lorentz_fwhm", self.voigt_lorentz_fwhm)


@dataclass(frozen=True)
class Calibration:
    """Detection-chain calibration.

    ``split_ratio_sigma`` is the signal-to-monitor power ratio, ``monitor_rate``
    the monitor APD count rate in counts/s. The ``*_rel_err`` fields are
    relative 1-sigma uncertainties used for error propagation only.
    """

    split_ratio_sigma: float = 9.0
    apd_efficiency: float = 0.33
    rep_rate: float = 1.0 / 11e-6  # Hz
    integration_time: float = 60.0  # s
    monitor_rate: float = 3333.0  # counts/s
    filter_signal_transmission: float = 0.4
    split_ratio_rel_err: float = 0.0
    apd_efficiency_rel_err: float = 0.05 / 0.33

    def __post_init__(self):
        if not 0.0 < self.apd_efficiency <= 1.0:
            raise ValueError(f"apd_efficiency must lie in (0, 1], got {self.apd_efficiency}")
        if not 0.0 < self.filter_signal_transmission <= 1.0:
            raise ValueError("filter_signal_transmission must lie in (0, 1]")
        _require_positive("rep_rate", self.rep_rate)
        _require_positive("integration_time", self.integration_time)
        if self.split_ratio_sigma < 0 or self.monitor_rate < 0:
            raise ValueError("split_ratio_sigma and monitor_rate must be >= 0")

    @property
    def attempts(self) -> float:
        """Number of storage attempts during the integration time."""
        return self.rep_rate * self.integration_time


@dataclass
class MetricsReport:
    alpha2: float
    eta_e2e: float
    eta_mem: float
    snr: float | None
    mu1: float | None
    storage_time: float | None
    window: tuple[float, float]
    eta_e2e_err: float | None = None
    snr_err: float | None = None
    flags: list[str] = field(default_factory=list)


# --- efficiency models -------------------------------------------------------


def eta_vs_pulse_width(dt_s, p: EfficiencyParams):
    """End-to-end efficiency against signal FWHM ``dt_s`` (ns).

    The memory bandwidth is an ordinary frequency in MHz, so the product
    with a duration in ns carries a factor 1e-3.
    """
    _require_positive("dt_s", dt_s)
    dt = np.asarray(dt_s, dtype=float)
    ratio = 4.0 * LN2 / (dt * p.mem_bandwidth_fwhm * 1e-3)
    out = p.eta0_width / np.sqrt(1.0 + ratio**2)
    return float(out) if out.ndim == 0 else out


def eta_vs_control_energy(e_c, p: EfficiencyParams):
    _require_positive("e_c", e_c)
    e = np.asarray(e_c, dtype=float)
    out = p.eta0_energy * np.exp(-p.energy_scale_a / e)
    return float(out) if out.ndim == 0 else out


def detuning_absorbance(delta, p: EfficiencyParams):
    """Lorentzian absorbance used by the detuning efficiency curve."""
    hw = 0.5 * p.lorentz_fwhm
    d = np.asarray(delta, dtype=float) - p.lorentz_center
    return p.lorentz_peak_absorbance * hw**2 / (d**2 + hw**2)


def eta_vs_detuning(delta, p: EfficiencyParams):
    out = p.eta0_detuning * np.exp(-detuning_absorbance(delta, p))
    return float(out) if np.ndim(out) == 0 else out


# --- noise models -----------------------------------------------------------


def noise_components_vs_energy(e_c, p: NoiseParams) -> dict[str, np.ndarray | float]:
    """FWM (quadratic), SRS (linear) and fluorescence (saturating) parts of the noise."""
    e = np.asarray(e_c, dtype=float)
    if np.any(e < 0):
        raise ValueError("e_c must be >= 0")
    fwm = p.fwm_quad_b * e**2
    srs = p.srs_lin_c * e
    with np.errstate(invalid="ignore", divide="ignore"):
        fl = np.where(e > 0, p.fl_amp_d * e / (p.fl_sat_e + e), 0.0)
    parts = {"fwm": fwm, "srs": srs, "fluorescence": fl}
    if e.ndim == 0:
        return {k: float(v) for k, v in parts.items()}
    return parts


def noise_vs_energy(e_c, p: NoiseParams):
    parts = noise_components_vs_energy(e_c, p)
    return parts["fwm"] + parts["srs"] + parts["fluorescence"]


def noise_vs_detuning(delta, p: NoiseParams):
    v = voigt_unit_peak(delta, p.voigt_gauss_fwhm, p.voigt_lorentz_fwhm)
    return p.n_srs + p.n_fl * v + p.n_fwm


# --- figures of merit -------------------------------------------------------


def efficiency_model(axis: str, x, ep: EfficiencyParams):
    if axis == "pulse_width":
        return eta_vs_pulse_width(x, ep)
    if axis == "energy":
        return eta_vs_control_energy(x, ep)
    if axis == "detuning":
        return eta_vs_detuning(x, ep)
    raise ValueError(f"unknown axis {axis!r}; expected one of {AXES}")


def noise_model(axis: str, x, np_: NoiseParams):
    """Noise per attempt along one sweep axis.

    The pulse-width axis has no published noise dependence; the noise at the
    largest scanned control energy (the detuning-scan level far from
    resonance) is used as a constant.
    """
    if axis == "energy":
        return noise_vs_energy(x, np_)
    if axis == "detuning":
        return noise_vs_detuning(x, np_)
    if axis == "pulse_width":
        return np.full(np.shape(x), np_.n_srs + np_.n_fwm) if np.ndim(x) else np_.n_srs + np_.n_fwm
    raise ValueError(f"unknown axis {axis!r}; expected one of {AXES}")


def snr_model(axis: str, x, alpha2: float, cal: Calibration, ep: EfficiencyParams, np_: NoiseParams):
    """Model SNR: detected retrieved signal over noise, both per attempt."""
    noise = np.asarray(noise_model(axis, x, np_), dtype=float)
    if np.any(noise <= 0):
        raise ZeroDivisionError("SNR undefined: noise model is zero")
    out = alpha2 * np.asarray(efficiency_model(axis, x, ep)) * cal.apd_efficiency / noise
    return float(out) if out.ndim == 0 else out


def mu_one(alpha2: float, snr: float) -> float:
    """Input photon number that would give an output SNR of one, assuming SNR linear in alpha2."""
    if snr <= 0:
        raise ValueError(f"snr must be > 0 for mu_one, got {snr}")
    return alpha2 / snr


def transform_limit_bandwidth(dt_s):
    """FWHM bandwidth in MHz of a transform-limited Gaussian of FWHM ``dt_s`` ns."""
    _require_positive("dt_s", dt_s)
    return 2.0 * LN2 / (math.pi * np.asarray(dt_s, dtype=float)) * 1e3


def peak_rabi_frequency(power_mw: float, beam_fwhm_um: float, dipole: float = CS_D1_DIPOLE) -> float:
    """Peak Rabi frequency (rad/s) of a Gaussian beam.

    Uses I0 = 2P/(pi w^2) with w the 1/e^2 intensity radius, w = FWHM/sqrt(2 ln 2),
    and E0 = sqrt(2 I0 / (c eps0)).
    """
    for name, v in (("power_mw", power_mw), ("beam_fwhm_um", beam_fwhm_um), ("dipole", dipole)):
        _require_positive(name, v)
    w = beam_fwhm_um * 1e-6 / math.sqrt(2.0 * LN2)
    intensity = 2.0 * power_mw * 1e-3 / (math.pi * w**2)
    e_field = math.sqrt(2.0 * intensity / (constants.c * constants.epsilon_0))
    return dipole * e_field / constants.hbar


def etalon_transmission(detune, fsr: float, finesse: float):
    """Airy transmission of a lossless Fabry-Perot etalon, unit peak."""
    _require_positive("fsr", fsr)
    _require_positive("finesse", finesse)
    coeff = (2.0 * finesse / math.pi) ** 2
    out = 1.0 / (1.0 + coeff * np.sin(math.pi * np.asarray(detune, dtype=float) / fsr) ** 2)
    return float(out) if out.ndim == 0 else out
