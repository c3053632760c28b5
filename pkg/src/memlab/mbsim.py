"""One-dimensional Maxwell-Bloch model of a Lambda-type EIT memory.

Equations in the co-moving frame, with zeta = z/L in [0, 1]::

    dE/dzeta = i g P
    dP/dt    = -(gamma + i Delta) P + i g E + i (Omega/2) S
    dS/dt    = -(gamma_gs + i delta2) S + i (Omega*/2) P

with g = sqrt(d gamma / 2), so that a weak resonant field with the control
off leaves the cell with intensity exp(-d). |E|^2 is a photon flux
(photons/ns); |P|^2 and |S|^2 integrated over zeta are photon numbers, so
the scheme conserves photons up to the explicit decay terms.

Internally times are ns and rates rad/ns; the public parameter types carry
rates in rad/s.

Method of lines: the field is reconstructed at each time from a cumulative
trapezoid integral of P along zeta, and (P, S) are stepped with classical RK4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numba import njit

LN2 = math.log(2.0)
_GAUSS_AREA = math.sqrt(math.pi / (4.0 * LN2))  # integral of exp(-4 ln2 x^2) dx

# Stability / accuracy limits on the grid.
MAX_RATE_STEP = 0.05  # dt * fastest rate
MAX_OD_STEP = 0.1  # d * dzeta


class ResolutionError(ValueError):
    """The requested grid does not resolve the fastest dynamics."""


@dataclass(frozen=True)
class MediumParams:
    """Vapor cell and Lambda-system parameters. Rates in rad/s."""

    optical_depth: float = 20.0
    excited_decay_gamma: float = 2 * math.pi * 51.0e6
    ground_decoherence: float = 0.0
    one_photon_detuning: float = 0.0
    two_photon_detuning: float = 0.0
    cell_length: float = 0.075  # m

    def __post_init__(self):
        if self.optical_depth < 0:
            raise ValueError("optical_depth must be >= 0")
        if self.excited_decay_gamma < 0 or self.ground_decoherence < 0:
            raise ValueError("decay rates must be >= 0")
        if self.cell_length <= 0:
            raise ValueError("cell_length must be > 0")


# Cs D1 natural half width (HWHM) and an N2 pressure broadening coefficient
# (FWHM per Torr); the latter is a literature-typical value, configurable.
CS_D1_NATURAL_HWHM_MHZ = 4.575 / 2
N2_BROADENING_MHZ_PER_TORR = 19.5


def polarization_decay(buffer_torr: float = 5.0, broadening_mhz_per_torr: float = N2_BROADENING_MHZ_PER_TORR) -> float:
    """Total polarization decay (rad/s): natural half width plus half the pressure-broadened FWHM."""
    return 2 * math.pi * 1e6 * (CS_D1_NATURAL_HWHM_MHZ + 0.5 * broadening_mhz_per_torr * buffer_torr)


def effective_optical_depth(optical_depth: float, pumping_efficiency: float = 0.8) -> float:
    """Optical depth seen by the signal when only a fraction of atoms sits in |g>."""
    return optical_depth * pumping_efficiency


@dataclass(frozen=True)
class ControlPulse:
    """Gaussian control pulse; ``fwhm`` is the FWHM of Omega^2 (i.e. of the intensity)."""

    peak_rabi: float  # rad/s
    fwhm: float  # ns
    center_time: float = 0.0  # ns

    def __post_init__(self):
        if self.peak_rabi < 0:
            raise ValueError("peak_rabi must be >= 0")
        if not self.fwhm > 0:
            raise ValueError("fwhm must be > 0")

    def rabi(self, t):
        """Omega(t) in rad/ns."""
        return self.peak_rabi * 1e-9 * np.exp(-2.0 * LN2 * ((np.asarray(t) - self.center_time) / self.fwhm) ** 2)

    def rabi_squared_area(self) -> float:
        """Integral of Omega^2 dt in rad^2/ns."""
        return (self.peak_rabi * 1e-9) ** 2 * self.fwhm * _GAUSS_AREA

    def shifted(self, center_time: float) -> "ControlPulse":
        return ControlPulse(self.peak_rabi, self.fwhm, center_time)


# E_C = kappa * integral(Omega^2 dt), with kappa fixed by the operating point
# P_max = 12.9 mW <-> Omega = 2 pi 540 MHz. Units: mW per (rad/ns)^2, and mW * ns = pJ.
ENERGY_KAPPA = 12.9 / (2 * math.pi * 540e6 * 1e-9) ** 2


def control_energy_pj(ctrl: ControlPulse) -> float:
    """Control pulse energy in pJ."""
    return ENERGY_KAPPA * ctrl.rabi_squared_area()


def rabi_for_energy(energy_pj: float, fwhm: float) -> float:
    """Peak Rabi frequency (rad/s) of a Gaussian control pulse with the given energy and FWHM."""
    if energy_pj < 0 or fwhm <= 0:
        raise ValueError("energy must be >= 0 and fwhm > 0")
    return math.sqrt(energy_pj / (ENERGY_KAPPA * fwhm * _GAUSS_AREA)) * 1e9


@dataclass
class SignalEnvelope:
    """Field envelope; |amplitude|^2 is a photon flux in photons/ns."""

    time_grid: np.ndarray
    amplitude: np.ndarray

    def __post_init__(self):
        self.time_grid = np.asarray(self.time_grid, dtype=float)
        self.amplitude = np.asarray(self.amplitude, dtype=complex)
        if self.time_grid.shape != self.amplitude.shape:
            raise ValueError("time_grid and amplitude must have the same shape")
        if self.time_grid.size < 2 or np.any(np.diff(self.time_grid) <= 0):
            raise ValueError("time_grid must be strictly increasing with >= 2 points")

    def photon_number(self) -> float:
        return float(np.trapezoid(np.abs(self.amplitude) ** 2, self.time_grid))

    def sample(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        re = np.interp(t, self.time_grid, self.amplitude.real, left=0.0, right=0.0)
        im = np.interp(t, self.time_grid, self.amplitude.imag, left=0.0, right=0.0)
        return re + 1j * im


def gaussian_signal(fwhm: float, center: float, time_grid, photons: float = 1.0) -> SignalEnvelope:
    """Gaussian pulse whose intensity FWHM is ``fwhm`` ns and which carries ``photons`` photons."""
    if fwhm <= 0:
        raise ValueError("fwhm must be > 0")
    t = np.asarray(time_grid, dtype=float)
    flux = photons * np.exp(-4.0 * LN2 * ((t - center) / fwhm) ** 2) / (fwhm * _GAUSS_AREA)
    return SignalEnvelope(t, np.sqrt(flux).astype(complex))


@dataclass
class SpinWaveState:
    z_grid: np.ndarray  # normalized position zeta in [0, 1]
    amplitude: np.ndarray

    def photon_number(self) -> float:
        return float(np.trapezoid(np.abs(self.amplitude) ** 2, self.z_grid))


@dataclass(frozen=True)
class Grid:
    """Discretization: ``nz`` spatial points, ``nt`` time steps over [t_start, t_stop]."""

    nz: int
    nt: int
    t_start: float | None = None
    t_stop: float | None = None


@dataclass
class StorageResult:
    leak: SignalEnvelope
    spin: SpinWaveState
    scattered_fraction: float
    polarization_fraction: float
    input_photons: float

    def budget_error(self) -> float:
        """Relative mismatch of leak + spin + polarization + scattered vs input."""
        total = self.leak.photon_number() + self.spin.photon_number() + self.polarization_fraction * self.input_photons
        total += self.scattered_fraction * self.input_photons
        return abs(total - self.input_photons) / self.input_photons


@dataclass
class _Run:
    times: np.ndarray
    e_out: np.ndarray
    P: np.ndarray
    S: np.ndarray
    scattered: float


def _rates(m: MediumParams) -> tuple[float, float, float, float, float]:
    gamma = m.excited_decay_gamma * 1e-9
    gamma_gs = m.ground_decoherence * 1e-9
    delta = m.one_photon_detuning * 1e-9
    delta2 = m.two_photon_detuning * 1e-9
    g = math.sqrt(0.5 * m.optical_depth * gamma)
    return gamma, gamma_gs, delta, delta2, g


def check_resolution(dt: float, nz: int, peak_rabi: float, m: MediumParams) -> None:
    """Raise ResolutionError if (dt, nz) under-resolve the dynamics."""
    gamma, gamma_gs, delta, delta2, g = _rates(m)
    fastest = max(peak_rabi * 1e-9, abs(delta), gamma, abs(delta2), gamma_gs)
    if fastest > 0 and dt > MAX_RATE_STEP / fastest:
        raise ResolutionError(
            f"time step {dt:.4g} ns exceeds {MAX_RATE_STEP}/max rate = {MAX_RATE_STEP / fastest:.4g} ns"
        )
    if nz < 3:
        raise ResolutionError("need at least 3 spatial points")
    dz = 1.0 / (nz - 1)
    if m.optical_depth * dz > MAX_OD_STEP:
        raise ResolutionError(
            f"spatial step resolves optical depth poorly: d*dz = {m.optical_depth * dz:.3g} > {MAX_OD_STEP}"
        )


def suggest_grid(m: MediumParams, peak_rabi: float, t_start: float, t_stop: float, oversample: float = 1.0) -> Grid:
    """Smallest grid that passes the resolution checks, refined by ``oversample``."""
    gamma, gamma_gs, delta, delta2, _ = _rates(m)
    fastest = max(peak_rabi * 1e-9, abs(delta), gamma, abs(delta2), gamma_gs, 1e-12)
    nt = int(math.ceil(oversample * (t_stop - t_start) * fastest / MAX_RATE_STEP))
    nz = int(math.ceil(oversample * m.optical_depth / MAX_OD_STEP)) + 1
    return Grid(nz=max(nz, 41), nt=max(nt, 10), t_start=t_start, t_stop=t_stop)


@njit(cache=True, nogil=True)
def _rk4_kernel(ein_full, ein_half, om_full, om_half, times, P, S, gamma, gamma_gs, delta, delta2, g):
    nz = P.size
    dz = 1.0 / (nz - 1)
    cp = -(gamma + 1j * delta)
    cs = -(gamma_gs + 1j * delta2)
    ig = 1j * g
    nt = times.size - 1
    e_out = np.empty(nt + 1, np.complex128)
    kp = np.empty((4, nz), np.complex128)
    ks = np.empty((4, nz), np.complex128)
    loss = np.zeros(4)
    Pt = np.empty(nz, np.complex128)
    St = np.empty(nz, np.complex128)

    def edge(Pv, ein):
        acc = 0.0 + 0.0j
        for j in range(1, nz):
            acc += 0.5 * dz * (Pv[j] + Pv[j - 1])
        return ein + ig * acc

    def rhs(Pv, Sv, ein, om, stage):
        acc = 0.0 + 0.0j
        lp = 0.0
        ls = 0.0
        hom = 0.5j * om
        homc = 0.5j * np.conj(om)
        for j in range(nz):
            if j > 0:
                acc += 0.5 * dz * (Pv[j] + Pv[j - 1])
            E = ein + ig * acc
            kp[stage, j] = cp * Pv[j] + ig * E + hom * Sv[j]
            ks[stage, j] = cs * Sv[j] + homc * Pv[j]
            w = dz if (j > 0 and j < nz - 1) else 0.5 * dz
            lp += w * (Pv[j].real ** 2 + Pv[j].imag ** 2)
            ls += w * (Sv[j].real ** 2 + Sv[j].imag ** 2)
        loss[stage] = 2.0 * gamma * lp + 2.0 * gamma_gs * ls

    e_out[0] = edge(P, ein_full[0])
    scattered = 0.0
    for k in range(nt):
        h = times[k + 1] - times[k]
        rhs(P, S, ein_full[k], om_full[k], 0)
        for j in range(nz):
            Pt[j] = P[j] + 0.5 * h * kp[0, j]
            St[j] = S[j] + 0.5 * h * ks[0, j]
        rhs(Pt, St, ein_half[k], om_half[k], 1)
        for j in range(nz):
            Pt[j] = P[j] + 0.5 * h * kp[1, j]
            St[j] = S[j] + 0.5 * h * ks[1, j]
        rhs(Pt, St, ein_half[k], om_half[k], 2)
        for j in range(nz):
            Pt[j] = P[j] + h * kp[2, j]
            St[j] = S[j] + h * ks[2, j]
        rhs(Pt, St, ein_full[k + 1], om_full[k + 1], 3)
        for j in range(nz):
            P[j] += (h / 6.0) * (kp[0, j] + 2.0 * kp[1, j] + 2.0 * kp[2, j] + kp[3, j])
            S[j] += (h / 6.0) * (ks[0, j] + 2.0 * ks[1, j] + 2.0 * ks[2, j] + ks[3, j])
        scattered += (h / 6.0) * (loss[0] + 2.0 * loss[1] + 2.0 * loss[2] + loss[3])
        e_out[k + 1] = edge(P, ein_full[k + 1])
    return e_out, scattered


def _integrate(
    e_in: Callable[[np.ndarray], np.ndarray],
    omega: Callable[[np.ndarray], np.ndarray],
    m: MediumParams,
    times: np.ndarray,
    nz: int,
    P0: np.ndarray | None = None,
    S0: np.ndarray | None = None,
) -> _Run:
    gamma, gamma_gs, delta, delta2, g = _rates(m)
    P = np.zeros(nz, complex) if P0 is None else np.array(P0, dtype=complex)
    S = np.zeros(nz, complex) if S0 is None else np.array(S0, dtype=complex)
    t_half = 0.5 * (times[1:] + times[:-1])

    def sampled(f, t):
        return np.ascontiguousarray(np.broadcast_to(np.asarray(f(t), dtype=complex), t.shape))

    e_out, scattered = _rk4_kernel(
        sampled(e_in, times),
        sampled(e_in, t_half),
        sampled(omega, times),
        sampled(omega, t_half),
        np.ascontiguousarray(times, dtype=float),
        P,
        S,
        gamma,
        gamma_gs,
        delta,
        delta2,
        g,
    )
    return _Run(times, e_out, P, S, scattered)


def _time_axis(grid: Grid, t_start: float, t_stop: float) -> np.ndarray:
    t0 = t_start if grid.t_start is None else grid.t_start
    t1 = t_stop if grid.t_stop is None else grid.t_stop
    if not t1 > t0:
        raise ValueError("grid time span must be positive")
    if grid.nt < 1:
        raise ResolutionError("need at least one time step")
    return np.linspace(t0, t1, grid.nt + 1)


def simulate_storage(sig: SignalEnvelope, ctrl: ControlPulse, m: MediumParams, grid: Grid) -> StorageResult:
    """Write ``sig`` into the medium with the control pulse ``ctrl``.

    The time span defaults to the signal's own time grid. Returns the field
    transmitted during the write (leak), the spin wave left at the end, and
    the fraction of input photons lost to excited-state decay and ground-state
    decoherence during the run.
    """
    times = _time_axis(grid, sig.time_grid[0], sig.time_grid[-1])
    check_resolution(times[1] - times[0], grid.nz, ctrl.peak_rabi, m)
    n_in = sig.photon_number()
    run = _integrate(sig.sample, ctrl.rabi, m, times, grid.nz)
    z = np.linspace(0.0, 1.0, grid.nz)
    norm = n_in if n_in > 0 else 1.0
    pol = float(np.trapezoid(np.abs(run.P) ** 2, z)) / norm
    return StorageResult(
        leak=SignalEnvelope(times, run.e_out),
        spin=SpinWaveState(z, run.S),
        scattered_fraction=run.scattered / norm,
        polarization_fraction=pol,
        input_photons=n_in,
    )


def simulate_retrieval(
    spin: SpinWaveState, ctrl: ControlPulse, m: MediumParams, grid: Grid, wait: float = 0.0
) -> SignalEnvelope:
    """Read out a stored spin wave in the forward direction.

    The spin wave amplitude first decays by exp(-gamma_gs * wait) (``wait`` in
    ns). The default time span is +-3 FWHM around the read pulse center.
    """
    if wait < 0:
        raise ValueError("wait must be >= 0")
    times = _time_axis(grid, ctrl.center_time - 3.0 * ctrl.fwhm, ctrl.center_time + 3.0 * ctrl.fwhm)
    check_resolution(times[1] - times[0], grid.nz, ctrl.peak_rabi, m)
    z = np.linspace(0.0, 1.0, grid.nz)
    s0 = spin.amplitude
    if spin.z_grid.size != grid.nz or not np.allclose(spin.z_grid, z):
        s0 = np.interp(z, spin.z_grid, s0.real) + 1j * np.interp(z, spin.z_grid, s0.imag)
    s0 = s0 * math.exp(-m.ground_decoherence * 1e-9 * wait)
    run = _integrate(lambda t: np.zeros(np.shape(t), complex), ctrl.rabi, m, times, grid.nz, S0=s0)
    return SignalEnvelope(times, run.e_out)


def internal_efficiency(input: SignalEnvelope, output: SignalEnvelope) -> float:
    """Retrieved photons over input photons."""
    n_in = input.photon_number()
    if n_in <= 0:
        raise ValueError("input envelope carries no photons")
    return output.photon_number() / n_in


# --- steady-state weak-probe response ------------------------------------------


def analytic_transmission(m: MediumParams, ctrl_rabi: float, probe_detunings) -> np.ndarray:
    """Closed-form intensity transmission of a weak CW probe (detunings in rad/s)."""
    gamma, gamma_gs, delta, delta2, g = _rates(m)
    om = ctrl_rabi * 1e-9
    d = np.asarray(probe_detunings, dtype=float) * 1e-9
    one = gamma + 1j * (delta - d)
    if om == 0.0:
        chi = 1.0 / one
    else:
        two = gamma_gs + 1j * (delta2 - d)
        chi = two / (one * two + 0.25 * om**2)
    return np.exp(-2.0 * g**2 * chi.real)


def weak_probe_transmission_spectrum(
    m: MediumParams, ctrl_rabi: float, probe_detunings, *, oversample: float = 1.0, record: float | None = None
) -> np.ndarray:
    """Weak-probe transmission measured with the time-domain solver.

    A short probe pulse is propagated under a constant control field and the
    transfer function is the ratio of output and input Fourier transforms,
    evaluated at ``probe_detunings`` (rad/s). ``record`` (ns) is the length of
    the time window; by default it covers several response times of the medium.
    """
    det = np.asarray(probe_detunings, dtype=float) * 1e-9
    gamma, gamma_gs, delta, delta2, g = _rates(m)
    om = ctrl_rabi * 1e-9
    span = max(np.max(np.abs(det - delta)), np.max(np.abs(det)), 1e-3)
    # probe short enough that its spectrum still has weight at the largest detuning
    tau = min(8.0 / span, 5.0 / max(gamma, 1e-6))
    if record is None:
        slow = [gamma]
        if om > 0:
            slow.append(0.25 * om**2 / (gamma * max(m.optical_depth, 1.0)) + gamma_gs)
        record = 6.0 * tau + 40.0 / min(slow)
    t0 = -3.0 * tau
    grid = suggest_grid(m, ctrl_rabi, t0, t0 + record, oversample)
    times = np.linspace(t0, t0 + record, grid.nt + 1)
    check_resolution(times[1] - times[0], grid.nz, ctrl_rabi, m)
    probe = np.exp(-2.0 * LN2 * (times / tau) ** 2).astype(complex)
    run = _integrate(
        lambda t: np.exp(-2.0 * LN2 * (np.asarray(t) / tau) ** 2).astype(complex),
        lambda t: om,
        m,
        times,
        grid.nz,
    )
    phase = np.exp(1j * np.outer(det, times))
    h = np.trapezoid(phase * run.e_out, times, axis=1) / np.trapezoid(phase * probe, times, axis=1)
    return np.abs(h) ** 2


def efficiency_vs_bandwidth_curve(
    m: MediumParams,
    ctrl: ControlPulse,
    dt_list,
    *,
    control_to_signal: float = 2.0,
    signal_lag: float = 1.0,
    oversample: float = 1.0,
    read_delay: float | None = None,
) -> list[tuple[float, float]]:
    """Storage-and-retrieval efficiency against signal FWHM.

    The write/read control keeps the energy of ``ctrl`` (its integral of
    Omega^2) but its FWHM follows the signal, ``control_to_signal * dt``; the
    peak Rabi frequency is capped at ``ctrl.peak_rabi``, the available control
    power. The signal is centered ``signal_lag * dt`` after the control.
    """
    area = ctrl.rabi_squared_area()
    out = []
    for dt in dt_list:
        if dt <= 0:
            raise ValueError("pulse widths must be > 0")
        fwhm = control_to_signal * dt
        peak = min(ctrl.peak_rabi, math.sqrt(area / (fwhm * _GAUSS_AREA)) * 1e9)
        write = ControlPulse(peak, fwhm, 0.0)
        t0 = -3.0 * max(fwhm, dt)
        t1 = signal_lag * dt + 3.0 * max(fwhm, dt)
        g = suggest_grid(m, peak, t0, t1, oversample)
        sig = gaussian_signal(dt, signal_lag * dt, np.linspace(t0, t1, g.nt + 1))
        stored = simulate_storage(sig, write, m, g)
        delay = read_delay if read_delay is not None else t1 + 3.0 * fwhm
        read = write.shifted(delay)
        gr = suggest_grid(m, peak, delay - 3.0 * fwhm, delay + 3.0 * fwhm, oversample)
        retrieved = simulate_retrieval(stored.spin, read, m, gr, wait=delay - 3.0 * fwhm - t1)
        out.append((float(dt), internal_efficiency(sig, retrieved)))
    return out


# --- files ---------------------------------------------------------------------------


def write_envelope(env: SignalEnvelope, path) -> None:
    """CSV with header ``time_ns,re,im``."""
    from pathlib import Path

    lines = ["time_ns,re,im"]
    lines += [f"{float(t)!r},{float(a.real)!r},{float(a.imag)!r}" for t, a in zip(env.time_grid, env.amplitude)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_envelope(path) -> SignalEnvelope:
    from pathlib import Path

    rows = Path(path).read_text().strip().splitlines()
    if not rows or rows[0].strip() != "time_ns,re,im":
        raise ValueError(f"{path}: expected header 'time_ns,re,im'")
    vals = np.array([[float(v) for v in row.split(",")] for row in rows[1:]])
    return SignalEnvelope(vals[:, 0], vals[:, 1] + 1j * vals[:, 2])
