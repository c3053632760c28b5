"""Arrival-time histograms: synthesis from envelopes and analysis into memory metrics."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .mbsim import SignalEnvelope
from .models import Calibration, MetricsReport, mu_one

DEFAULT_BIN_NS = 1.0
DEFAULT_T_MAX_NS = 155.0
RETRIEVAL_MARGIN_NS = 20.0


class AnalysisError(ValueError):
    """A histogram lacks the feature an analysis step needs."""


class UndefinedSNR(ZeroDivisionError):
    """SNR requested with zero noise counts."""


@dataclass(frozen=True)
class ArrivalHistogram:
    """Counts per bin; bin ``i`` covers [t0 + i*bin_width, t0 + (i+1)*bin_width)."""

    bin_width: float
    t0: float
    counts: np.ndarray
    rep_rate: float
    integration_time: float

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if self.bin_width <= 0:
            raise ValueError("bin_width must be > 0")
        if counts.ndim != 1:
            raise ValueError("counts must be one-dimensional")
        if np.issubdtype(counts.dtype, np.integer):
            if np.any(counts < 0):
                raise ValueError("counts must be >= 0")
        counts = counts.copy()
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def times(self) -> np.ndarray:
        """Left edge of every bin (ns)."""
        return self.t0 + self.bin_width * np.arange(self.counts.size)

    @property
    def attempts(self) -> float:
        return self.rep_rate * self.integration_time

    def index(self, t: float) -> int:
        """Index of the bin containing time ``t``."""
        return int(math.floor((t - self.t0) / self.bin_width + 1e-9))

    def window_sum(self, t_min: float, t_max: float) -> float:
        """Sum of bins whose left edge lies in [t_min, t_max)."""
        mask = (self.times >= t_min - 1e-9) & (self.times < t_max - 1e-9)
        return float(np.sum(self.counts[mask]))

    def same_binning(self, other: "ArrivalHistogram") -> bool:
        return (
            self.counts.size == other.counts.size
            and math.isclose(self.bin_width, other.bin_width)
            and math.isclose(self.t0, other.t0, abs_tol=1e-9)
            and math.isclose(self.rep_rate, other.rep_rate)
            and math.isclose(self.integration_time, other.integration_time)
        )


@dataclass(frozen=True)
class DetectionWindow:
    t_min: float
    t_max: float

    def __post_init__(self):
        if not self.t_min < self.t_max:
            raise ValueError(f"window needs t_min < t_max, got ({self.t_min}, {self.t_max})")


@dataclass(frozen=True)
class SequenceTiming:
    """Pulse sequence of one storage attempt. ``pump_duration``/``rep_period`` in us, the rest in ns."""

    pump_duration: float = 10.0
    write_time: float = 0.0
    signal_delay: float = 0.0
    read_delay: float = 140.0
    rep_period: float = 11.0

    def __post_init__(self):
        if not self.read_delay > self.signal_delay >= 0:
            raise ValueError("need read_delay > signal_delay >= 0")
        if self.rep_period * 1e3 <= max(self.read_delay, self.write_time, self.signal_delay):
            raise ValueError("rep_period must exceed all pulse times")

    def retrieval_start(self) -> float:
        """Start of the retrieval region: read delay minus a fixed margin."""
        return self.read_delay - RETRIEVAL_MARGIN_NS


# --- calibration ---------------------------------------------------------------


def calibrate_alpha2(cal: Calibration) -> float:
    """Mean input photon number per pulse from the monitor count rate."""
    if cal.rep_rate <= 0 or cal.apd_efficiency <= 0:
        raise ValueError("rep_rate and apd_efficiency must be > 0")
    return cal.monitor_rate * cal.split_ratio_sigma / (cal.rep_rate * cal.apd_efficiency)


def calibrate_alpha2_uncertainty(cal: Calibration) -> float:
    """1-sigma uncertainty of |alpha|^2.

    Relative errors of the splitting ratio and detector efficiency add in
    quadrature with the Poisson error of the monitor counts.
    """
    alpha2 = calibrate_alpha2(cal)
    n_mon = cal.monitor_rate * cal.integration_time
    stat = 1.0 / math.sqrt(n_mon) if n_mon > 0 else 0.0
    rel = math.sqrt(cal.split_ratio_rel_err**2 + cal.apd_efficiency_rel_err**2 + stat**2)
    return alpha2 * rel


# --- synthesis -------------------------------------------------------------------


def _bin_integrals(env: SignalEnvelope, edges: np.ndarray) -> np.ndarray:
    """Photons of |env|^2 falling into each bin, by exact integration of the piecewise-linear flux."""
    t = env.time_grid
    flux = np.abs(env.amplitude) ** 2
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (flux[1:] + flux[:-1]) * np.diff(t))))

    def cum_at(x):
        x = np.clip(x, t[0], t[-1])
        i = np.clip(np.searchsorted(t, x, side="right") - 1, 0, t.size - 2)
        h = t[i + 1] - t[i]
        s = (x - t[i]) / h
        f0, f1 = flux[i], flux[i + 1]
        return cum[i] + h * (f0 * s + 0.5 * (f1 - f0) * s**2)

    return np.diff(cum_at(edges))


def expected_counts(
    signal_envelope: SignalEnvelope | None,
    leak_envelope: SignalEnvelope | None,
    noise_rate_per_attempt,
    cal: Calibration,
    alpha2: float,
    edges: np.ndarray,
) -> np.ndarray:
    """Expected counts per bin over the whole integration.

    Envelopes are memory outputs per input photon; they are scaled by
    ``alpha2``, the filter transmission and the detector efficiency. A scalar
    noise rate (counts per attempt) is spread uniformly over the histogram
    span; an array gives the expected noise counts per attempt in every bin.
    """
    n_bins = edges.size - 1
    per_attempt = np.zeros(n_bins)
    scale = alpha2 * cal.filter_signal_transmission * cal.apd_efficiency
    for env in (signal_envelope, leak_envelope):
        if env is not None:
            per_attempt += scale * _bin_integrals(env, edges)
    noise = np.asarray(noise_rate_per_attempt, dtype=float)
    if np.any(noise < 0):
        raise ValueError("noise rate must be >= 0")
    if noise.ndim == 0:
        per_attempt += float(noise) * np.diff(edges) / (edges[-1] - edges[0])
    else:
        if noise.shape != (n_bins,):
            raise ValueError(f"noise profile needs {n_bins} bins, got {noise.shape}")
        per_attempt += noise
    if np.any(per_attempt < -1e-15):
        raise ValueError("negative expected rate")
    return np.clip(per_attempt, 0.0, None) * cal.attempts


def synthesize_histogram(
    signal_envelope: SignalEnvelope | None,
    leak_envelope: SignalEnvelope | None,
    noise_rate_per_attempt,
    cal: Calibration,
    timing: SequenceTiming | None = None,
    bin_width: float = DEFAULT_BIN_NS,
    seed: int | np.random.Generator = 0,
    *,
    alpha2: float | None = None,
    t_range: tuple[float, float] | None = None,
) -> ArrivalHistogram:
    """Poisson-sampled arrival histogram for the given output envelopes and noise.

    ``alpha2`` defaults to the calibrated input photon number. ``t_range``
    defaults to the span covered by the envelopes, widened to whole bins.
    """
    if alpha2 is None:
        alpha2 = calibrate_alpha2(cal)
    if t_range is None:
        envs = [e for e in (signal_envelope, leak_envelope) if e is not None]
        if not envs:
            raise ValueError("t_range is required when no envelope is given")
        lo = min(e.time_grid[0] for e in envs)
        hi = max(e.time_grid[-1] for e in envs)
        lo = math.floor(lo / bin_width) * bin_width
        t_range = (lo, hi)
    lo, hi = t_range
    n_bins = int(math.ceil((hi - lo) / bin_width - 1e-9))
    if timing is not None and (hi - lo) > timing.rep_period * 1e3:
        raise ValueError("histogram span exceeds the repetition period")
    edges = lo + bin_width * np.arange(n_bins + 1)
    lam = expected_counts(signal_envelope, leak_envelope, noise_rate_per_attempt, cal, alpha2, edges)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    counts = rng.poisson(lam).astype(np.int64)
    return ArrivalHistogram(bin_width, lo, counts, cal.rep_rate, cal.integration_time)


# --- analysis ----------------------------------------------------------------------


def _peak_index(counts: np.ndarray, lo: int, hi: int) -> int:
    if hi <= lo:
        raise AnalysisError("empty region")
    # argmax returns the earliest index on ties
    return lo + int(np.argmax(counts[lo:hi]))


def _regions(h: ArrivalHistogram, retrieval_start: float) -> tuple[int, int]:
    split = min(max(h.index(retrieval_start), 0), h.counts.size)
    if split == 0 or split >= h.counts.size:
        raise AnalysisError("input or retrieval region is empty")
    return split, h.counts.size


def extract_storage_time(h: ArrivalHistogram, retrieval_start: float) -> float:
    """Time from the input (leak) maximum to the highest, earliest retrieval maximum.

    Bins from ``retrieval_start`` on form the retrieval region, earlier bins
    the input region.
    """
    split, n = _regions(h, retrieval_start)
    i_in = _peak_index(h.counts, 0, split)
    i_ret = _peak_index(h.counts, split, n)
    return float(h.times[i_ret] - h.times[i_in])


def default_window(h: ArrivalHistogram, retrieval_start: float, t_max: float = DEFAULT_T_MAX_NS) -> DetectionWindow:
    """Window from the minimum before the retrieval peak to ``t_max``.

    The minimum is searched between the bin after the leak peak and the
    retrieval peak; ties go to the earliest bin.
    """
    split, n = _regions(h, retrieval_start)
    i_in = _peak_index(h.counts, 0, split)
    i_ret = _peak_index(h.counts, split, n)
    lo = i_in + 1
    if lo > i_ret:
        raise AnalysisError("no bins between leak and retrieval peak")
    i_min = lo + int(np.argmin(h.counts[lo : i_ret + 1]))
    return DetectionWindow(float(h.times[i_min]), float(t_max))


def eta_e2e_from_counts(n_signal: float, n_noise: float, alpha2: float, cal: Calibration) -> float:
    """End-to-end efficiency from noise-subtracted retrieval counts. May be negative; returned as-is."""
    denom = alpha2 * cal.apd_efficiency * cal.rep_rate * cal.integration_time
    if denom <= 0:
        raise ValueError("alpha2 * eta_APD * f_rep * t_int must be > 0")
    return (n_signal - n_noise) / denom


def snr_from_counts(n_signal: float, n_noise: float) -> float:
    if n_noise <= 0:
        raise UndefinedSNR("SNR undefined for zero noise counts")
    return (n_signal - n_noise) / n_noise


def noise_correct(h_signal: ArrivalHistogram, h_noise: ArrivalHistogram) -> ArrivalHistogram:
    """Bin-by-bin difference; negative bins are kept."""
    if not h_signal.same_binning(h_noise):
        raise ValueError("histograms differ in binning or acquisition metadata")
    diff = np.asarray(h_signal.counts, dtype=float) - np.asarray(h_noise.counts, dtype=float)
    return ArrivalHistogram(h_signal.bin_width, h_signal.t0, diff, h_signal.rep_rate, h_signal.integration_time)


def eta_e2e_standard_error(n_signal: float, n_noise: float, alpha2: float, cal: Calibration) -> float:
    """Poisson standard error of eta_e2e."""
    return math.sqrt(max(n_signal, 0) + max(n_noise, 0)) / (
        alpha2 * cal.apd_efficiency * cal.rep_rate * cal.integration_time
    )


def snr_standard_error(n_signal: float, n_noise: float) -> float:
    """Poisson standard error of (N_s - N_n)/N_n."""
    if n_noise <= 0:
        raise UndefinedSNR("SNR undefined for zero noise counts")
    return math.sqrt(n_signal / n_noise**2 + n_signal**2 / n_noise**3)


def window_tradeoff(
    h_signal: ArrivalHistogram,
    h_noise: ArrivalHistogram,
    alpha2: float,
    cal: Calibration,
    t_max_list,
    retrieval_start: float,
    t_min: float | None = None,
) -> list[tuple[float, float, float | None]]:
    """(t_max, eta_e2e, SNR) for each upper window limit; SNR is None where undefined."""
    if not h_signal.same_binning(h_noise):
        raise ValueError("histograms differ in binning or acquisition metadata")
    if t_min is None:
        t_min = default_window(h_signal, retrieval_start).t_min
    rows = []
    for t_max in t_max_list:
        w = DetectionWindow(t_min, float(t_max))
        ns = h_signal.window_sum(w.t_min, w.t_max)
        nn = h_noise.window_sum(w.t_min, w.t_max)
        eta = eta_e2e_from_counts(ns, nn, alpha2, cal)
        snr = snr_from_counts(ns, nn) if nn > 0 else None
        rows.append((float(t_max), eta, snr))
    return rows


def eta_mem_from_e2e(eta_e2e: float, filter_transmission: float = 0.4) -> float:
    """Internal memory efficiency: end-to-end efficiency divided by the filter transmission."""
    if not 0.0 < filter_transmission <= 1.0:
        raise ValueError("filter transmission must lie in (0, 1]")
    return eta_e2e / filter_transmission


def analyze(
    h_signal: ArrivalHistogram,
    h_noise: ArrivalHistogram,
    cal: Calibration,
    retrieval_start: float,
    t_max: float = DEFAULT_T_MAX_NS,
    alpha2: float | None = None,
    window: DetectionWindow | None = None,
) -> MetricsReport:
    """Full metric set for a signal/noise histogram pair."""
    if not h_signal.same_binning(h_noise):
        raise ValueError("histograms differ in binning or acquisition metadata")
    if alpha2 is None:
        alpha2 = calibrate_alpha2(cal)
    if window is None:
        window = default_window(h_signal, retrieval_start, t_max)
    ns = h_signal.window_sum(window.t_min, window.t_max)
    nn = h_noise.window_sum(window.t_min, window.t_max)
    flags = []
    eta = eta_e2e_from_counts(ns, nn, alpha2, cal)
    if eta <= 0:
        flags.append("noise_exceeds_signal")
    snr = snr_err = mu1 = None
    if nn > 0:
        snr = snr_from_counts(ns, nn)
        # |alpha|^2 calibration error enters the SNR proportionally
        rel_a = calibrate_alpha2_uncertainty(cal) / calibrate_alpha2(cal) if cal.monitor_rate > 0 else 0.0
        snr_err = math.hypot(snr_standard_error(ns, nn), abs(snr) * rel_a)
        if snr > 0:
            mu1 = mu_one(alpha2, snr)
    else:
        flags.append("snr_undefined")
    try:
        storage = extract_storage_time(h_signal, retrieval_start)
    except AnalysisError:
        storage = None
    return MetricsReport(
        alpha2=alpha2,
        eta_e2e=eta,
        eta_mem=eta_mem_from_e2e(eta, cal.filter_signal_transmission),
        snr=snr,
        mu1=mu1,
        storage_time=storage,
        window=(window.t_min, window.t_max),
        eta_e2e_err=eta_e2e_standard_error(ns, nn, alpha2, cal),
        snr_err=snr_err,
        flags=flags,
    )


# --- files ---------------------------------------------------------------------------


def _fmt_time(t: float) -> str:
    s = f"{t:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def write_histogram(h: ArrivalHistogram, path: str | Path) -> None:
    """CSV ``time_ns,counts`` plus a ``.json`` sidecar with bin width, rate and integration time."""
    path = Path(path)
    counts = np.asarray(h.counts)
    integral = np.issubdtype(counts.dtype, np.integer)
    lines = ["time_ns,counts"]
    for t, c in zip(h.times, counts):
        lines.append(f"{_fmt_time(t)},{int(c) if integral else repr(float(c))}")
    path.write_text("\n".join(lines) + "\n")
    meta = {"bin_ns": h.bin_width, "rep_rate_hz": h.rep_rate, "t_int_s": h.integration_time}
    sidecar_path(path).write_text(json.dumps(meta, sort_keys=True) + "\n")


def sidecar_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_suffix(".json")


def read_histogram(path: str | Path) -> ArrivalHistogram:
    path = Path(path)
    meta = json.loads(sidecar_path(path).read_text())
    rows = path.read_text().strip().splitlines()
    if not rows or rows[0].strip() != "time_ns,counts":
        raise ValueError(f"{path}: expected header 'time_ns,counts'")
    times, counts = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        try:
            t, c = row.split(",")
            times.append(float(t))
            counts.append(int(c) if c.strip().lstrip("-").isdigit() else float(c))
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: malformed row {row!r}") from exc
    times = np.asarray(times)
    if times.size > 1 and np.any(np.diff(times) <= 0):
        raise ValueError(f"{path}: time column must be increasing")
    bin_ns = float(meta["bin_ns"])
    if times.size > 1 and not np.allclose(np.diff(times), bin_ns, atol=1e-3):
        raise ValueError(f"{path}: time spacing disagrees with bin_ns={bin_ns}")
    arr = np.asarray(counts, dtype=np.int64 if all(isinstance(c, int) for c in counts) else float)
    return ArrivalHistogram(bin_ns, float(times[0]) if times.size else 0.0, arr, float(meta["rep_rate_hz"]), float(meta["t_int_s"]))
