"""Acceptance criteria 1-8. Each test records and prints one PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""

import json
import math
import time

import numpy as np
import pytest
from scipy import integrate

from memlab import cli, counting as C, fitting as F, mbsim as S, models as M
from memlab.mbsim import ControlPulse, MediumParams
from memlab.models import Calibration, EfficiencyParams, NoiseParams
from memlab.voigt import voigt_fwhm, voigt_unit_peak

import synthetic

RESULTS: dict[int, tuple[bool, str]] = {}
TWO_PI = 2 * math.pi


def record(n: int, ok: bool, line: str) -> None:
    RESULTS[n] = (bool(ok), line)
    print(f"[{'PASS' if ok else 'FAIL'}] {n}. {line}")
    assert ok, line


# --- 1 ----------------------------------------------------------------------------------


def test_1_metrics_consistency_chain():
    t = time.perf_counter()
    eta_e2e = 0.33 * 0.4
    assert C.eta_mem_from_e2e(eta_e2e, 0.4) == pytest.approx(0.33)
    mu1 = M.mu_one(1.0, 14.0)
    elapsed = time.perf_counter() - t
    ok = (abs(eta_e2e - 0.132) < 1e-12 and abs(eta_e2e - 0.13) <= 0.02
          and abs(mu1 - 0.0714) < 5e-5 and abs(mu1 - 0.07) <= 0.02 and elapsed < 1.0)
    record(1, ok, f"metrics chain: eta_e2e={eta_e2e:.4f} (13(2)%), mu1={mu1:.4f} (0.07(2)), {elapsed * 1e3:.1f} ms")


# --- 2 ----------------------------------------------------------------------------------


def test_2_model_curve_anchors():
    t = time.perf_counter()
    ep, npar = EfficiencyParams(), NoiseParams()
    a = M.eta_vs_pulse_width(25.0, ep)
    b = M.eta_vs_control_energy(560.0, ep)
    c = M.noise_vs_energy(560.0, npar)
    elapsed = time.perf_counter() - t
    ok = abs(a - 0.1143) <= 1e-4 and abs(b - 0.0810) <= 1e-4 and abs(c - 0.0292) <= 1e-4 and elapsed < 1.0
    record(2, ok, f"anchors: eta(25 ns)={a:.5f}, eta(560 pJ)={b:.5f}, noise(560 pJ)={c:.5f}, {elapsed * 1e3:.1f} ms")


# --- 3 ----------------------------------------------------------------------------------


def test_3_histogram_round_trip():
    t = time.perf_counter()
    cal = Calibration()
    timing = C.SequenceTiming()
    sig, leak = synthetic.envelopes(eta_e2e=0.13)
    noise = synthetic.noise_for_snr(14.0, 0.13, cal, 35.0, 300.0)
    edges = -50.0 + np.arange(301.0)
    kw = dict(alpha2=1.0, t_range=(-50.0, 250.0))
    eta_ok = snr_ok = both_ok = storage_ok = 0
    snrs = []
    for seed in range(100):
        hs = C.synthesize_histogram(sig, leak, noise, cal, timing, seed=np.random.default_rng([seed, 0]), **kw)
        hn = C.synthesize_histogram(None, None, noise, cal, timing, seed=np.random.default_rng([seed, 1]), **kw)
        rep = C.analyze(hs, hn, cal, timing.retrieval_start(), 155.0, alpha2=1.0)
        # truth for the window the analysis chose
        ls, ln = synthetic.expected_window(cal, sig, leak, noise, edges, rep.window)
        eta_true = (ls - ln) / (cal.apd_efficiency * cal.attempts)
        snr_true = (ls - ln) / ln
        ns, nn = hs.window_sum(*rep.window), hn.window_sum(*rep.window)
        e_hit = abs(rep.eta_e2e - eta_true) <= 3 * C.eta_e2e_standard_error(ns, nn, 1.0, cal)
        s_hit = abs(rep.snr - snr_true) <= 3 * C.snr_standard_error(ns, nn)
        eta_ok += e_hit
        snr_ok += s_hit
        both_ok += e_hit and s_hit
        storage_ok += rep.storage_time == 140.0
        snrs.append(rep.snr)
    elapsed = time.perf_counter() - t
    ok = both_ok >= 95 and storage_ok == 100 and elapsed <= 60
    record(3, ok, f"histogram round trip: eta within 3 SE {eta_ok}/100, SNR {snr_ok}/100, both {both_ok}/100, "
                  f"storage time 140 ns {storage_ok}/100, median SNR {np.median(snrs):.1f}, {elapsed:.1f} s")


# --- 4 ----------------------------------------------------------------------------------

SEEDS_4 = range(20)


def test_4_noise_decomposition_recovery():
    """Statistical reading: the pipeline runs on 20 fixed seeds.

    A single Poisson realization can fail a 2-sigma test by chance (at the
    2-sigma level about 1 in 20 per component), so the gates are coverage
    rates: stage-2 components within 2 sigma in >= 90 % of checks, FWM
    consistent with zero in >= 95 % of per-detuning fits, and per-detuning
    SRS / fluorescence within 2 sigma in >= 90 %. The seed-level count of
    "FWM zero at every detuning" is reported alongside.
    """
    t = time.perf_counter()
    attempts = Calibration().attempts
    stage2, fwm_rows, comp, seed_all_zero, failed = [], [], [], [], 0
    for seed in SEEDS_4:
        scan, truth = synthetic.noise_scan(seed, attempts)
        rows, total = synthetic.run_two_stage(scan)
        u = F.param_uncertainties(total)
        truth2 = (synthetic.SCAN_TRUTH["n_srs"], synthetic.SCAN_TRUTH["n_fl"], synthetic.SCAN_TRUTH["n_fwm"])
        stage2 += [abs(total.params[i] - v) <= 2 * u[i] for i, v in enumerate(truth2)]
        all_zero = True
        for row, (t_fwm, t_srs, t_fl) in zip(rows, truth):
            if not row.converged:
                failed += 1
                all_zero = False
                continue
            c = row.components
            z = abs(c["fwm"][0] - t_fwm) <= 2 * c["fwm"][1]
            fwm_rows.append(z)
            all_zero &= z
            comp += [abs(c["srs"][0] - t_srs) <= 2 * c["srs"][1],
                     abs(c["fluorescence"][0] - t_fl) <= 2 * c["fluorescence"][1]]
        seed_all_zero.append(all_zero)
    elapsed = time.perf_counter() - t
    s2, fz, cv = np.mean(stage2), np.mean(fwm_rows), np.mean(comp)
    ok = s2 >= 0.90 and fz >= 0.95 and cv >= 0.90 and failed == 0 and elapsed <= 120
    record(4, ok, f"noise decomposition over {len(SEEDS_4)} seeds: stage-2 within 2 sigma {s2:.3f}, "
                  f"FWM consistent with 0 in {fz:.3f} of fits ({sum(seed_all_zero)}/{len(SEEDS_4)} seeds at "
                  f"every detuning), SRS/fluorescence coverage {cv:.3f}, non-converged {failed}, {elapsed:.1f} s")


# --- 5 ----------------------------------------------------------------------------------


def _convolution(x, g_fwhm, l_fwhm):
    sigma = g_fwhm / (2 * math.sqrt(2 * math.log(2)))
    hw = l_fwhm / 2

    def f(t):
        return math.exp(-0.5 * (t / sigma) ** 2) * hw / ((x - t) ** 2 + hw**2)

    lim = 12 * sigma
    return integrate.quad(f, -lim, lim, points=[x] if abs(x) < lim else None, epsabs=0, epsrel=1e-12,
                          limit=400)[0]


def test_5_voigt_accuracy():
    t = time.perf_counter()
    g, l = 380.0, 920.0
    x = np.linspace(-5000.0, 5000.0, 401)
    peak = _convolution(0.0, g, l)
    ref = np.array([_convolution(v, g, l) for v in x]) / peak
    err = np.max(np.abs(voigt_unit_peak(x, g, l) - ref) / ref)
    lo, hi = 0.0, 2000.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if _convolution(mid, g, l) / peak > 0.5 else (lo, mid)
    w_ref = lo + hi
    w = voigt_fwhm(g, l)
    elapsed = time.perf_counter() - t
    ok = err < 1e-5 and abs(w - w_ref) / w_ref < 0.005 and elapsed < 10
    record(5, ok, f"Voigt: max rel error {err:.2e} on |delta| <= 5 GHz, FWHM {w:.2f} vs oracle {w_ref:.2f} MHz, "
                  f"{elapsed:.1f} s")


# --- 6 ----------------------------------------------------------------------------------


def test_6_simulator_physics():
    t = time.perf_counter()
    gamma = TWO_PI * 51e6
    checks = {}

    m = MediumParams(optical_depth=2.0, excited_decay_gamma=TWO_PI * 50e6)
    g = S.suggest_grid(m, 0.0, -300.0, 300.0)
    sig = S.gaussian_signal(100.0, 0.0, np.linspace(-300, 300, g.nt + 1))
    r = S.simulate_storage(sig, ControlPulse(0.0, 10.0), m, g)
    bl = r.leak.photon_number() / r.input_photons / math.exp(-2.0) - 1
    checks["Beer-Lambert"] = (abs(bl) < 0.01, f"{bl:+.2e}")

    m = MediumParams(optical_depth=20.0, excited_decay_gamma=gamma)
    t_eit = S.weak_probe_transmission_spectrum(m, TWO_PI * 540e6, [0.0])[0]
    checks["EIT T"] = (t_eit > 0.99, f"{t_eit:.5f}")

    m = MediumParams(optical_depth=20.0, excited_decay_gamma=gamma, one_photon_detuning=TWO_PI * 300e6)
    det = TWO_PI * np.linspace(-1500e6, 1500e6, 61)
    sim = S.weak_probe_transmission_spectrum(m, TWO_PI * 180e6, det)
    ref = S.analytic_transmission(m, TWO_PI * 180e6, det)
    spec_err = np.max(np.abs(sim - ref) / ref)
    checks["spectrum"] = (spec_err < 0.01, f"{spec_err:.1e}")

    m = MediumParams(optical_depth=40.0, excited_decay_gamma=gamma)
    ctrl = ControlPulse(TWO_PI * 150e6, 40.0)
    g = S.suggest_grid(m, ctrl.peak_rabi, -120.0, 140.0)
    sig = S.gaussian_signal(20.0, 20.0, np.linspace(-120, 140, g.nt + 1))
    budget = S.simulate_storage(sig, ctrl, m, g).budget_error()
    checks["budget"] = (budget < 1e-3, f"{budget:.1e}")

    gs = TWO_PI * 1e6
    m = MediumParams(optical_depth=20.0, excited_decay_gamma=gamma, ground_decoherence=gs)
    ctrl = ControlPulse(TWO_PI * 150e6, 30.0)
    g = S.suggest_grid(m, ctrl.peak_rabi, -90.0, 110.0)
    spin = S.simulate_storage(S.gaussian_signal(15.0, 15.0, np.linspace(-90, 110, g.nt + 1)), ctrl, m, g).spin
    waits = np.array([0.0, 50.0, 100.0])
    etas = []
    for w in waits:
        read = ctrl.shifted(200.0 + w)
        gr = S.suggest_grid(m, ctrl.peak_rabi, 200.0 - 3 * ctrl.fwhm, read.center_time + 3 * ctrl.fwhm)
        etas.append(S.simulate_retrieval(spin, read, m, gr).photon_number())
    slope = -np.polyfit(waits, np.log(etas), 1)[0] / (2 * gs * 1e-9) - 1
    checks["decay slope"] = (abs(slope) < 0.01, f"{slope:+.1e}")

    m = MediumParams(optical_depth=40.0, excited_decay_gamma=gamma)
    ctrl = ControlPulse(TWO_PI * 150e6, 40.0)
    coarse = S.efficiency_vs_bandwidth_curve(m, ctrl, [20.0])[0][1]
    fine = S.efficiency_vs_bandwidth_curve(m, ctrl, [20.0], oversample=2.0)[0][1]
    halving = abs(fine - coarse) / fine
    checks["grid halving"] = (halving < 0.005, f"{halving:.1e}")

    elapsed = time.perf_counter() - t
    ok = all(v[0] for v in checks.values()) and elapsed <= 300
    detail = ", ".join(f"{k} {v[1]}" for k, v in checks.items())
    record(6, ok, f"simulator: {detail}, {elapsed:.1f} s")


# --- 7 ----------------------------------------------------------------------------------

FIT_CASES = {
    "linear": (np.linspace(1, 10, 7), [0.3], [1.0]),
    "noise_energy": (np.linspace(40, 560, 8), [1e-8, 4e-5, 7e-3, 16.0], [1e-9, 1e-5, 1e-2, 50.0]),
    "eta_pulse_width": (np.linspace(3, 200, 10), [0.128, 220.0], [0.1, 100.0]),
    "eta_energy": (np.linspace(100, 700, 9), [0.107, 156.0], [0.2, 50.0]),
    "eta_detuning": (np.linspace(-3000, 3000, 21), [0.13, 2.0, 100.0, 1000.0], [0.1, 1.0, 0.0, 700.0]),
    "total_noise": (np.linspace(-3000, 3000, 15), [0.014, 0.007, 0.001], [0.01, 0.01, 0.001]),
}


def test_7_fit_engine():
    t = time.perf_counter()
    rng = np.random.default_rng(0)
    worst_chi2 = worst_jac = 0.0
    for name, (x, truth, init) in FIT_CASES.items():
        y = F.MODELS[name].f(x, np.array(truth))
        r = F.least_squares_fit(name, F.Dataset(x, y, 0.01 * np.abs(y)), init)
        worst_chi2 = max(worst_chi2, r.chi2_reduced if r.converged else math.inf)
        for _ in range(5):
            q = np.array(truth) * rng.uniform(0.5, 1.5, len(truth))
            ja = F.MODELS[name].jac(x, q)
            jn = F.numerical_jacobian(F.MODELS[name].f, x, q)
            worst_jac = max(worst_jac, np.max(np.abs(ja - jn) / (np.max(np.abs(ja), axis=0) + 1e-300)))

    attempts = Calibration().attempts
    x = np.linspace(40, 560, 8)
    lo = np.array([0.0, 0.0, 0.0, 5.0])
    hi = np.array([1e-6, 1e-3, 1e-2, 200.0])
    violations = 0
    perm_equal = True
    for trial in range(40):
        p = np.array([0.0, rng.uniform(1e-6, 1e-4), rng.uniform(1e-4, 2e-2), rng.uniform(1, 500)])
        data = F.Dataset.from_counts(x, rng.poisson(F.MODELS["noise_energy"].f(x, p) * attempts), attempts)
        r = F.least_squares_fit("noise_energy", data, [0.0, 1e-5, 5e-3, 50.0], lo, hi, record_trace=True)
        violations += sum(int(np.any(q < lo) or np.any(q > hi)) for q in r.trace)
        perm = rng.permutation(x.size)
        shuffled = F.Dataset(data.x[perm], data.y[perm], data.sigma_y[perm])
        a, b = F.fit_noise_energy(data), F.fit_noise_energy(shuffled)
        perm_equal &= (np.array_equal(a.params, b.params) and np.array_equal(a.covariance, b.covariance)
                       and a.chi2 == b.chi2)
    elapsed = time.perf_counter() - t
    ok = worst_chi2 < 1e-10 and worst_jac < 1e-4 and violations == 0 and perm_equal and elapsed < 30
    record(7, ok, f"fit engine: worst exact-data chi2_red {worst_chi2:.1e}, Jacobian mismatch {worst_jac:.1e}, "
                  f"bound violations {violations}, permutation bit-exact {perm_equal}, {elapsed:.1f} s")


# --- 8 ----------------------------------------------------------------------------------


def test_8_sweep_determinism(tmp_path, capsys):
    configs = {
        "energy": {"sweep": {"axis": "energy", "start": 280, "stop": 560, "steps": 8}},
        "detuning": {"sweep": {"axis": "detuning", "start": -3000, "stop": 3000, "steps": 61}},
        "pulse_width": {"sweep": {"axis": "pulse_width", "values": [200, 5, 25, 50, 100, 10]}},
    }
    identical = []
    for axis, body in configs.items():
        cfg = tmp_path / f"{axis}.json"
        cfg.write_text(json.dumps({"seed": 11, **body}))
        outs = []
        for run, jobs in (("a", "1"), ("b", "4")):
            out = tmp_path / f"{axis}_{run}"
            assert cli.main(["sweep", "--config", str(cfg), "--out", str(out), "--jobs", jobs, "--svg"]) == 0
            outs.append(out)
        for name in ("sweep.csv", "sweep.svg"):
            identical.append((outs[0] / name).read_bytes() == (outs[1] / name).read_bytes())
    capsys.readouterr()
    ok = all(identical)
    record(8, ok, f"determinism: {sum(identical)}/{len(identical)} sweep artifacts byte-identical across reruns "
                  "(3 axes, pool width 1 vs 4)")


if __name__ == "__main__":
    import sys

    raise SystemExit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"] + sys.argv[1:]))
