"""Command-line entry point: ``memlab <command> [--config FILE] [--out DIR] [--seed N] [--jobs N] [--svg]``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import counting, fitting, mbsim
from .config import ConfigError, RunConfig, validate_config
from .report import emit_report, svg_polyline
from .sweep import model_row, run_sweep, write_sweep_csv

EXIT_CONFIG = 2
EXIT_FAILURE = 1


class CommandError(RuntimeError):
    pass


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # keep stderr machine-readable: usage errors surface as JSON from main()
    def error(self, message):
        raise UsageError(message)


def _out_dir(args, cfg: RunConfig) -> Path:
    out = Path(args.out) if args.out else cfg.base_dir / cfg["output"]["dir"]
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _want_svg(args, cfg: RunConfig) -> bool:
    return bool(args.svg or cfg["output"]["svg"])


def _require(cfg: RunConfig, key: str) -> Path:
    p = cfg.input_path(key)
    if p is None:
        raise ConfigError(f"inputs.{key}", "required by this command")
    return p


# --- commands -------------------------------------------------------------------


def cmd_models_eval(args, cfg: RunConfig) -> list[Path]:
    axis = cfg["sweep"]["axis"]
    header = ("axis", "value") + tuple(model_row(cfg, axis, float(cfg.sweep_values()[0])))
    lines = [",".join(header)]
    for x in cfg.sweep_values():
        row = model_row(cfg, axis, float(x))
        lines.append(",".join([axis, repr(float(x))] + ["" if v is None else repr(float(v)) for v in row.values()]))
    path = _out_dir(args, cfg) / "models.csv"
    path.write_text("\n".join(lines) + "\n")
    return [path]


def cmd_sim_run(args, cfg: RunConfig) -> list[Path]:
    m = cfg.medium()
    ctrl = cfg.control()
    sig_cfg = cfg["signal"]
    grid_cfg = cfg["grid"]
    t_sig = ctrl.center_time + sig_cfg["lag_ns"]
    span = 3.0 * max(ctrl.fwhm, sig_cfg["fwhm_ns"])
    t0, t1 = min(ctrl.center_time, t_sig) - span, max(ctrl.center_time, t_sig) + span
    g = mbsim.suggest_grid(m, ctrl.peak_rabi, t0, t1, grid_cfg["oversample"])
    if grid_cfg["nz"] is not None or grid_cfg["nt"] is not None:
        g = mbsim.Grid(grid_cfg["nz"] or g.nz, grid_cfg["nt"] or g.nt, t0, t1)
    sig = mbsim.gaussian_signal(sig_cfg["fwhm_ns"], t_sig, np.linspace(t0, t1, g.nt + 1))
    stored = mbsim.simulate_storage(sig, ctrl, m, g)
    read = ctrl.shifted(ctrl.center_time + cfg["timing"]["read_delay_ns"])
    r0, r1 = read.center_time - 3.0 * read.fwhm, read.center_time + 3.0 * read.fwhm
    gr = mbsim.suggest_grid(m, read.peak_rabi, r0, r1, grid_cfg["oversample"])
    if grid_cfg["nz"] is not None or grid_cfg["nt"] is not None:
        gr = mbsim.Grid(grid_cfg["nz"] or gr.nz, grid_cfg["nt"] or gr.nt, r0, r1)
    retrieved = mbsim.simulate_retrieval(stored.spin, read, m, gr, wait=max(r0 - t1, 0.0))
    out = _out_dir(args, cfg)
    paths = [out / "input.csv", out / "leak.csv", out / "retrieved.csv", out / "sim.json"]
    mbsim.write_envelope(sig, paths[0])
    mbsim.write_envelope(stored.leak, paths[1])
    mbsim.write_envelope(retrieved, paths[2])
    summary = {
        "eta_mem": mbsim.internal_efficiency(sig, retrieved),
        "leak_fraction": stored.leak.photon_number() / stored.input_photons,
        "stored_fraction": stored.spin.photon_number() / stored.input_photons,
        "scattered_fraction": stored.scattered_fraction,
        "budget_error": stored.budget_error(),
        "control_energy_pj": mbsim.control_energy_pj(ctrl),
        "grid": {"nz": g.nz, "nt": g.nt},
    }
    _dump_json(summary, paths[3])
    return paths


def cmd_counts_synth(args, cfg: RunConfig) -> list[Path]:
    cal = cfg.calibration()
    timing = cfg.timing()
    h = cfg["histogram"]
    retrieved = mbsim.read_envelope(_require(cfg, "retrieved_envelope"))
    leak_path = cfg.input_path("leak_envelope")
    leak = mbsim.read_envelope(leak_path) if leak_path else None
    seed = cfg.resolved_seed(args.seed)
    s_sig, s_noise = np.random.SeedSequence(seed).spawn(2)
    t_range = (h["t_start_ns"], h["t_stop_ns"])
    alpha2 = cfg["calibration"]["alpha2"]
    kw = dict(bin_width=h["bin_ns"], alpha2=alpha2, t_range=t_range)
    h_sig = counting.synthesize_histogram(
        retrieved, leak, h["noise_per_attempt"], cal, timing, seed=np.random.default_rng(s_sig), **kw
    )
    h_noise = counting.synthesize_histogram(
        None, None, h["noise_per_attempt"], cal, timing, seed=np.random.default_rng(s_noise), **kw
    )
    out = _out_dir(args, cfg)
    p_sig, p_noise = out / "signal_hist.csv", out / "noise_hist.csv"
    counting.write_histogram(h_sig, p_sig)
    counting.write_histogram(h_noise, p_noise)
    return [p_sig, counting.sidecar_path(p_sig), p_noise, counting.sidecar_path(p_noise)]


def cmd_analyze(args, cfg: RunConfig) -> list[Path]:
    cal = cfg.calibration()
    timing = cfg.timing()
    h_sig = counting.read_histogram(_require(cfg, "signal_histogram"))
    h_noise = counting.read_histogram(_require(cfg, "noise_histogram"))
    start = timing.retrieval_start()
    alpha2 = cfg["calibration"]["alpha2"]
    rep = counting.analyze(h_sig, h_noise, cal, start, cfg["histogram"]["t_max_ns"], alpha2=alpha2)
    t_min = rep.window[0]
    t_end = h_sig.t0 + h_sig.bin_width * h_sig.counts.size
    t_max_list = np.arange(t_min + h_sig.bin_width, t_end + 0.5 * h_sig.bin_width, h_sig.bin_width)
    rows = counting.window_tradeoff(h_sig, h_noise, alpha2, cal, t_max_list, start, t_min=t_min)
    out = _out_dir(args, cfg)
    body = {k: getattr(rep, k) for k in ("alpha2", "eta_e2e", "eta_mem", "snr", "mu1", "storage_time",
                                         "eta_e2e_err", "snr_err", "flags")}
    body["window"] = list(rep.window)
    body["tradeoff"] = [{"t_max_ns": t, "eta_e2e": e, "snr": s} for t, e, s in rows]
    p_json, p_csv = out / "metrics.json", out / "tradeoff.csv"
    _dump_json(body, p_json)
    lines = ["t_max_ns,eta_e2e,snr"] + [f"{float(t)!r},{float(e)!r},{'' if s is None else repr(float(s))}" for t, e, s in rows]
    p_csv.write_text("\n".join(lines) + "\n")
    return [p_json, p_csv]


def cmd_fit_noise_energy(args, cfg: RunConfig) -> list[Path]:
    data = fitting.read_dataset(_require(cfg, "dataset"), attempts=cfg.calibration().attempts)
    r = fitting.fit_noise_energy(data)
    out = _out_dir(args, cfg)
    path = out / "fit_noise_energy.json"
    body = r.as_dict()
    if r.converged:
        e_ref = float(np.max(data.x))
        body["components_at_energy_pj"] = e_ref
        body["components"] = {k: {"value": v, "sigma": s} for k, (v, s) in fitting.noise_components_at(r, e_ref).items()}
    _dump_json(body, path)
    return [path]


def cmd_fit_noise_detuning(args, cfg: RunConfig) -> list[Path]:
    scan_cfg = cfg["inputs"]["scan"]
    if not scan_cfg:
        raise ConfigError("inputs.scan", "required by this command")
    attempts = cfg.calibration().attempts
    scan = [(float(item["detuning_mhz"]), fitting.read_dataset(cfg.base_dir / item["path"], attempts=attempts))
            for item in scan_cfg]
    rows = fitting.decompose_vs_detuning(scan, jobs=args.jobs or cfg.jobs)
    by_delta = dict(scan)
    out = _out_dir(args, cfg)
    lines = ["detuning_mhz,energy_pj,total,total_sigma,fwm,fwm_sigma,srs,srs_sigma,fl,fl_sigma,converged,flags"]
    delta, total, sigma, fwm, fwm_s = [], [], [], [], []
    for row in rows:
        ds = by_delta[row.delta].sorted()
        y, sy = float(ds.y[-1]), float(ds.sigma_y[-1])
        comp = row.components or {}
        cells = [repr(row.delta), repr(row.energy), repr(y), repr(sy)]
        for name in ("fwm", "srs", "fluorescence"):
            v = comp.get(name)
            cells += ["", ""] if v is None else [repr(float(v[0])), repr(float(v[1]))]
        cells += [str(row.converged).lower(), '"' + ";".join(row.flags).replace('"', "'") + '"']
        lines.append(",".join(cells))
        delta.append(row.delta)
        total.append(y)
        sigma.append(sy)
        fwm.append(comp["fwm"][0] if "fwm" in comp else math.nan)
        fwm_s.append(comp["fwm"][1] if "fwm" in comp else math.nan)
    p_csv, p_json = out / "decomposition.csv", out / "fit_total_noise.json"
    p_csv.write_text("\n".join(lines) + "\n")
    npar = cfg.noise()
    r = fitting.fit_total_noise(delta, total, sigma, npar.voigt_gauss_fwhm, npar.voigt_lorentz_fwhm, fwm, fwm_s)
    fitting.write_fit(r, p_json)
    return [p_csv, p_json]


def cmd_sweep(args, cfg: RunConfig) -> list[Path]:
    rows = run_sweep(cfg, seed=cfg.resolved_seed(args.seed), jobs=args.jobs or cfg.jobs)
    out = _out_dir(args, cfg)
    path = out / "sweep.csv"
    write_sweep_csv(rows, path)
    paths = [path]
    if _want_svg(args, cfg):
        svg = out / "sweep.svg"
        pts = [(r["value"], r["snr"]) for r in rows if r["snr"] is not None]
        svg.write_text(svg_polyline(pts, cfg["sweep"]["axis"], "SNR"))
        paths.append(svg)
    return paths


def _load_json(path: Path):
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise CommandError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None


def cmd_report(args, cfg: RunConfig) -> list[Path]:
    metrics_path = cfg.input_path("metrics")
    fits_path = cfg.input_path("fits")
    metrics = _load_json(metrics_path) if metrics_path else None
    fits = None
    if fits_path:
        raw = _load_json(fits_path)
        # a single fit file or a {name: fit} mapping
        fits = {raw.get("model", "fit"): raw} if "param_names" in raw else raw
    series = None
    if _want_svg(args, cfg) and metrics and metrics.get("tradeoff"):
        series = [(r["t_max_ns"], r["snr"]) for r in metrics["tradeoff"] if r["snr"] is not None]
    out = _out_dir(args, cfg)
    return emit_report(metrics, fits, out / "report.json", series, ("t_max (ns)", "SNR"))


COMMANDS = {
    ("models", "eval"): cmd_models_eval,
    ("sim", "run"): cmd_sim_run,
    ("counts", "synth"): cmd_counts_synth,
    ("analyze",): cmd_analyze,
    ("fit", "noise-energy"): cmd_fit_noise_energy,
    ("fit", "noise-detuning"): cmd_fit_noise_detuning,
    ("sweep",): cmd_sweep,
    ("report",): cmd_report,
}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration (defaults if omitted)")
    p.add_argument("--out", help="output directory (overrides output.dir)")
    p.add_argument("--seed", type=int, help="random seed (overrides $MEMLAB_SEED and the config)")
    p.add_argument("--jobs", type=int, help="worker pool width")
    p.add_argument("--svg", action="store_true", help="also write an SVG line plot")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="memlab", description="EIT memory modeling and analysis toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    groups: dict[str, argparse._SubParsersAction] = {}
    for key in COMMANDS:
        if len(key) == 1:
            _common(sub.add_parser(key[0]))
        else:
            if key[0] not in groups:
                groups[key[0]] = sub.add_parser(key[0]).add_subparsers(dest="action", required=True)
            _common(groups[key[0]].add_parser(key[1]))
    return parser


def _error(kind: str, message: str, key: str | None = None, code: int = EXIT_FAILURE) -> int:
    body = {"error": kind, "message": message}
    if key is not None:
        body["key"] = key
    sys.stderr.write(json.dumps(body, sort_keys=True) + "\n")
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _error("UsageError", str(exc), code=EXIT_CONFIG)
    key = (args.command,) if getattr(args, "action", None) is None else (args.command, args.action)
    try:
        if args.jobs is not None and args.jobs < 1:
            raise ConfigError("--jobs", "must be >= 1")
        if args.seed is not None and args.seed < 0:
            raise ConfigError("--seed", "must be >= 0")
        cfg = validate_config(args.config)
        written = COMMANDS[key](args, cfg)
    except ConfigError as exc:
        return _error("ConfigError", exc.detail, key=exc.key, code=EXIT_CONFIG)
    except (CommandError, counting.AnalysisError, fitting.FitError, mbsim.ResolutionError, ValueError,
            ZeroDivisionError, OSError) as exc:
        return _error(type(exc).__name__, str(exc))
    sys.stdout.write(json.dumps({"written": [str(p) for p in written]}) + "\n")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
