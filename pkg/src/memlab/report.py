"""Versioned JSON reports and dependency-free SVG line plots."""

from __future__ import annotations

import json
import math
from dataclasses import asdict
from pathlib import Path
from typing import Mapping, Sequence

from .fitting import FitResult
from .models import MetricsReport

SCHEMA_VERSION = "memlab.report/1"

METRIC_FIELDS = ("alpha2", "eta_e2e", "eta_mem", "snr", "mu1", "storage_time", "window", "eta_e2e_err", "snr_err")


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    return v


def report_dict(metrics: MetricsReport | Mapping | None, fits: Mapping[str, FitResult | Mapping] | None) -> dict:
    """Report body; missing inputs become explicit nulls."""
    if metrics is None:
        m = {k: None for k in METRIC_FIELDS}
        m["flags"] = ["metrics_missing"]
    else:
        raw = asdict(metrics) if isinstance(metrics, MetricsReport) else dict(metrics)
        m = {k: raw.get(k) for k in METRIC_FIELDS}
        m["flags"] = list(raw.get("flags") or [])
    fit_out = {}
    for name, fit in sorted((fits or {}).items()):
        fit_out[name] = fit.as_dict() if isinstance(fit, FitResult) else dict(fit)
    return _clean({"schema": SCHEMA_VERSION, "metrics": m, "fits": fit_out or None})


def emit_report(
    metrics: MetricsReport | Mapping | None,
    fits: Mapping[str, FitResult | Mapping] | None,
    out_path: str | Path,
    svg_series: Sequence[tuple[float, float]] | None = None,
    svg_labels: tuple[str, str] = ("x", "y"),
) -> list[Path]:
    """Write the JSON report, and an SVG next to it when ``svg_series`` is given. Returns written paths."""
    out_path = Path(out_path)
    out_path.write_text(json.dumps(report_dict(metrics, fits), indent=2, sort_keys=True) + "\n")
    written = [out_path]
    if svg_series is not None:
        svg_path = out_path.with_suffix(".svg")
        svg_path.write_text(svg_polyline(svg_series, *svg_labels))
        written.append(svg_path)
    return written


def svg_polyline(points: Sequence[tuple[float, float]], xlabel: str = "x", ylabel: str = "y",
                 width: int = 480, height: int = 320) -> str:
    """Single-series line plot as a standalone SVG document."""
    pts = [(float(x), float(y)) for x, y in points if y is not None and math.isfinite(x) and math.isfinite(y)]
    margin = 50
    if pts:
        xs, ys = zip(*pts)
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys), max(ys)
    else:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def sx(x):
        return margin + (x - x0) / (x1 - x0) * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin)

    poly = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">\n'
        f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" height="{height - 2 * margin}" '
        'fill="none" stroke="black"/>\n'
        f'<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{poly}"/>\n'
        f'<text x="{width / 2:.0f}" y="{height - 12}" text-anchor="middle" font-size="12">{xlabel}</text>\n'
        f'<text x="14" y="{height / 2:.0f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {height / 2:.0f})">{ylabel}</text>\n'
        f'<text x="{margin}" y="{height - margin + 14}" font-size="10">{x0:.4g}</text>\n'
        f'<text x="{width - margin}" y="{height - margin + 14}" text-anchor="end" font-size="10">{x1:.4g}</text>\n'
        f'<text x="{margin - 4}" y="{height - margin}" text-anchor="end" font-size="10">{y0:.4g}</text>\n'
        f'<text x="{margin - 4}" y="{margin + 4}" text-anchor="end" font-size="10">{y1:.4g}</text>\n'
        "</svg>\n"
    )
