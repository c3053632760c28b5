"""Bounded Levenberg-Marquardt fitting and the two-stage noise decomposition.

Stage one fits the control-energy dependence of the noise at every detuning
and splits it into four-wave mixing (quadratic), Raman scattering (linear)
and fluorescence (saturating). Stage two fits the detuning dependence of the
total noise with a constant plus a unit-peak Voigt.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .voigt import voigt_unit_peak

MAX_ITER = 200
XTOL = 1e-8
CHI2_RTOL = 1e-10
LAMBDA0 = 1e-3
LAMBDA_UP = 10.0
LAMBDA_DOWN = 10.0
LAMBDA_MAX = 1e16
SVD_RCOND = 1e-10

# fitted e beyond this multiple of the largest energy means the saturation is not resolved
SATURATION_RESOLUTION = 5.0


class FitError(RuntimeError):
    pass


@dataclass(frozen=True)
class Dataset:
    x: np.ndarray
    y: np.ndarray
    sigma_y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        s = np.asarray(self.sigma_y, dtype=float)
        if not (x.shape == y.shape == s.shape) or x.ndim != 1:
            raise ValueError("x, y and sigma_y must be 1-D arrays of equal length")
        if np.any(~(s > 0)):
            raise ValueError("sigma_y must be > 0")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "sigma_y", s)

    def __len__(self) -> int:
        return self.x.size

    @classmethod
    def from_counts(cls, x, counts, attempts: float) -> "Dataset":
        """Counts per attempt with Poisson errors sqrt(N)/attempts (one count minimum)."""
        counts = np.asarray(counts, dtype=float)
        sigma = np.sqrt(np.maximum(counts, 1.0)) / attempts
        return cls(np.asarray(x, dtype=float), counts / attempts, sigma)

    def sorted(self) -> "Dataset":
        order = np.lexsort((self.sigma_y, self.y, self.x))
        return Dataset(self.x[order], self.y[order], self.sigma_y[order])


@dataclass(frozen=True)
class Model:
    name: str
    param_names: tuple[str, ...]
    f: Callable[[np.ndarray, np.ndarray], np.ndarray]
    jac: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None


@dataclass
class FitResult:
    model: str
    param_names: tuple[str, ...]
    params: np.ndarray
    covariance: np.ndarray
    chi2: float
    chi2_reduced: float
    dof: int
    converged: bool
    n_iterations: int
    message: str = ""
    degenerate: np.ndarray | None = None
    fixed: np.ndarray | None = None
    flags: list[str] = field(default_factory=list)
    trace: list[np.ndarray] | None = None
    # chi^2 increase when the first parameter is pinned at zero (profile likelihood)
    zero_first_delta_chi2: float | None = None

    def as_dict(self) -> dict:
        unc = param_uncertainties(self) if self.converged else None
        return {
            "model": self.model,
            "param_names": list(self.param_names),
            "params": [float(v) for v in self.params],
            "uncertainties": None if unc is None else [_json_float(v) for v in unc],
            "covariance": [[float(v) for v in row] for row in self.covariance],
            "chi2": float(self.chi2),
            "chi2_reduced": _json_float(self.chi2_reduced),
            "dof": int(self.dof),
            "converged": bool(self.converged),
            "n_iterations": int(self.n_iterations),
            "message": self.message,
            "flags": list(self.flags),
        }

    def param(self, name: str) -> float:
        return float(self.params[self.param_names.index(name)])


def _json_float(v: float):
    return None if not math.isfinite(v) else float(v)


# --- model registry ---------------------------------------------------------------------


def _linear(x, p):
    return p[0] * x


def _linear_jac(x, p):
    return x[:, None].copy()


def _noise_energy(x, p):
    b, c, d, e = p
    with np.errstate(divide="ignore", invalid="ignore"):
        sat = np.where(x > 0, x / (e + x), 0.0)
    return b * x**2 + c * x + d * sat


def _noise_energy_jac(x, p):
    b, c, d, e = p
    with np.errstate(divide="ignore", invalid="ignore"):
        sat = np.where(x > 0, x / (e + x), 0.0)
        dsat = np.where(x > 0, -x / (e + x) ** 2, 0.0)
    return np.column_stack([x**2, x, sat, d * dsat])


def _make_total_noise(gauss_fwhm: float, lorentz_fwhm: float) -> Model:
    def f(x, p):
        return p[0] + p[1] * voigt_unit_peak(x, gauss_fwhm, lorentz_fwhm) + p[2]

    def jac(x, p):
        v = voigt_unit_peak(x, gauss_fwhm, lorentz_fwhm)
        one = np.ones_like(x)
        return np.column_stack([one, v, one])

    return Model(f"total_noise[{gauss_fwhm:g},{lorentz_fwhm:g}]", ("n_srs", "n_fl", "n_fwm"), f, jac)


def _eta_width(x, p):
    eta0, bw = p
    return eta0 / np.sqrt(1.0 + (4.0 * math.log(2.0) / (x * bw * 1e-3)) ** 2)


def _eta_width_jac(x, p):
    eta0, bw = p
    k = 4.0 * math.log(2.0) / (x * 1e-3)
    q = 1.0 + (k / bw) ** 2
    return np.column_stack([1.0 / np.sqrt(q), eta0 * q**-1.5 * k**2 / bw**3])


def _eta_energy(x, p):
    return p[0] * np.exp(-p[1] / x)


def _eta_energy_jac(x, p):
    ex = np.exp(-p[1] / x)
    return np.column_stack([ex, -p[0] * ex / x])


def _eta_detuning(x, p):
    eta0, peak, center, fwhm = p
    hw = 0.5 * fwhm
    return eta0 * np.exp(-peak * hw**2 / ((x - center) ** 2 + hw**2))


def _eta_detuning_jac(x, p):
    eta0, peak, center, fwhm = p
    hw = 0.5 * fwhm
    u = x - center
    den = u**2 + hw**2
    lor = hw**2 / den
    val = eta0 * np.exp(-peak * lor)
    dlor_dc = hw**2 * 2.0 * u / den**2
    dlor_dfwhm = (hw * den - hw**3) / den**2  # d(hw^2/den)/d(hw) * 1/2
    return np.column_stack([np.exp(-peak * lor), -val * lor, -val * peak * dlor_dc, -val * peak * dlor_dfwhm])


MODELS: dict[str, Model] = {
    "linear": Model("linear", ("slope",), _linear, _linear_jac),
    "noise_energy": Model("noise_energy", ("b", "c", "d", "e"), _noise_energy, _noise_energy_jac),
    "total_noise": _make_total_noise(380.0, 920.0),
    "eta_pulse_width": Model("eta_pulse_width", ("eta0", "mem_bandwidth_fwhm"), _eta_width, _eta_width_jac),
    "eta_energy": Model("eta_energy", ("eta0", "a"), _eta_energy, _eta_energy_jac),
    "eta_detuning": Model(
        "eta_detuning", ("eta0", "peak_absorbance", "center", "fwhm"), _eta_detuning, _eta_detuning_jac
    ),
}


def get_model(model: str | Model) -> Model:
    if isinstance(model, Model):
        return model
    try:
        return MODELS[model]
    except KeyError:
        raise KeyError(f"unknown model {model!r}; registered: {sorted(MODELS)}") from None


def numerical_jacobian(f, x: np.ndarray, p: np.ndarray, rel_step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian d f(x, p) / d p."""
    p = np.asarray(p, dtype=float)
    cols = []
    for i in range(p.size):
        h = rel_step * max(abs(p[i]), 1.0)
        up = p.copy()
        dn = p.copy()
        up[i] += h
        dn[i] -= h
        cols.append((f(x, up) - f(x, dn)) / (2.0 * h))
    return np.column_stack(cols)


# --- engine -----------------------------------------------------------------------------------


def least_squares_fit(
    model: str | Model,
    data: Dataset,
    init,
    lower_bounds=None,
    upper_bounds=None,
    *,
    fixed=None,
    max_iter: int = MAX_ITER,
    record_trace: bool = False,
) -> FitResult:
    """Weighted least squares with Levenberg-Marquardt steps projected onto the bounds.

    Damping starts at 1e-3 and is multiplied by 10 on a rejected step and
    divided by 10 on an accepted one. Converged when the scaled relative
    parameter change drops below 1e-8 or the relative chi^2 change below
    1e-10. Parameters with equal lower and upper bound, or flagged in
    ``fixed``, are held constant. Singular normal equations yield a
    non-converged result instead of an exception.
    """
    m = get_model(model)
    data = data.sorted()
    p = np.array(init, dtype=float)
    n_par = p.size
    lo = np.full(n_par, -np.inf) if lower_bounds is None else np.array(lower_bounds, dtype=float)
    hi = np.full(n_par, np.inf) if upper_bounds is None else np.array(upper_bounds, dtype=float)
    if lo.shape != p.shape or hi.shape != p.shape:
        raise ValueError("bounds must match the parameter vector")
    if np.any(lo > hi):
        raise ValueError("lower bound above upper bound")
    if np.any(p < lo) or np.any(p > hi):
        raise ValueError("initial parameters outside bounds")
    fix = np.zeros(n_par, bool) if fixed is None else np.array(fixed, dtype=bool)
    fix = fix | (lo == hi)
    free = ~fix
    n_free = int(free.sum())
    dof = len(data) - n_free
    if dof < 1:
        raise ValueError(f"need more data points ({len(data)}) than free parameters ({n_free})")

    x, y, w = data.x, data.y, 1.0 / data.sigma_y

    def residuals(q):
        return (y - m.f(x, q)) * w

    def jacobian(q):
        J = m.jac(x, q) if m.jac is not None else numerical_jacobian(m.f, x, q)
        return J[:, free] * w[:, None]

    r = residuals(p)
    chi2 = float(r @ r)
    lam = LAMBDA0
    converged = False
    message = "maximum iterations reached"
    trace = [p.copy()] if record_trace else None
    it = 0
    with np.errstate(over="ignore", invalid="ignore"):
        while it < max_iter:
            it += 1
            if chi2 == 0.0:
                converged, message = True, "exact fit"
                break
            J = jacobian(p)
            A = J.T @ J
            grad = J.T @ r
            diag = np.diag(A).copy()
            # a parameter with no effect at this point (e.g. the scale of a term
            # whose amplitude sits at zero) is held; it comes out degenerate
            active = diag > 0
            if not np.all(np.isfinite(A)) or not np.any(active):
                message = "singular normal equations: no parameter affects the model"
                break
            A, grad, diag = A[np.ix_(active, active)], grad[active], diag[active]
            scale = np.zeros(n_free)
            scale[active] = np.sqrt(diag)
            accepted = False
            while lam <= LAMBDA_MAX:
                try:
                    step = np.zeros(n_free)
                    step[active] = np.linalg.solve(A + lam * np.diag(diag), grad)
                except np.linalg.LinAlgError:
                    lam *= LAMBDA_UP
                    continue
                trial = p.copy()
                trial[free] = np.clip(p[free] + step, lo[free], hi[free])
                taken = trial[free] - p[free]
                rel_step = np.linalg.norm(scale * taken) / (np.linalg.norm(scale * p[free]) + 1e-300)
                r_new = residuals(trial)
                chi2_new = float(r_new @ r_new)
                if np.isfinite(chi2_new) and chi2_new < chi2:
                    rel_chi2 = (chi2 - chi2_new) / chi2
                    p, r, chi2 = trial, r_new, chi2_new
                    if trace is not None:
                        trace.append(p.copy())
                    lam /= LAMBDA_DOWN
                    accepted = True
                    if rel_step < XTOL or rel_chi2 < CHI2_RTOL:
                        converged, message = True, "converged"
                    break
                if rel_step < XTOL:
                    # no downhill step of any meaningful size exists
                    converged, message = True, "converged (no further decrease)"
                    break
                lam *= LAMBDA_UP
            if converged:
                break
            if not accepted:
                message = "damping exhausted without decrease"
                break

    cov, degenerate = _covariance(jacobian(p), free, n_par)
    if converged and np.any(degenerate & free):
        message += "; degenerate parameter directions"
    return FitResult(
        model=m.name,
        param_names=m.param_names,
        params=p,
        covariance=cov,
        chi2=chi2,
        chi2_reduced=chi2 / dof,
        dof=dof,
        converged=converged,
        n_iterations=it,
        message=message,
        degenerate=degenerate,
        fixed=fix,
        trace=trace,
    )


def _covariance(J: np.ndarray, free: np.ndarray, n_par: int) -> tuple[np.ndarray, np.ndarray]:
    cov = np.zeros((n_par, n_par))
    degenerate = np.zeros(n_par, bool)
    if J.size == 0:
        return cov, degenerate
    if not np.all(np.isfinite(J)):
        degenerate[free] = True
        cov[np.ix_(free, free)] = np.inf
        return cov, degenerate
    # column scaling keeps the SVD threshold unit-independent
    norms = np.linalg.norm(J, axis=0)
    norms[norms == 0] = 1.0
    U, s, Vt = np.linalg.svd(J / norms, full_matrices=False)
    keep = s > SVD_RCOND * s[0] if s.size and s[0] > 0 else np.zeros_like(s, bool)
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep] ** 2
    c_scaled = (Vt.T * inv) @ Vt
    c_free = c_scaled / np.outer(norms, norms)
    deg_free = np.zeros(free.sum(), bool)
    for k in np.nonzero(~keep)[0]:
        deg_free |= np.abs(Vt[k]) > 1e-3
    cov[np.ix_(free, free)] = c_free
    degenerate[free] = deg_free
    return cov, degenerate


def param_uncertainties(r: FitResult) -> np.ndarray:
    """1-sigma errors: sqrt of the covariance diagonal times sqrt(chi2_reduced); inf along degenerate directions."""
    if not r.converged:
        raise FitError(f"fit did not converge: {r.message}")
    var = np.clip(np.diag(r.covariance), 0.0, None)
    out = np.sqrt(var) * math.sqrt(r.chi2_reduced)
    if r.degenerate is not None:
        out = np.where(r.degenerate, np.inf, out)
    return out


def component_sigma(grad: np.ndarray, r: FitResult) -> float:
    """Propagated 1-sigma error of a linear combination ``grad . params``."""
    cov = r.covariance * r.chi2_reduced
    if r.degenerate is not None and np.any(r.degenerate & (np.abs(grad) > 0)):
        return math.inf
    return math.sqrt(max(float(grad @ cov @ grad), 0.0))


# --- noise vs control energy --------------------------------------------------------------------


NOISE_PARAMS = ("b", "c", "d", "e")


def _noise_initial_guesses(data: Dataset) -> list[np.ndarray]:
    x, y = data.x, data.y
    xmax = float(np.max(x))
    guesses = []
    for e0 in (0.05 * xmax, 0.25 * xmax, xmax, 4.0 * xmax):
        sat = x / (e0 + x)
        A = np.column_stack([x**2, x, sat]) / data.sigma_y[:, None]
        coef, *_ = np.linalg.lstsq(A, y / data.sigma_y, rcond=None)
        coef = np.clip(coef, 0.0, None)
        guesses.append(np.array([coef[0], coef[1], coef[2], e0]))
    return guesses


def fit_noise_energy(data: Dataset, *, freeze_fwm: bool = False) -> FitResult:
    """Fit noise = b E^2 + c E + d E/(e + E) with every parameter >= 0.

    A free fit is compared with one where b is frozen at zero; the frozen fit
    is reported when it worsens chi^2 by less than one, carrying over the free
    fit's uncertainty on b. The saturating term is flagged as unresolved when
    e exceeds five times the largest energy or its uncertainty reaches e, and
    its uncertainty is then inflated to at least e.
    """
    if len(data) < 5:
        raise ValueError("fit_noise_energy needs at least 5 points")
    # sorted once so the starting points do not depend on input order
    data = data.sorted()
    if np.min(data.x) <= 0 or np.max(data.x) < 2.0 * np.min(data.x):
        raise ValueError("energies must be positive and span at least a factor of 2")
    lo = np.zeros(4)
    hi = np.full(4, np.inf)

    def best(fixed):
        results = []
        for g in _noise_initial_guesses(data):
            g = g.copy()
            if fixed[0]:
                g[0] = 0.0
            results.append(least_squares_fit("noise_energy", data, g, lo, hi, fixed=fixed))
        ok = [r for r in results if r.converged] or results
        return min(ok, key=lambda r: r.chi2)

    free_fit = best(np.array([freeze_fwm, False, False, False]))
    result = free_fit
    if not freeze_fwm:
        frozen = best(np.array([True, False, False, False]))
        gain = max(frozen.chi2 - free_fit.chi2, 0.0)
        free_fit.zero_first_delta_chi2 = frozen.zero_first_delta_chi2 = gain
        if gain < 1.0:
            # keep the free-fit b uncertainty so "b = 0(sigma)" is reported
            cov = frozen.covariance.copy()
            cov[0, 0] = free_fit.covariance[0, 0]
            frozen.covariance = cov
            frozen.flags.append("fwm_frozen")
            result = frozen
    else:
        result.flags.append("fwm_frozen")
    if result.converged:
        sig = param_uncertainties(result)
        e = result.params[3]
        if e > SATURATION_RESOLUTION * float(np.max(data.x)) or sig[3] >= e:
            result.flags.append("saturation_unresolved")
            if result.chi2_reduced > 0:
                result.covariance = result.covariance.copy()
                inflated = max(sig[3], e) ** 2 / result.chi2_reduced
                result.covariance[3, 3] = max(result.covariance[3, 3], inflated)
            else:
                # perfect fit: no scale to inflate, mark e as undetermined instead
                result.degenerate = result.degenerate.copy()
                result.degenerate[3] = True
    return result


def noise_components_at(r: FitResult, energy: float) -> dict[str, tuple[float, float]]:
    """(value, 1-sigma) of FWM, SRS, fluorescence and their total at ``energy``.

    Errors use the covariance scaled by max(1, chi2_reduced): the weights
    are Poisson errors, so an under-dispersed fit does not shrink them.
    """
    b, c, d, e = r.params
    sat = energy / (e + energy)
    grads = {
        "fwm": np.array([energy**2, 0.0, 0.0, 0.0]),
        "srs": np.array([0.0, energy, 0.0, 0.0]),
        "fluorescence": np.array([0.0, 0.0, sat, -d * energy / (e + energy) ** 2]),
    }
    grads["total"] = grads["fwm"] + grads["srs"] + grads["fluorescence"]
    values = {"fwm": b * energy**2, "srs": c * energy, "fluorescence": d * sat}
    values["total"] = values["fwm"] + values["srs"] + values["fluorescence"]
    cov = r.covariance * max(1.0, r.chi2_reduced)
    out = {}
    for k, g in grads.items():
        nz = g != 0  # skip zero weights so an infinite variance elsewhere stays out
        var = float(g[nz] @ cov[np.ix_(nz, nz)] @ g[nz])
        out[k] = (float(values[k]), math.sqrt(max(var, 0.0)))
    dchi2 = r.zero_first_delta_chi2
    if dchi2 is not None and values["fwm"] > 0:
        # b trades off nonlinearly against the saturating term; the likelihood
        # ratio to b = 0 gives the more honest error
        profile = values["fwm"] / math.sqrt(dchi2) if dchi2 > 0 else math.inf
        out["fwm"] = (out["fwm"][0], max(out["fwm"][1], profile))
    return out


# --- detuning scan ---------------------------------------------------------------------------------


@dataclass
class DecompositionRow:
    delta: float
    energy: float
    components: dict[str, tuple[float, float]] | None
    converged: bool
    flags: list[str]
    fit: FitResult | None = None


def _decompose_one(delta: float, data: Dataset, energy: float) -> DecompositionRow:
    flags: list[str] = []
    try:
        r = fit_noise_energy(data)
        if not r.converged:
            flags.append("not_converged")
            r = fit_noise_energy(data, freeze_fwm=True)
            flags.append("fwm_excluded")
        flags.extend(f for f in r.flags if f not in flags)
        if not r.converged:
            return DecompositionRow(delta, energy, None, False, flags, r)
        return DecompositionRow(delta, energy, noise_components_at(r, energy), True, flags, r)
    except (ValueError, FitError, np.linalg.LinAlgError) as exc:
        return DecompositionRow(delta, energy, None, False, flags + [f"error: {exc}"], None)


def decompose_vs_detuning(
    scan: Sequence[tuple[float, Dataset]], jobs: int = 1, reference_energy: float | None = None
) -> list[DecompositionRow]:
    """Fit the energy dependence at every detuning; components at the scan's largest energy."""
    if not scan:
        return []
    if reference_energy is None:
        reference_energy = max(float(np.max(ds.x)) for _, ds in scan)
    items = sorted(scan, key=lambda item: item[0])
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(lambda it: _decompose_one(float(it[0]), it[1], reference_energy), items))
    else:
        rows = [_decompose_one(float(d), ds, reference_energy) for d, ds in items]
    return rows


def fit_total_noise(
    delta,
    total,
    sigma,
    voigt_gauss_fwhm: float = 380.0,
    voigt_lorentz_fwhm: float = 920.0,
    fwm=None,
    fwm_sigma=None,
) -> FitResult:
    """Fit N(delta) = n_srs + n_fl V(delta) + n_fwm with fixed Voigt widths.

    n_srs and n_fwm are both constant in detuning and cannot be separated
    from the total alone. ``n_fwm`` is therefore taken as the weighted mean of
    per-detuning FWM components when they are given, and zero otherwise, and
    held fixed while n_srs and n_fl are fitted.
    """
    delta = np.asarray(delta, dtype=float)
    data = Dataset(delta, np.asarray(total, dtype=float), np.asarray(sigma, dtype=float))
    n_fwm, var_fwm = 0.0, 0.0
    if fwm is not None:
        fwm = np.asarray(fwm, dtype=float)
        fs = np.asarray(fwm_sigma, dtype=float) if fwm_sigma is not None else np.ones_like(fwm)
        ok = np.isfinite(fwm) & np.isfinite(fs) & (fs > 0)
        if np.any(ok):
            wts = 1.0 / fs[ok] ** 2
            n_fwm = max(float(np.sum(wts * fwm[ok]) / np.sum(wts)), 0.0)
            var_fwm = 1.0 / float(np.sum(wts))
    model = _make_total_noise(voigt_gauss_fwhm, voigt_lorentz_fwhm)
    y_floor = float(np.min(data.y))
    init = np.array([max(y_floor - n_fwm, 0.0), max(float(np.max(data.y)) - y_floor, 0.0), n_fwm])
    r = least_squares_fit(model, data, init, [0.0, 0.0, 0.0], [np.inf, np.inf, np.inf], fixed=[False, False, True])
    # n_srs = fitted constant - n_fwm, so the FWM variance feeds into n_srs
    var = var_fwm / r.chi2_reduced if r.chi2_reduced > 0 else 0.0
    r.covariance[2, 2] = var
    r.covariance[0, 0] += var
    r.covariance[0, 2] = r.covariance[2, 0] = -var
    fwhm = voigt_gauss_fwhm + voigt_lorentz_fwhm
    if np.max(np.abs(delta)) < fwhm:
        r.flags.append("srs_fl_degenerate: detunings do not reach the Voigt wings")
    return r


# --- files ---------------------------------------------------------------------------------------


def read_dataset(path: str | Path, attempts: float | None = None) -> Dataset:
    """CSV with header ``x,y,sigma_y``; without the sigma column, y are counts per attempt and ``attempts`` sets Poisson errors."""
    rows = Path(path).read_text().strip().splitlines()
    header = [h.strip() for h in rows[0].split(",")]
    if header not in (["x", "y", "sigma_y"], ["x", "y"]):
        raise ValueError(f"{path}: expected header 'x,y,sigma_y'")
    vals = np.array([[float(v) for v in row.split(",")] for row in rows[1:]])
    if header == ["x", "y"]:
        if attempts is None:
            raise ValueError(f"{path}: no sigma_y column and no attempt count for Poisson errors")
        return Dataset.from_counts(vals[:, 0], vals[:, 1] * attempts, attempts)
    return Dataset(vals[:, 0], vals[:, 1], vals[:, 2])


def write_dataset(data: Dataset, path: str | Path) -> None:
    lines = ["x,y,sigma_y"] + [f"{float(x)!r},{float(y)!r},{float(s)!r}" for x, y, s in zip(data.x, data.y, data.sigma_y)]
    Path(path).write_text("\n".join(lines) + "\n")


def write_fit(r: FitResult, path: str | Path) -> None:
    Path(path).write_text(json.dumps(r.as_dict(), indent=2, sort_keys=True) + "\n")
