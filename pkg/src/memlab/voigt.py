"""Voigt line shape via a region-split rational approximation of the Faddeeva function."""

from __future__ import annotations

import math

import numpy as np

_SQRT_PI = math.sqrt(math.pi)
_LN2 = math.log(2.0)

# Weideman rational series, N terms; coefficients are computed once at import.
_WEIDEMAN_N = 32
# Beyond this |z| the asymptotic expansion is used.
_ASYMPTOTIC_RADIUS = 12.0
_ASYMPTOTIC_TERMS = 10


def _weideman_coefficients(n: int) -> tuple[float, np.ndarray]:
    m = 2 * n
    m2 = 2 * m
    k = np.arange(-m + 1, m)
    L = math.sqrt(n / math.sqrt(2.0))
    theta = k * math.pi / m
    t = L * np.tan(theta / 2.0)
    f = np.zeros(len(t) + 1)
    f[1:] = np.exp(-(t**2)) * (L**2 + t**2)
    a = np.real(np.fft.fft(np.fft.fftshift(f))) / m2
    return L, np.flipud(a[1 : n + 1])


_L, _A = _weideman_coefficients(_WEIDEMAN_N)


def _faddeeva_weideman(z: np.ndarray) -> np.ndarray:
    denom = _L - 1j * z
    Z = (_L + 1j * z) / denom
    p = np.polyval(_A, Z)
    return 2.0 * p / denom**2 + (1.0 / _SQRT_PI) / denom


def _faddeeva_asymptotic(z: np.ndarray) -> np.ndarray:
    # w(z) ~ i/(sqrt(pi) z) * sum_k (2k-1)!! / (2 z^2)^k, valid for Im z >= 0, |z| large
    inv2z2 = 1.0 / (2.0 * z * z)
    term = np.ones_like(z)
    total = np.ones_like(z)
    for k in range(1, _ASYMPTOTIC_TERMS):
        term = term * (2 * k - 1) * inv2z2
        total = total + term
    return 1j * total / (_SQRT_PI * z)


def faddeeva(z) -> np.ndarray:
    """Faddeeva function w(z) = exp(-z^2) erfc(-iz) for Im z >= 0."""
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag < 0):
        raise ValueError("faddeeva: only the upper half plane (Im z >= 0) is supported")
    out = np.empty_like(z)
    far = np.abs(z) >= _ASYMPTOTIC_RADIUS
    near = ~far
    if np.any(near):
        out[near] = _faddeeva_weideman(z[near])
    if np.any(far):
        out[far] = _faddeeva_asymptotic(z[far])
    return out


def _check_widths(gauss_fwhm: float, lorentz_fwhm: float) -> None:
    if gauss_fwhm < 0 or lorentz_fwhm < 0:
        raise ValueError("Voigt widths must be non-negative")
    if gauss_fwhm == 0 and lorentz_fwhm == 0:
        raise ValueError("at least one Voigt width must be positive")


def voigt_unit_peak(delta, gauss_fwhm: float, lorentz_fwhm: float):
    """Voigt profile normalized to unit height at zero detuning.

    Widths are full widths at half maximum in the same unit as ``delta``.
    A zero width gives the exact limiting pure Lorentzian or pure Gaussian.
    """
    _check_widths(gauss_fwhm, lorentz_fwhm)
    scalar = np.ndim(delta) == 0
    x = np.asarray(delta, dtype=float)
    if gauss_fwhm == 0:
        hw = 0.5 * lorentz_fwhm
        v = hw**2 / (x**2 + hw**2)
    elif lorentz_fwhm == 0:
        v = np.exp(-4.0 * _LN2 * (x / gauss_fwhm) ** 2)
    else:
        sigma = gauss_fwhm / (2.0 * math.sqrt(2.0 * _LN2))
        scale = sigma * math.sqrt(2.0)
        y = 0.5 * lorentz_fwhm / scale
        peak = faddeeva(np.array([1j * y]))[0].real
        v = faddeeva(np.abs(x) / scale + 1j * y).real / peak
    return float(v) if scalar else v


def voigt_fwhm(gauss_fwhm: float, lorentz_fwhm: float, tol: float = 1e-9) -> float:
    """Full width at half maximum of the Voigt profile, by bisection on the unit-peak shape."""
    _check_widths(gauss_fwhm, lorentz_fwhm)
    lo, hi = 0.0, gauss_fwhm + lorentz_fwhm
    while voigt_unit_peak(hi, gauss_fwhm, lorentz_fwhm) > 0.5:
        hi *= 2.0
    while hi - lo > tol * (gauss_fwhm + lorentz_fwhm):
        mid = 0.5 * (lo + hi)
        if voigt_unit_peak(mid, gauss_fwhm, lorentz_fwhm) > 0.5:
            lo = mid
        else:
            hi = mid
    return lo + hi
