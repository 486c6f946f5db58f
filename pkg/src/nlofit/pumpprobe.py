"""Pump-probe transient reflectivity analysis.

Covers the reflectivity/index relation dR/R = 4 dn/(n0^2 - 1), Gaussian
fitting of the transient peak with FWHM deconvolution, and the fluence
series decomposition |dR/R| = a*I0 + b*I0^2 from which n2 and beta follow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .errors import DegenerateTraceError
from .fitting import FitOptions, FitProblem, fit_least_squares

FOUR_LN2 = 4.0 * math.log(2.0)


@dataclass(frozen=True)
class PumpProbeTrace:
    """Time-resolved (delay, dR/R) points plus metadata."""

    delay: np.ndarray
    dr_over_r: np.ndarray
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "delay", np.asarray(self.delay, dtype=float))
        object.__setattr__(self, "dr_over_r", np.asarray(self.dr_over_r, dtype=float))
        if self.delay.size < 10:
            raise ValueError(f"a pump-probe trace needs at least 10 points, got {self.delay.size}")
        if self.delay.shape != self.dr_over_r.shape:
            raise ValueError("delay and dr_over_r must have matching shapes")
        if np.any(np.diff(self.delay) <= 0):
            raise ValueError("delays must be strictly increasing")


@dataclass(frozen=True)
class PeakFit:
    """Gaussian peak fit: baseline + amplitude * exp(-4 ln2 (t-t0)^2/fwhm^2)."""

    amplitude: float
    t0: float
    fwhm: float
    baseline: float
    sigma: dict[str, float]
    residual_norm: float
    converged: bool
    condition_flag: str = "ok"

    def __post_init__(self) -> None:
        if not self.fwhm > 0:
            raise ValueError(f"fwhm must be positive, got {self.fwhm}")


@dataclass(frozen=True)
class FluenceSeries:
    """(intensity, |dR/R|) points for one sample.

    ``meta["abscissa"]`` records whether the raw file carried intensities
    ("intensity") or fluences converted upstream ("fluence").
    """

    intensity: np.ndarray
    abs_dr_over_r: np.ndarray
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "intensity", np.asarray(self.intensity, dtype=float))
        object.__setattr__(self, "abs_dr_over_r", np.asarray(self.abs_dr_over_r, dtype=float))
        if self.intensity.size < 3:
            raise ValueError(f"a fluence series needs at least 3 points, got {self.intensity.size}")
        if self.intensity.shape != self.abs_dr_over_r.shape:
            raise ValueError("intensity and abs_dr_over_r must have matching shapes")
        if np.any(self.intensity <= 0):
            raise ValueError("intensities must be strictly positive")
        if np.unique(self.intensity).size != self.intensity.size:
            raise ValueError("intensities must be distinct")
        if np.any(self.abs_dr_over_r < 0):
            raise ValueError("|dR/R| values must be >= 0")


@dataclass(frozen=True)
class FluenceFitResult:
    """Quadratic fit |dR/R| = a*I + b*I^2 and, once derived, (n2, beta)."""

    a: float
    b: float
    a_sigma: float
    b_sigma: float
    residual_norm: float
    converged: bool
    condition_flag: str = "ok"
    derived: dict[str, float] | None = None

    def with_derived(self, derived: dict[str, float]) -> "FluenceFitResult":
        return replace(self, derived=derived)


def reflectivity_from_index_change(dn: float, n0: float) -> float:
    """Normal-incidence reflectivity change 4*dn/(n0^2 - 1)."""
    if not n0 > 1:
        raise ValueError(f"n0 must exceed 1, got {n0}")
    return 4.0 * dn / (n0 * n0 - 1.0)


def pump_probe_peak_model(
    intensity: float,
    n2: float,
    beta: float,
    kappa: float,
    n0: float,
) -> float:
    """|dR/R| at the pump-probe overlap from the Kerr and TPA-carrier terms.

    |dR/R| = |4/(n0^2-1)| * |n2*I + kappa*beta*I^2| with kappa from
    :func:`nlofit.optics.tpa_index_kappa`.
    """
    if intensity < 0:
        raise ValueError(f"intensity must be >= 0, got {intensity}")
    if not n0 > 1:
        raise ValueError(f"n0 must exceed 1, got {n0}")
    scale = abs(4.0 / (n0 * n0 - 1.0))
    return scale * abs(n2 * intensity + kappa * beta * intensity * intensity)


def _gaussian_model(theta: np.ndarray, t: np.ndarray) -> np.ndarray:
    amplitude, t0, fwhm, baseline = theta
    arg = (t - t0) / fwhm
    return baseline + amplitude * np.exp(-FOUR_LN2 * arg * arg)


def _gaussian_guess(trace: PumpProbeTrace) -> np.ndarray:
    t = trace.delay
    y = trace.dr_over_r
    n_edge = max(1, y.size // 10)
    baseline = float(np.median(np.concatenate([y[:n_edge], y[-n_edge:]])))
    deviation = y - baseline
    if np.all(deviation == 0):
        raise DegenerateTraceError("flat pump-probe trace: nothing to fit")
    i_ext = int(np.argmax(np.abs(deviation)))
    amplitude = float(deviation[i_ext])
    t0 = float(t[i_ext])
    above_half = np.abs(deviation) >= 0.5 * abs(amplitude)
    if np.count_nonzero(above_half) >= 2:
        idx = np.flatnonzero(above_half)
        fwhm = float(t[idx[-1]] - t[idx[0]])
    else:
        fwhm = 0.0
    if fwhm <= 0:
        fwhm = float(t[-1] - t[0]) / 10.0
    return np.array([amplitude, t0, fwhm, baseline])


def fit_gaussian_peak(trace: PumpProbeTrace, options: FitOptions | None = None) -> PeakFit:
    """Fit baseline + signed Gaussian to the transient; FWHM kept positive.

    The fit runs in span-normalized time so the engine's finite-difference
    steps stay meaningful for femtosecond delays.
    """
    guess = _gaussian_guess(trace)
    mid = 0.5 * (trace.delay[0] + trace.delay[-1])
    span = trace.delay[-1] - trace.delay[0]
    theta0 = np.array([guess[0], (guess[1] - mid) / span,
                       max(guess[2] / span, 1e-4), guess[3]])
    problem = FitProblem(
        model=_gaussian_model,
        x=(trace.delay - mid) / span,
        y=trace.dr_over_r,
        theta0=theta0,
        bounds=[(None, None), (None, None), (1e-4, None), (None, None)],
    )
    result = fit_least_squares(problem, options)
    names = ("amplitude", "t0", "fwhm", "baseline")
    scale_back = np.array([1.0, span, span, 1.0])
    return PeakFit(
        amplitude=float(result.theta[0]),
        t0=float(mid + result.theta[1] * span),
        fwhm=float(result.theta[2] * span),
        baseline=float(result.theta[3]),
        sigma={name: float(s) for name, s in zip(names, result.sigma * scale_back)},
        residual_norm=result.residual_norm,
        converged=result.converged,
        condition_flag=result.condition_flag,
    )


def deconvolve_fwhm(fwhm_signal: float, fwhm_known: float) -> float:
    """Gaussian quadrature deconvolution sqrt(signal^2 - known^2).

    Valid because the FWHM of a convolution of Gaussians adds in quadrature;
    requires fwhm_signal > fwhm_known > 0.
    """
    if not fwhm_known > 0:
        raise ValueError(f"fwhm_known must be positive, got {fwhm_known}")
    if not fwhm_signal > fwhm_known:
        raise ValueError(
            f"fwhm_signal ({fwhm_signal}) must exceed fwhm_known ({fwhm_known})"
        )
    return math.sqrt(fwhm_signal * fwhm_signal - fwhm_known * fwhm_known)


def _quadratic_model(theta: np.ndarray, intensity: np.ndarray) -> np.ndarray:
    return theta[0] * intensity + theta[1] * intensity * intensity


def fit_fluence_series(series: FluenceSeries, options: FitOptions | None = None) -> FluenceFitResult:
    """Least squares for (a, b) in |dR/R| = a*I + b*I^2; both signs allowed.

    The model is linear in its parameters, so the Gauss-Newton step lands on
    the closed-form solution immediately.
    """
    problem = FitProblem(
        model=_quadratic_model,
        x=series.intensity,
        y=series.abs_dr_over_r,
        theta0=np.zeros(2),
    )
    result = fit_least_squares(problem, options)
    return FluenceFitResult(
        a=float(result.theta[0]),
        b=float(result.theta[1]),
        a_sigma=float(result.sigma[0]),
        b_sigma=float(result.sigma[1]),
        residual_norm=result.residual_norm,
        converged=result.converged,
        condition_flag=result.condition_flag,
    )


def nlo_coefficients_from_fluence(
    fit: FluenceFitResult,
    n0: float,
    kappa: float,
) -> dict[str, float]:
    """Invert a = (4/(n0^2-1)) n2 and b = (4/(n0^2-1)) |kappa| beta.

    The sign of n2 follows the sign of a; beta is non-negative by
    construction. ``kappa_used`` is echoed so the m*/tau_p provenance of
    beta stays visible.
    """
    if not n0 > 1:
        raise ValueError(f"n0 must exceed 1, got {n0}")
    if kappa == 0:
        raise ValueError("kappa must be non-zero to derive beta")
    scale = 4.0 / (n0 * n0 - 1.0)
    n2 = fit.a / scale
    beta = abs(fit.b) / (scale * abs(kappa))
    return {
        "n2": n2,
        "n2_abs": abs(n2),
        "n2_sigma": fit.a_sigma / scale,
        "beta": beta,
        "beta_sigma": fit.b_sigma / (scale * abs(kappa)),
        "kappa_used": kappa,
    }
