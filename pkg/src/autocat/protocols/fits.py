"""Closed-form signals and least-squares fitters shared by the protocols.

Rates are 1/s and angular frequencies rad/s throughout. Fitters accept an
optional per-point sigma; the default is unweighted. Standard errors come
from the Gauss-Newton covariance at the solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from ..errors import IllConditioned, NoOscillation

__all__ = [
    "FitResult",
    "ramsey_signal",
    "fit_exponential",
    "fit_decaying_sinusoid",
]


@dataclass(frozen=True)
class FitResult:
    """Fitted rate (value, 1/s) with optional frequency (rad/s).

    stderr covers value; residual_norm is the final 2-norm of residuals.
    method records which extraction produced the number. lower_bound is
    set instead of a finite value when the data only bounds the rate.
    """

    value: float
    stderr: float
    residual_norm: float
    n_points: int
    frequency: float | None = None
    frequency_stderr: float | None = None
    amplitude: float | None = None
    method: str = ""
    lower_bound: float | None = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.residual_norm):
            raise ValueError("residual_norm must be finite")
        if self.stderr < 0:
            raise ValueError("stderr must be >= 0")


def ramsey_signal(n_bar: float, chi: float, T2: float, t):
    """Transmon Ramsey contrast against a displaced cavity.

    cos(n sin(chi t)) * exp(n (cos(chi t) - 1) - t/T2); the periodic
    collapse-revival factor comes from the coherent-state phase kicks, the
    exponential from plain transmon decoherence.
    """
    if T2 <= 0:
        raise ValueError("T2 must be positive")
    t = np.asarray(t, dtype=float)
    phase = chi * t
    out = np.cos(n_bar * np.sin(phase)) * np.exp(
        n_bar * (np.cos(phase) - 1.0) - t / T2)
    return out if out.ndim else float(out)


def _covariance_stderr(res, n_params: int) -> np.ndarray:
    """Per-parameter standard errors from the Gauss-Newton covariance."""
    m = res.fun.size
    if m <= n_params:
        return np.zeros(n_params)
    J = res.jac
    try:
        cov = np.linalg.inv(J.T @ J)
    except np.linalg.LinAlgError:
        return np.full(n_params, np.inf)
    dof = m - n_params
    s2 = 2.0 * res.cost / dof
    return np.sqrt(np.clip(np.diag(cov) * s2, 0.0, None))


def fit_exponential(times, values, sigma=None, offset=False) -> FitResult:
    """Least-squares fit of A exp(-Gamma t), plus a constant floor when
    offset=True; returns Gamma in 1/s.

    Needs at least 4 samples of a single sign (5 with the floor, which is
    a nuisance parameter and is not reported). Initialized from the
    log-linear slope, refined with a Gauss-Newton pass.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError("times and values must be matching 1d arrays")
    if t.size < (5 if offset else 4):
        raise IllConditioned("exponential fit needs >= 4 points (5 with "
                             "offset)")
    if np.any(y == 0.0) or (np.any(y > 0) and np.any(y < 0)):
        raise IllConditioned("exponential fit needs values of one sign")
    w = np.ones_like(y) if sigma is None else 1.0 / np.asarray(sigma, float)

    sign = 1.0 if y[0] > 0 else -1.0
    span = t[-1] - t[0]
    if span <= 0:
        raise IllConditioned("times must span a nonzero interval")
    slope, logA = np.polyfit(t, np.log(sign * y), 1)
    x0 = (sign * math.exp(logA), -slope)

    def resid(p):
        model = p[0] * np.exp(-p[1] * t)
        if offset:
            model = model + p[2]
        return (model - y) * w

    if offset:
        x0 = x0 + (0.0,)
    res = least_squares(resid, x0, method="lm", xtol=1e-14, ftol=1e-14)
    if not res.success:
        raise IllConditioned(f"exponential fit failed: {res.message}")
    A, gamma = res.x[0], res.x[1]
    err = _covariance_stderr(res, len(res.x))
    return FitResult(value=float(gamma), stderr=float(err[1]),
                     residual_norm=float(np.linalg.norm(res.fun)),
                     n_points=t.size, amplitude=float(A),
                     method="exponential")


def fit_decaying_sinusoid(times, values, sigma=None) -> FitResult:
    """Fit A exp(-kappa t) cos(Omega t + phi) + C on a uniform time grid.

    Omega is initialized from the FFT peak; NoOscillation is raised when
    the series is too short or the spectrum has no clear non-DC peak.
    Returns value=kappa (1/s) and frequency=Omega (rad/s).
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError("times and values must be matching 1d arrays")
    if t.size < 10:
        raise NoOscillation("need >= 10 samples spanning a period")
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-6, atol=0.0):
        raise ValueError("fit_decaying_sinusoid expects a uniform grid")
    w = np.ones_like(y) if sigma is None else 1.0 / np.asarray(sigma, float)

    C0 = float(np.mean(y))
    spec = np.abs(np.fft.rfft(y - C0))
    if spec.size < 3:
        raise NoOscillation("spectrum too short for a peak")
    peak = 1 + int(np.argmax(spec[1:]))
    floor = np.median(spec[1:])
    if spec[peak] == 0.0 or spec[peak] < 3.0 * floor:
        raise NoOscillation("no spectral peak above the noise floor")
    freqs = np.fft.rfftfreq(t.size, d=float(dt[0]))
    omega0 = 2.0 * math.pi * freqs[peak]
    A0 = float(np.max(np.abs(y - C0)))
    kappa0 = 1.0 / (t[-1] - t[0])

    def resid(p):
        A, kappa, omega, phi, C = p
        return (A * np.exp(-kappa * t) * np.cos(omega * t + phi) + C - y) * w

    best = None
    for phi0 in (0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi):
        res = least_squares(resid, (A0, kappa0, omega0, phi0, C0),
                            method="lm", xtol=1e-14, ftol=1e-14)
        if res.success and (best is None or res.cost < best.cost):
            best = res
    if best is None:
        raise NoOscillation("sinusoid fit did not converge")
    A, kappa, omega, phi, C = best.x
    if omega < 0:
        omega, phi = -omega, -phi
    err = _covariance_stderr(best, 5)
    return FitResult(value=float(kappa), stderr=float(err[1]),
                     residual_norm=float(np.linalg.norm(best.fun)),
                     n_points=t.size, frequency=float(omega),
                     frequency_stderr=float(err[2]), amplitude=float(A),
                     method="decaying-sinusoid")
