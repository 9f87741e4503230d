"""Closed-form rate estimators for the stabilized cat and its environment.

All rates are angular (rad/s) unless a docstring says otherwise; photon
numbers and occupations are dimensionless.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import DivByZero, NonConvergence, NoStabilization

__all__ = [
    "ideal_z_rates",
    "semiclassical_buffer",
    "detuned_photon_number",
    "stabilization_threshold",
    "buffer_thermal_occupation",
    "squeezed_thermal_occupation",
    "TransmonPopulationTable",
    "transmon_bitflip_bound",
]


def ideal_z_rates(alpha: complex, eps_Z: complex, kappa_1: float,
                  kappa_b: float, g2: float) -> tuple[float, float]:
    """Ideal Zeno-gate rotation frequency and decay rate.

    Omega_Z = 4 Re(eps_Z alpha); kappa_Z = 2 kappa_1 |alpha|^2
    + kappa_b |eps_Z|^2 / (2 |alpha|^2 g2^2). The leakage term needs
    alpha != 0 and g2 != 0.
    """
    if alpha == 0:
        raise DivByZero("Zeno rates need alpha != 0")
    omega_z = 4.0 * (complex(eps_Z) * complex(alpha)).real
    leak = 0.0
    if eps_Z != 0:
        if g2 == 0:
            raise DivByZero("leakage term needs g2 != 0")
        leak = kappa_b * abs(eps_Z) ** 2 / (2.0 * abs(alpha) ** 2 * g2 ** 2)
    kappa_z = 2.0 * kappa_1 * abs(alpha) ** 2 + leak
    return omega_z, kappa_z


def semiclassical_buffer(Delta_m: float, chi_mm: float, chi_mb: float,
                         g2: float, alpha: complex,
                         kappa_1: float = 0.0, kappa_phi_m: float = 0.0,
                         tol: float = 1e-10, max_iter: int = 10_000
                         ) -> complex:
    """Steady buffer displacement lambda under a detuned stabilization
    drive.

    Damped fixed-point iteration on

        lambda = -e^{i 2 theta_m} (Delta_m + 2 chi_mm |alpha|^2
                 + chi_mb |lambda|^2) / (2 g2),   theta_m = arg(alpha).

    When the memory rates are not small against that detuning scale the
    full numerator keeps its +i (kappa_phi_m + kappa_1)/2 term and a
    warning is emitted.
    """
    if g2 == 0:
        raise DivByZero("buffer displacement needs g2 != 0")
    theta_m = np.angle(complex(alpha)) if alpha != 0 else 0.0
    phase = np.exp(2j * theta_m)
    n_alpha = abs(alpha) ** 2
    kappa_m = kappa_1 + kappa_phi_m

    def detuning(lam: complex) -> float:
        return Delta_m + 2.0 * chi_mm * n_alpha + chi_mb * abs(lam) ** 2

    lam = -phase * detuning(0.0) / (2.0 * g2)
    keep_imag = kappa_m > 0.1 * max(abs(detuning(lam)), 1e-300)
    if keep_imag:
        warnings.warn(
            "memory rates are not small against the detuning; keeping the "
            "i kappa_m/2 numerator term", stacklevel=2)
    extra = 0.5j * kappa_m if keep_imag else 0.0
    if chi_mb == 0:
        return phase * (-detuning(0.0) + extra) / (2.0 * g2)
    for _ in range(max_iter):
        new = phase * (-detuning(lam) + extra) / (2.0 * g2)
        step = new - lam
        lam = lam + 0.5 * step
        if abs(step) < tol:
            return lam
    raise NonConvergence(
        f"buffer displacement fixed point not converged in {max_iter} steps")


def detuned_photon_number(alpha0_sq: float, Delta_m: float, kappa_b: float,
                          g2: float) -> float:
    """Stabilized photon number under a memory detuning.

    |alpha_Delta|^2 = |alpha_0|^2 - |Delta_m| kappa_b / (4 g2^2); raises
    NoStabilization past the threshold where this goes negative.
    """
    if g2 == 0:
        raise DivByZero("needs g2 != 0")
    n = alpha0_sq - abs(Delta_m) * kappa_b / (4.0 * g2 ** 2)
    if n < 0:
        raise NoStabilization(
            f"|Delta_m| = {abs(Delta_m):.3e} exceeds the stabilization "
            f"threshold {stabilization_threshold(alpha0_sq, kappa_b, g2):.3e}")
    return n


def stabilization_threshold(alpha0_sq: float, kappa_b: float,
                            g2: float) -> float:
    """Largest |Delta_m| (rad/s) at which a 2d manifold survives:
    4 g2^2 |alpha_0|^2 / kappa_b."""
    if kappa_b <= 0:
        raise ValueError("kappa_b must be positive")
    return 4.0 * g2 ** 2 * alpha0_sq / kappa_b


def buffer_thermal_occupation(kappa_phi_b: float, kappa_b: float,
                              lam: complex) -> float:
    """Effective buffer temperature from dephasing of a displaced buffer:
    n_th = kappa_phi_b |lambda|^2 / kappa_b."""
    if kappa_phi_b < 0 or kappa_b <= 0:
        raise ValueError("rates must be kappa_phi_b >= 0, kappa_b > 0")
    return kappa_phi_b * abs(lam) ** 2 / kappa_b


def squeezed_thermal_occupation(r: float) -> float:
    """Thermal occupation equivalent of a squeezed buffer: sinh^2(r)."""
    return math.sinh(r) ** 2


@dataclass(frozen=True)
class TransmonPopulationTable:
    """Measured transmon occupations while the cat is stabilized.

    photon_axis holds |alpha|^2 values; populations[k, i] is the occupation
    of transmon level i at photon_axis[k]; hybridized_mass[k] is the weight
    in the unresolved high-level layer.
    """

    photon_axis: np.ndarray
    populations: np.ndarray
    hybridized_mass: np.ndarray

    def __post_init__(self) -> None:
        pa = np.asarray(self.photon_axis, dtype=float)
        pops = np.atleast_2d(np.asarray(self.populations, dtype=float))
        hyb = np.asarray(self.hybridized_mass, dtype=float)
        if pops.shape[0] != pa.size or hyb.size != pa.size:
            raise ValueError("table rows must align with photon_axis")
        if np.any(pops < 0) or np.any(hyb < 0):
            raise ValueError("populations must be >= 0")
        if np.any(pops.sum(axis=1) + hyb > 1.0 + 1e-6):
            raise ValueError("populations sum above 1")
        object.__setattr__(self, "photon_axis", pa)
        object.__setattr__(self, "populations", pops)
        object.__setattr__(self, "hybridized_mass", hyb)


def transmon_bitflip_bound(table: TransmonPopulationTable,
                           gamma_1to0: float,
                           detuning_rates=None) -> np.ndarray:
    """Per-photon-number upper bound on the bit-flip time set by transmon
    heating.

    The hybridized layer relaxes at ~2 gamma_1to0 and each passage flips
    the cat, so bound = 1 / (2 gamma_1to0 p_hyb); rows with p_hyb = 0
    report +inf. detuning_rates optionally adds per-level bit-flip rates
    Gamma_i (1/s, aligned with the population columns) weighted by their
    occupations.
    """
    if gamma_1to0 <= 0:
        raise ValueError("gamma_1to0 must be positive")
    rate = 2.0 * gamma_1to0 * table.hybridized_mass
    if detuning_rates is not None:
        g = np.asarray(detuning_rates, dtype=float)
        if g.size != table.populations.shape[1]:
            raise ValueError("detuning_rates must align with populations")
        rate = rate + table.populations @ g
    with np.errstate(divide="ignore"):
        return np.where(rate > 0, 1.0 / np.where(rate > 0, rate, 1.0),
                        np.inf)
