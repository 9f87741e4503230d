"""Logical lifetimes of the stabilized cat: bit-flip and phase-flip.

The bit-flip time comes either from the slowest odd-sector Liouvillian
eigenvalue (spectral route, the default) or from a finite-horizon fit of
the lobe contrast W(alpha) - W(-alpha); both carry a method tag and can
cross-check each other.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..dynamics import (
    LindbladModel,
    add_z_drive,
    evolve,
    liouvillian,
    liouvillian_spectrum,
)
from ..errors import MethodDisagreement
from ..fock import (
    ModeSpace,
    QuantumState,
    cat_state,
    coherent_state,
    fock_state,
    partial_trace,
    tensor,
)
from ..wigner import parity_point, wigner_point
from .fits import FitResult, fit_exponential

__all__ = [
    "bitflip_time",
    "phaseflip_rate",
    "bias_preservation_scan",
    "BiasScan",
]


def _memory_state(state: QuantumState) -> QuantumState:
    if len(state.space) == 1:
        return state
    return partial_trace(state, keep=0)


def _initial_state(model: LindbladModel, psi_m: QuantumState) -> QuantumState:
    if len(model.space) == 1:
        return psi_m
    vac = [fock_state(s, 0) for s in model.space[1:]]
    return tensor([psi_m] + vac)


def _spectral_floor(model: LindbladModel) -> float:
    L = liouvillian(model)
    return 1e-9 * float(np.max(np.abs(L.diagonal())))


def _slowest_above(model: LindbladModel, symmetry: str,
                   floor: float) -> float:
    """Slowest genuine decay rate of a symmetry sector, 0.0 when frozen.

    The parity-odd sector holds no steady state, so any eigenvalue at the
    numerical floor there is a dark (frozen) coherence and the sector is
    frozen. The even and joined sectors hold the steady states (two of
    them when parity is strongly conserved, as with pure dephasing), so
    zeros there are excluded and the slowest live mode is returned.
    """
    vals = liouvillian_spectrum(model, symmetry=symmetry)
    rates = np.abs(np.real(vals))
    if symmetry == "parity-odd" and int(np.sum(rates <= floor)) > 0:
        return 0.0
    live = rates[rates > floor]
    return float(live.min()) if live.size else 0.0


def bitflip_time(model: LindbladModel, alpha: complex | None = None,
                 method: str = "spectral", times: Sequence[float] | None = None,
                 symmetry: str = "parity-odd", cross_check: bool = False
                 ) -> FitResult:
    """Bit-flip time T_X (seconds) of a stabilized cat.

    method="spectral": inverse of the slowest decaying mode in the chosen
    Liouvillian symmetry sector (the odd sector holds the |C+><C-|
    coherence whose decay is the bit flip). When that sector has no
    decaying mode above the numerical floor the result is the +inf
    sentinel with lower_bound = 1/floor.

    method="fit": evolve |alpha> over `times` and fit the lobe contrast
    W(alpha) - W(-alpha) to an exponential.

    cross_check runs the other route too and warns (MethodDisagreement)
    when they differ by more than 10%.
    """
    if alpha is None:
        alpha = model.alpha_target
    if method not in ("spectral", "fit"):
        raise ValueError("method must be 'spectral' or 'fit'")

    def spectral() -> FitResult:
        if not model.is_time_independent:
            raise ValueError("spectral route needs a time-independent model")
        floor = _spectral_floor(model)
        gamma = _slowest_above(model, symmetry, floor)
        if gamma == 0.0:
            return FitResult(value=math.inf, stderr=0.0, residual_norm=0.0,
                             n_points=0, method="spectral-lower-bound",
                             lower_bound=1.0 / floor)
        return FitResult(value=1.0 / gamma, stderr=0.0, residual_norm=0.0,
                         n_points=0, method="spectral")

    def horizon_fit() -> FitResult:
        if times is None:
            raise ValueError("method='fit' needs explicit sample times")
        psi = coherent_state(model.space[0], alpha)
        states = evolve(model, _initial_state(model, psi), times)
        contrast = [
            wigner_point(_memory_state(st), alpha)
            - wigner_point(_memory_state(st), -alpha)
            for st in states
        ]
        fit = fit_exponential(np.asarray(times, float), np.asarray(contrast))
        err = fit.stderr / fit.value ** 2 if fit.value != 0 else math.inf
        return FitResult(value=1.0 / fit.value, stderr=err,
                         residual_norm=fit.residual_norm,
                         n_points=fit.n_points, method="fit")

    primary = spectral() if method == "spectral" else horizon_fit()
    if cross_check:
        other = horizon_fit() if method == "spectral" else spectral()
        if math.isfinite(primary.value) and math.isfinite(other.value):
            gap = abs(primary.value - other.value) / max(primary.value,
                                                         other.value)
            if gap > 0.10:
                warnings.warn(
                    f"bit-flip extraction methods disagree by {gap:.1%} "
                    f"({primary.method}: {primary.value:.3e} s vs "
                    f"{other.method}: {other.value:.3e} s)",
                    MethodDisagreement)
    return primary


def phaseflip_rate(model: LindbladModel, times: Sequence[float],
                   alpha: complex | None = None) -> FitResult:
    """Phase-flip rate Gamma_Z (1/s) from the parity decay of an even
    cat under the stabilized evolution.

    The parity settles onto a small residual floor (the steady-state
    even/odd imbalance, noticeable at low photon number), so the fit
    carries a constant offset."""
    if alpha is None:
        alpha = model.alpha_target
    psi = cat_state(model.space[0], alpha)
    states = evolve(model, _initial_state(model, psi), times)
    parity = [parity_point(_memory_state(st)) for st in states]
    fit = fit_exponential(np.asarray(times, float), np.asarray(parity),
                          offset=True)
    return FitResult(value=fit.value, stderr=fit.stderr,
                     residual_norm=fit.residual_norm, n_points=fit.n_points,
                     amplitude=fit.amplitude, method="parity-decay")


@dataclass(frozen=True)
class BiasScan:
    """T_X against Zeno drive amplitude, with the collapse knee flagged."""

    eps_values: np.ndarray
    bitflip_times: np.ndarray
    knee: float | None


def bias_preservation_scan(model: LindbladModel,
                           eps_values: Sequence[float],
                           knee_factor: float = 2.0,
                           jobs: int = 1) -> BiasScan:
    """Bit-flip time as a function of the Zeno drive amplitude.

    The Z drive breaks the parity superselection, so driven points are
    evaluated in the joined symmetry sector; the undriven reference keeps
    the parity-odd sector where frozen coherences are detected exactly.
    knee is the smallest eps at which T_X has dropped by more than
    knee_factor below the eps=0 value (None when the scan stays flat).
    jobs > 1 runs scan points in a thread pool (the dense eigensolves
    release the GIL).
    """
    eps = np.asarray(list(eps_values), dtype=float)

    def point(e: float) -> float:
        if e == 0:
            return bitflip_time(model, method="spectral",
                                symmetry="parity-odd").value
        return bitflip_time(add_z_drive(model, complex(e)),
                            method="spectral", symmetry="joined").value

    if jobs > 1 and eps.size > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            tx = np.asarray(list(pool.map(point, eps)), dtype=float)
    else:
        tx = np.asarray([point(e) for e in eps], dtype=float)
    knee = None
    if np.any(eps == 0.0):
        ref = float(tx[eps == 0.0][0])
        dropped = np.where(tx < ref / knee_factor)[0]
        if dropped.size:
            knee = float(eps[dropped[0]])
    return BiasScan(eps_values=eps, bitflip_times=tx, knee=knee)
