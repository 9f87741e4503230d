"""Rate calibration from Wigner-tomography trajectories.

Two estimators: the two-photon rate from trajectory matching of full
Wigner maps, and the single-photon rate from the decay of the Wigner
origin after a |1> preparation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..dynamics import LindbladModel, evolve
from ..errors import ConvergenceError, IllConditioned
from ..fock import ModeSpace, Operator, QuantumState, cat_state
from ..wigner import WignerGrid, wigner_numeric
from .fits import FitResult, fit_exponential

__all__ = [
    "MixedCatModel",
    "fit_initial_cat",
    "decay_wigner_maps",
    "extract_kappa2",
    "kappa1_from_fock_decay",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class MixedCatModel:
    """Cat-manifold density matrix p|C+><C+| + (1-p)|C-><C-|."""

    alpha: complex
    p_plus: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_plus <= 1.0:
            raise ValueError("p_plus must be in [0, 1]")

    def state(self, space: ModeSpace) -> QuantumState:
        plus = cat_state(space, self.alpha)
        rho = self.p_plus * plus.rho
        if self.p_plus < 1.0:
            minus = cat_state(space, self.alpha, math.pi)
            rho = rho + (1.0 - self.p_plus) * minus.rho
        return QuantumState(space, rho)


def _grid_value_at(grid: WignerGrid, beta: complex) -> float:
    j = int(np.argmin(np.abs(grid.re_axis - beta.real)))
    i = int(np.argmin(np.abs(grid.im_axis - beta.imag)))
    return float(grid.values[i, j])


def fit_initial_cat(grid: WignerGrid) -> MixedCatModel:
    """Cat amplitude and parity mixture from a single Wigner map.

    The phase of alpha comes from the brightest lobe, p_plus from the
    origin value W(0) = (2/pi)(2p - 1), and |alpha| from the measured
    photon number with the parity-dependent tanh/coth correction.
    """
    w0 = _grid_value_at(grid, 0j)
    p = 0.5 * (1.0 + 0.5 * math.pi * w0)
    p = min(1.0, max(0.0, p))

    # brightest point away from the fringe region marks a lobe
    RE, IM = np.meshgrid(grid.re_axis, grid.im_axis)
    R = np.hypot(RE, IM)
    masked = np.where(R > 0.5 * R.max(), grid.values, -np.inf)
    i, j = np.unravel_index(np.argmax(masked), masked.shape)
    theta = math.atan2(grid.im_axis[i], grid.re_axis[j])

    from ..wigner import photon_number_from_grid

    n_bar = max(photon_number_from_grid(grid), 1e-6)

    def mean_photons(a2: float) -> float:
        if a2 < 1e-12:
            return a2
        t = math.tanh(a2)
        return a2 * (p * t + (1.0 - p) / t)

    lo, hi = 0.0, n_bar + 4.0 * math.sqrt(n_bar) + 4.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mean_photons(mid) < n_bar:
            lo = mid
        else:
            hi = mid
    alpha = math.sqrt(0.5 * (lo + hi)) * complex(math.cos(theta),
                                                 math.sin(theta))
    return MixedCatModel(alpha=alpha, p_plus=p)


def _decay_model(kappa_2: float, kappa_1: float, chi_mm: float,
                 dim: int) -> LindbladModel:
    """Free decay of the memory: Kerr drift, one- and two-photon loss."""
    sm = ModeSpace(dim)
    space = (sm,)
    m = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)
    md = m.conj().T
    H = -0.5 * chi_mm * (md @ md @ m @ m)
    collapse = []
    if kappa_2 > 0:
        collapse.append(Operator(space, math.sqrt(kappa_2) * (m @ m)))
    if kappa_1 > 0:
        collapse.append(Operator(space, math.sqrt(kappa_1) * m))
    return LindbladModel(space, Operator(space, H, hermitian=True), (),
                         tuple(collapse), 0j)


def decay_wigner_maps(initial: MixedCatModel, times: Sequence[float],
                      kappa_2: float, kappa_1: float = 0.0,
                      chi_mm: float = 0.0, dim: int | None = None,
                      grid=None, points: int = 45) -> list[WignerGrid]:
    """Wigner snapshots of a cat relaxing under free decay.

    Generates the measurement-like input that extract_kappa2 consumes:
    the state `initial` evolved under Kerr drift and one-/two-photon loss,
    mapped at each requested time. grid follows the wigner_numeric
    conventions; None picks a square sized for the initial state.
    """
    t = np.asarray(times, dtype=float)
    if t.size < 1:
        raise ValueError("need at least one time sample")
    if dim is None:
        a2 = abs(initial.alpha) ** 2
        dim = int(math.ceil(a2 + 4.0 * math.sqrt(a2) + 6.0)) + 2
    space = ModeSpace(dim)
    rho0 = initial.state(space)
    if grid is None:
        extent = abs(initial.alpha) + 1.8
        axis = np.linspace(-extent, extent, points)
        grid = (axis, axis)
    model = _decay_model(kappa_2, kappa_1, chi_mm, dim)
    order = np.argsort(t)
    maps: list[WignerGrid | None] = [None] * t.size
    for k, st in zip(order, evolve(model, rho0, t[order])):
        maps[k] = wigner_numeric(st, grid=grid)
    return maps


def extract_kappa2(grids: Sequence[WignerGrid], times: Sequence[float],
                   kappa2_guess: float, kappa_1: float = 0.0,
                   chi_mm: float = 0.0, dim: int | None = None,
                   x_tol: float = 2e-4) -> FitResult:
    """Two-photon loss rate (rad/s) matching a free-decay Wigner
    trajectory.

    The initial state is fitted to a MixedCatModel from grids[0]; the
    objective sum_t integral |W_data - W_sim| d beta is minimized over
    log kappa_2 by golden section on [guess/10, guess*10]. The returned
    stderr is the curvature-based uncertainty sqrt(f_tol / H) mapped out
    of log space. Simulated maps use the embedded Wigner route, so they
    are free of truncated-displacement boundary artifacts, like measured
    data.
    """
    if len(grids) != len(times):
        raise ValueError("one grid per time sample required")
    if len(grids) < 2:
        raise ValueError("need at least two time samples")
    if kappa2_guess <= 0:
        raise ValueError("kappa2_guess must be positive")
    init = fit_initial_cat(grids[0])
    if dim is None:
        a2 = abs(init.alpha) ** 2
        dim = int(math.ceil(a2 + 4.0 * math.sqrt(a2) + 6.0)) + 2
    space = ModeSpace(dim)
    rho0 = init.state(space)
    axes = [(g.re_axis, g.im_axis) for g in grids]
    t = np.asarray(times, dtype=float)
    order = np.argsort(t)

    cache: dict[float, float] = {}

    def objective(x: float) -> float:
        if x in cache:
            return cache[x]
        model = _decay_model(math.exp(x), kappa_1, chi_mm, dim)
        states = evolve(model, rho0, t[order])
        total = 0.0
        for k, st in zip(order, states):
            sim = wigner_numeric(st, grid=axes[k])
            diff = np.abs(sim.values - grids[k].values)
            total += float(np.trapezoid(
                np.trapezoid(diff, sim.re_axis, axis=1), sim.im_axis))
        cache[x] = total
        return total

    a = math.log(kappa2_guess / 10.0)
    b = math.log(kappa2_guess * 10.0)
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = objective(c), objective(d)
    while (b - a) > x_tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = objective(d)
    x_hat = 0.5 * (a + b)
    edge = max(math.log(10.0) * 0.02, x_tol)
    if (x_hat - math.log(kappa2_guess / 10.0) < edge
            or math.log(kappa2_guess * 10.0) - x_hat < edge):
        raise ConvergenceError(
            "kappa_2 minimum sits at the bracket edge; guess is off by "
            "more than a decade")

    # curvature from a parabola through the argmin and its neighbors
    xs = np.array(sorted(cache))
    fs = np.array([cache[x] for x in xs])
    k = int(np.argmin(fs))
    k0, k1 = max(0, k - 2), min(len(xs), k + 3)
    coef = np.polyfit(xs[k0:k1], fs[k0:k1], 2)
    curvature = 2.0 * coef[0]
    f_tol = max(float(np.ptp(fs[k0:k1])), 1e-12 * max(fs[k], 1e-300))
    if curvature > 0:
        dx = math.sqrt(f_tol / curvature)
    else:
        dx = b - a
    kappa_2 = math.exp(x_hat)
    return FitResult(value=kappa_2, stderr=kappa_2 * dx,
                     residual_norm=float(fs[k]), n_points=len(grids),
                     method="wigner-trajectory")


def kappa1_from_fock_decay(times, w0_values) -> FitResult:
    """Single-photon rate (1/s) from the Wigner origin after a |1>
    preparation.

    W(0, t) = (2/pi)(1 - 2 p1 e^{-kappa_1 t}); the transformed series
    (2/pi - W0) pi/4 = p1 e^{-kappa_1 t} feeds the exponential fitter, so
    an imperfect preparation only rescales the amplitude.
    """
    w0 = np.asarray(w0_values, dtype=float)
    z = (2.0 / math.pi - w0) * (math.pi / 4.0)
    if np.max(np.abs(z)) < 1e-3:
        raise IllConditioned(
            "Wigner origin never leaves 2/pi: no |1> population to fit")
    fit = fit_exponential(times, z)
    return FitResult(value=fit.value, stderr=fit.stderr,
                     residual_norm=fit.residual_norm, n_points=fit.n_points,
                     amplitude=fit.amplitude, method="fock-decay")
