"""Wigner functions: numeric displaced-parity evaluation and analytic forms.

W(beta) = (2/pi) Tr[D(-beta) rho D(beta) P] with D the displacement and P the
photon-number parity. The numeric path evaluates exactly this trace at every
grid point; the displacement is applied through the spectral decomposition of
its generator (one Hermitian eigendecomposition per Hilbert-space dimension,
then diagonal phase factors per point), which is algebraically identical to
exponentiating the generator at each point but runs as batched matrix
products over the grid.

Conventions: beta-plane axes in the same units as the coherent amplitude
alpha; values normalized so pure states peak at |W| = 2/pi and the grid
integral of W is Tr rho = 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_laguerre

from .errors import CoverageWarning, NoOscillation, TruncationError
from .fock import ModeSpace, QuantumState, adequate_dim, annihilation

__all__ = [
    "WignerGrid",
    "default_axes",
    "wigner_numeric",
    "wigner_point",
    "wigner_thermal",
    "wigner_fock",
    "wigner_cat",
    "fringe_calibration",
    "fringe_period",
    "photon_number_from_grid",
    "parity_point",
]


@dataclass(frozen=True)
class WignerGrid:
    """Sampled W over a beta-plane grid; values[i, j] = W(re[j] + 1i*im[i])."""

    re_axis: np.ndarray
    im_axis: np.ndarray
    values: np.ndarray
    norm_convention: str = field(default="max |W| = 2/pi for pure states")

    def __post_init__(self) -> None:
        re = np.asarray(self.re_axis, dtype=float)
        im = np.asarray(self.im_axis, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (im.size, re.size):
            raise ValueError(
                f"values shape {vals.shape} != (len(im), len(re)) = "
                f"({im.size}, {re.size})"
            )
        object.__setattr__(self, "re_axis", re)
        object.__setattr__(self, "im_axis", im)
        object.__setattr__(self, "values", vals)

    def integral(self) -> float:
        inner = np.trapezoid(self.values, self.re_axis, axis=1)
        return float(np.trapezoid(inner, self.im_axis))


def default_axes(state: QuantumState, points: int = 161
                 ) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric square covering |beta| <= sqrt(n_mean) + 3 (5-sigma rule)."""
    rho = state.rho
    n_mean = float(np.real(np.sum(np.diag(rho) * np.arange(rho.shape[0]))))
    half = math.sqrt(max(n_mean, 0.0)) + 3.0
    ax = np.linspace(-half, half, points)
    return ax, ax.copy()


def _tail_population(state: QuantumState) -> float:
    rho = state.rho
    p = np.real(np.diag(rho))
    return float(p[-2:].sum())


def _working_dim(state: QuantumState, r_max: float) -> int:
    """Fock cutoff adequate for displacing this state by up to r_max.

    The displaced-parity trace is exact only when the displaced state still
    fits in the box, so size the working space for the coherent-adequacy
    radius sqrt(n_top) + r_max, where n_top bounds the state's own support.
    """
    p = np.real(np.diag(state.rho))
    occupied = np.nonzero(p > 1e-12)[0]
    n_top = int(occupied[-1]) if occupied.size else 0
    return max(state.space[0].dim, adequate_dim(math.sqrt(n_top) + r_max))


def wigner_numeric(state: QuantumState, grid=None, points: int = 161,
                   embed: bool | int = True) -> WignerGrid:
    """Displaced-parity Wigner function of a single-mode state on a grid.

    grid may be a WignerGrid (axes reused), a (re_axis, im_axis) pair, or
    None for the default square. Raises TruncationError when the state
    visibly saturates the truncation (top two Fock levels hold > 1e-6).

    embed=True (default) zero-pads the state into a working space sized for
    the farthest grid point, so displacements never push population against
    the truncation wall. embed=False evaluates in the state's own space:
    cheaper, and exactly reproducible by any other displaced-parity code on
    the same truncation, but the far |beta| region then carries truncation
    artifacts. An int pins the working dimension explicitly.
    """
    if len(state.space) != 1:
        raise ValueError("wigner_numeric takes a single-mode state")
    if _tail_population(state) > 1e-6:
        raise TruncationError(
            "state occupies the top of the truncated Fock space; "
            f"increase dim beyond {state.space[0].dim}"
        )
    if isinstance(grid, WignerGrid):
        re_axis, im_axis = grid.re_axis, grid.im_axis
    elif grid is None:
        re_axis, im_axis = default_axes(state, points)
    else:
        re_axis = np.asarray(grid[0], dtype=float)
        im_axis = np.asarray(grid[1], dtype=float)

    dim = state.space[0].dim
    r_max = math.hypot(float(np.max(np.abs(re_axis))),
                       float(np.max(np.abs(im_axis))))
    if embed is True:
        wdim = _working_dim(state, r_max)
    elif embed is False:
        wdim = dim
    else:
        wdim = int(embed)
        if wdim < dim:
            raise ValueError("working dimension smaller than the state")

    a = annihilation(ModeSpace(wdim)).matrix
    # generator: beta a+ - beta* a = i r R Y R+, Y = -i(a+ - a) Hermitian
    Y = -1j * (a.conj().T - a)
    lam, V = np.linalg.eigh(Y)
    n_idx = np.arange(wdim)
    par = (-1.0) ** n_idx

    RE, IM = np.meshgrid(re_axis, im_axis)
    beta = (RE + 1j * IM).ravel()
    r = np.abs(beta)
    phi = np.angle(beta)

    chunk = max(16, int(6e7 / (16 * wdim * wdim)))
    out = np.empty(beta.size)
    if state.is_pure:
        psi = np.zeros(wdim, dtype=complex)
        psi[:dim] = state.data
        for s in range(0, beta.size, chunk):
            ph, rr = phi[s:s + chunk], r[s:s + chunk]
            U = psi[None, :] * np.exp(-1j * np.outer(ph, n_idx))
            C = U @ V.conj()
            C *= np.exp(-1j * rr[:, None] * lam[None, :])
            Z = C @ V.T
            out[s:s + chunk] = (np.abs(Z) ** 2) @ par
    else:
        # W is linear in rho: decompose once and reuse the pure-state path
        # per eigenvector. Tiny negative weights from ODE roundoff are kept
        # so the result stays exactly linear in the input matrix.
        w_r, U_r = np.linalg.eigh(state.rho)
        keep = np.abs(w_r) > 1e-14 * float(np.sum(np.abs(w_r)))
        w_r, U_r = w_r[keep], U_r[:, keep]
        n_kept = w_r.size
        psis = np.zeros((n_kept, wdim), dtype=complex)
        psis[:, :dim] = U_r.T
        chunk = max(16, int(6e7 / (16 * max(n_kept, 1) * wdim)))
        for s in range(0, beta.size, chunk):
            ph, rr = phi[s:s + chunk], r[s:s + chunk]
            c = ph.size
            phase = np.exp(-1j * np.outer(ph, n_idx))
            U = (psis[:, None, :] * phase[None, :, :]).reshape(-1, wdim)
            C = U @ V.conj()
            C = C.reshape(n_kept, c, wdim)
            C *= np.exp(-1j * rr[:, None] * lam[None, :])[None]
            Z = C.reshape(-1, wdim) @ V.T
            P = ((np.abs(Z) ** 2) @ par).reshape(n_kept, c)
            out[s:s + c] = w_r @ P
    W = (2.0 / math.pi) * out.reshape(IM.shape)
    return WignerGrid(re_axis, im_axis, W)


def wigner_point(state: QuantumState, beta: complex,
                 embed: bool | int = True) -> float:
    """W at a single beta (same displaced-parity trace as wigner_numeric)."""
    g = wigner_numeric(state, grid=([beta.real], [beta.imag]), embed=embed)
    return float(g.values[0, 0])


def wigner_thermal(n_th: float, beta) -> np.ndarray | float:
    """W of a thermal state: (2/pi) e^{-2|beta|^2/(1+2 n_th)} / (1+2 n_th)."""
    if n_th < 0:
        raise ValueError("n_th must be >= 0")
    b2 = np.abs(np.asarray(beta)) ** 2
    out = (2.0 / math.pi) / (1.0 + 2.0 * n_th) * np.exp(-2.0 * b2 / (1.0 + 2.0 * n_th))
    return out if out.ndim else float(out)


def wigner_fock(n: int, beta) -> np.ndarray | float:
    """W of Fock |n>: (-1)^n (2/pi) e^{-2|beta|^2} L_n(4|beta|^2)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    b2 = np.abs(np.asarray(beta)) ** 2
    out = (-1.0) ** n * (2.0 / math.pi) * np.exp(-2.0 * b2) * eval_laguerre(n, 4.0 * b2)
    return out if out.ndim else float(out)


def wigner_cat(alpha: complex, parity: int, beta) -> np.ndarray | float:
    """W of (|alpha> + parity|-alpha>)/sqrt(N), exactly normalized.

    The +/- 2 cos(4 Im(alpha* beta)) e^{-2|beta|^2} fringe term divides by
    pi (1 +/- e^{-2|alpha|^2}), keeping the integral exactly 1 at any alpha
    (the large-alpha form drops the overlap correction).
    """
    if parity not in (+1, -1):
        raise ValueError("parity must be +1 or -1")
    b = np.asarray(beta, dtype=complex)
    lobes = np.exp(-2.0 * np.abs(b - alpha) ** 2) + np.exp(-2.0 * np.abs(b + alpha) ** 2)
    fringe = 2.0 * np.cos(4.0 * np.imag(np.conj(alpha) * b)) * np.exp(-2.0 * np.abs(b) ** 2)
    norm = math.pi * (1.0 + parity * math.exp(-2.0 * abs(alpha) ** 2))
    if norm < 1e-300:
        raise ValueError("odd cat undefined at alpha = 0")
    out = (lobes + parity * fringe) / norm
    return out if out.ndim else float(out)


def fringe_calibration(dV_alpha: float, dV_I: float) -> float:
    """Voltage-to-amplitude scale mu = sqrt(pi / (dV_alpha dV_I)).

    dV_alpha is the measured lobe separation (2 alpha / mu) and dV_I the
    fringe period (pi / (2 alpha mu)); the product eliminates alpha.
    """
    if dV_alpha <= 0 or dV_I <= 0:
        raise ValueError("voltage scales must be positive")
    return math.sqrt(math.pi / (dV_alpha * dV_I))


def fringe_period(grid: WignerGrid, min_crossings: int = 4) -> float:
    """Fringe period along Im(beta) on the Re(beta) = 0 cut.

    Zero crossings of the cut are located by linear interpolation, gated on
    local fringe amplitude so truncation noise in the far tail is ignored;
    the period is twice the median crossing spacing.
    """
    j0 = int(np.argmin(np.abs(grid.re_axis)))
    w = grid.values[:, j0]
    y = grid.im_axis
    wmax = np.max(np.abs(w))
    if wmax == 0:
        raise NoOscillation("flat cut: no fringes")
    k = 5
    amp = np.array([np.max(np.abs(w[max(0, i - k):i + k + 1])) for i in range(len(w))])
    crossings = []
    for i in range(len(w) - 1):
        if w[i] == 0.0:
            continue
        if w[i] * w[i + 1] < 0 and amp[i] > 1e-3 * wmax:
            t = w[i] / (w[i] - w[i + 1])
            crossings.append(y[i] + t * (y[i + 1] - y[i]))
    if len(crossings) < min_crossings:
        raise NoOscillation(
            f"only {len(crossings)} usable zero crossings on the central cut"
        )
    spacing = np.diff(crossings)
    return 2.0 * float(np.median(spacing))


def photon_number_from_grid(grid: WignerGrid) -> float:
    """Mean photon number from the moment integral of W |beta|^2 minus 1/2.

    Emits CoverageWarning when boundary |W| exceeds 1e-4 of the peak (grid
    too small for the 5-sigma rule, moment integral untrustworthy).
    """
    boundary = max(
        float(np.max(np.abs(grid.values[0, :]))),
        float(np.max(np.abs(grid.values[-1, :]))),
        float(np.max(np.abs(grid.values[:, 0]))),
        float(np.max(np.abs(grid.values[:, -1]))),
    )
    peak = float(np.max(np.abs(grid.values)))
    if peak > 0 and boundary > 1e-4 * peak:
        warnings.warn(
            f"boundary |W| = {boundary:.2e} > 1e-4 peak: grid may not cover "
            "the state", CoverageWarning)
    RE, IM = np.meshgrid(grid.re_axis, grid.im_axis)
    integrand = grid.values * (RE**2 + IM**2)
    inner = np.trapezoid(integrand, grid.re_axis, axis=1)
    return float(np.trapezoid(inner, grid.im_axis)) - 0.5


def parity_point(state: QuantumState) -> float:
    """W(0) = (2/pi) Tr(rho P), the measured parity in Wigner units."""
    if len(state.space) != 1:
        raise ValueError("parity_point takes a single-mode state")
    rho = state.rho
    par = (-1.0) ** np.arange(rho.shape[0])
    return float((2.0 / math.pi) * np.real(np.sum(np.diag(rho) * par)))
