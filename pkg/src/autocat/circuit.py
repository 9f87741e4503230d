"""Flux-biased three-junction ring: equilibrium phases, eigenmodes, rates.

The ring holds two main junctions (energy E_J each) and a weaker one (E_W =
beta_J * E_J) closing the loop. Threading an external flux phi_ext (in phi0
units) sets equilibrium phase drops (phi_J_bar across each main junction,
phi_W_bar across the weak one) that obey current conservation

    phi_J_bar = arcsin(beta_J * sin(phi_W_bar))

together with the loop constraint

    phi_W_bar + 2*arcsin(beta_J * sin(phi_W_bar)) = 2*pi*phi_ext.

Effective junction energies E_J_eff = E_J cos(phi_J_bar) and E_W_eff =
E_W cos(phi_W_bar) then fix the common (memory) and differential (buffer)
eigenmodes and all nonlinear rates.

Units contract: junction/charging energies enter as E/h in GHz (the paper
convention); all output frequencies and rates are angular (rad/s); flux is in
phi0 units on every public surface, radians only internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .errors import ConvergenceError, MultiValuedFlux, NoCrossing, NoSweetSpot

__all__ = [
    "RingParams",
    "EquilibriumPhases",
    "ModeParams",
    "solve_equilibrium",
    "enumerate_branches",
    "sweet_spot",
    "mode_params",
    "g2_sweet_approx",
    "g2_approximation_gap",
    "potential_surface",
    "flux_match_table",
    "flux_match_ring",
    "sweep_rows",
    "SWEEP_COLUMNS",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class RingParams:
    """Ring energies (E/h in GHz) and flux bias (phi0 units)."""

    E_J: float
    E_W: float
    E_C: float
    phi_ext: float

    def __post_init__(self) -> None:
        if self.E_J <= 0 or self.E_W <= 0 or self.E_C <= 0:
            raise ValueError("all energies must be positive")

    @property
    def beta_J(self) -> float:
        return self.E_W / self.E_J


@dataclass(frozen=True)
class EquilibriumPhases:
    """Equilibrium phase drops (rad) and effective energies (E/h in GHz)."""

    phi_J_bar: float
    phi_W_bar: float
    E_J_eff: float
    E_W_eff: float
    # provenance carried along for downstream rate formulas
    E_J: float
    E_W: float
    phi_ext: float
    stable: bool = True

    @property
    def potential_min(self) -> float:
        """Classical potential at the equilibrium point, in GHz*h."""
        return -(2.0 * self.E_J_eff + self.E_W_eff)


def _loop_phase(w: float, beta_J: float) -> float:
    return w + 2.0 * math.asin(beta_J * math.sin(w))


def _bisect(f: Callable[[float], float], lo: float, hi: float,
            tol: float = 1e-14, max_iter: int = 200) -> float:
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise ConvergenceError("bisection bracket does not straddle a root")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0 or (hi - lo) < tol:
            return mid
        if flo * fm < 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def _principal(rad: float) -> float:
    """Map an angle into (-pi, pi]."""
    out = math.fmod(rad + math.pi, TWO_PI)
    if out <= 0:
        out += TWO_PI
    return out - math.pi


def _equilibrium_from_w(params: RingParams, w: float, stable: bool = True
                        ) -> EquilibriumPhases:
    pj = math.asin(params.beta_J * math.sin(w))
    return EquilibriumPhases(
        phi_J_bar=pj,
        phi_W_bar=w,
        E_J_eff=params.E_J * math.cos(pj),
        E_W_eff=params.E_W * math.cos(w),
        E_J=params.E_J,
        E_W=params.E_W,
        phi_ext=params.phi_ext,
        stable=stable,
    )


def solve_equilibrium(params: RingParams) -> EquilibriumPhases:
    """Solve the loop constraint on the single-valued branch (beta_J < 1/2).

    Bisection on phi_W_bar in (-pi, pi]; residual below 1e-12 rad.
    """
    if params.beta_J >= 0.5:
        raise MultiValuedFlux(
            f"beta_J={params.beta_J:.3f} >= 1/2: flux equation is multi-valued, "
            "use enumerate_branches"
        )
    target = _principal(TWO_PI * params.phi_ext)
    f = lambda w: _loop_phase(w, params.beta_J) - target
    w = _bisect(f, -math.pi, math.pi)
    if abs(f(w)) > 1e-12:
        raise ConvergenceError(f"flux equation residual {abs(f(w)):.2e} > 1e-12")
    return _equilibrium_from_w(params, w)


def enumerate_branches(params: RingParams, phi_ext: float | None = None,
                       scan_points: int = 4001) -> list[EquilibriumPhases]:
    """All solutions of the loop constraint on phi_W_bar in (-pi, pi].

    Each branch is tagged stable/unstable by the sign of d(loop phase)/d(phi_W)
    and the list is sorted by classical potential energy (lowest first).
    """
    if phi_ext is None:
        phi_ext = params.phi_ext
    p = replace(params, phi_ext=phi_ext)
    base = _principal(TWO_PI * phi_ext)
    ws = np.linspace(-math.pi, math.pi, scan_points)
    lp = np.array([_loop_phase(w, p.beta_J) for w in ws])
    roots: list[float] = []
    # the constraint holds mod 2*pi and |loop phase| can reach 2*pi, so
    # scan the shifted targets base + 2*pi*k as well
    for k in (-1, 0, 1):
        target = base + TWO_PI * k
        f = lambda w: _loop_phase(w, p.beta_J) - target
        vals = lp - target
        for i in range(len(ws) - 1):
            if vals[i] == 0.0:
                roots.append(float(ws[i]))
            elif vals[i] * vals[i + 1] < 0:
                roots.append(_bisect(f, float(ws[i]), float(ws[i + 1])))
        if vals[-1] == 0.0:
            roots.append(float(ws[-1]))
    # deduplicate roots that landed on shared scan nodes or the seam at +/-pi
    uniq: list[float] = []
    for r in sorted(roots):
        if not uniq or abs(r - uniq[-1]) > 1e-9:
            uniq.append(r)
    if len(uniq) > 1 and abs((uniq[-1] - uniq[0]) - TWO_PI) < 1e-9:
        uniq.pop()

    def slope(w: float) -> float:
        s = p.beta_J * math.sin(w)
        return 1.0 + 2.0 * p.beta_J * math.cos(w) / math.sqrt(max(1.0 - s * s, 1e-300))

    branches = [_equilibrium_from_w(p, w, stable=slope(w) > 0) for w in uniq]
    return sorted(branches, key=lambda b: b.potential_min)


def sweet_spot(beta_J: float) -> float:
    """Flux (phi0 units) where d(omega_m)/d(phi_ext) vanishes.

    Exists only for 0 < beta_J < 1/sqrt(2):
    phi_ext(sweet) = (pi/2 + 2*arcsin(beta_J)) / (2*pi).
    """
    if not 0.0 < beta_J < 1.0 / math.sqrt(2.0):
        raise NoSweetSpot(
            f"beta_J={beta_J:.4f} outside (0, 1/sqrt(2)): no sweet spot"
        )
    return (math.pi / 2.0 + 2.0 * math.asin(beta_J)) / TWO_PI


@dataclass(frozen=True)
class ModeParams:
    """Eigenmode frequencies, phase zpf, and nonlinear rates (all rad/s)."""

    omega_m: float
    omega_b: float
    zpf_m: float
    zpf_b: float
    g2: float
    chi_mm: float
    chi_bb: float
    chi_mb: float


def mode_params(eq: EquilibriumPhases, E_C: float, *,
                zpf_m: float | None = None, zpf_b: float | None = None,
                omega_m: float | None = None, omega_b: float | None = None
                ) -> ModeParams:
    """Eigenmodes and nonlinear rates from the equilibrium configuration.

    E_L,m = 2*E_J_eff, E_L,b = 2*E_J_eff + 4*E_W_eff; omega = sqrt(4 E_C E_L)
    and zpf = (E_C/E_L)^(1/4). The stub-loaded network of the physical device
    is not modeled: pass the spectroscopy-fitted zpf/omega as overrides and
    they replace the bare-ring values in every downstream rate.

    g2 = (E_J/hbar) sin(phi_J_bar) zpf_b zpf_m^2               (3rd order)
    chi_mm = (E_J_eff/hbar) zpf_m^4                             (4th order)
    chi_bb = ((E_J_eff + 8 E_W_eff)/hbar) zpf_b^4
    chi_mb = (2 E_J_eff/hbar) zpf_m^2 zpf_b^2
    """
    EL_m = 2.0 * eq.E_J_eff
    EL_b = 2.0 * eq.E_J_eff + 4.0 * eq.E_W_eff
    w_m = omega_m if omega_m is not None else TWO_PI * 2.0 * math.sqrt(E_C * EL_m) * 1e9
    w_b = omega_b if omega_b is not None else TWO_PI * 2.0 * math.sqrt(E_C * EL_b) * 1e9
    z_m = zpf_m if zpf_m is not None else (E_C / EL_m) ** 0.25
    z_b = zpf_b if zpf_b is not None else (E_C / EL_b) ** 0.25
    g2 = TWO_PI * eq.E_J * 1e9 * math.sin(eq.phi_J_bar) * z_b * z_m**2
    chi_mm = TWO_PI * eq.E_J_eff * 1e9 * z_m**4
    chi_bb = TWO_PI * (eq.E_J_eff + 8.0 * eq.E_W_eff) * 1e9 * z_b**4
    chi_mb = TWO_PI * 2.0 * eq.E_J_eff * 1e9 * z_m**2 * z_b**2
    return ModeParams(w_m, w_b, z_m, z_b, g2, chi_mm, chi_bb, chi_mb)


def g2_sweet_approx(E_W: float, zpf_m: float, zpf_b: float,
                    delta_phi_ext: float = 0.0) -> float:
    """Sweet-spot approximation (E_W/hbar)(1 - dphi^2/2) zpf_m^2 zpf_b, rad/s.

    E_W is E/h in GHz, delta_phi_ext the flux offset from the sweet spot in
    radians. Valid for |delta_phi_ext| << 1.
    """
    return TWO_PI * E_W * 1e9 * (1.0 - delta_phi_ext**2 / 2.0) * zpf_m**2 * zpf_b


def g2_approximation_gap(eq: EquilibriumPhases, E_C: float, *,
                         zpf_m: float | None = None, zpf_b: float | None = None
                         ) -> tuple[float, float, float]:
    """(g2_exact, g2_approx, relative gap) between the two published forms.

    The exact form keeps E_J sin(phi_J_bar); the approximation substitutes
    the sweet-spot expansion. Off the sweet spot they disagree; the gap is
    reported, not reconciled.
    """
    mp = mode_params(eq, E_C, zpf_m=zpf_m, zpf_b=zpf_b)
    spot = sweet_spot(eq.E_W / eq.E_J)
    delta = TWO_PI * (eq.phi_ext - spot)
    approx = g2_sweet_approx(eq.E_W, mp.zpf_m, mp.zpf_b, delta)
    gap = abs(approx - mp.g2) / abs(mp.g2)
    return mp.g2, approx, gap


def potential_surface(params: RingParams, phi_m: np.ndarray, phi_b: np.ndarray
                      ) -> np.ndarray:
    """U(phi_m, phi_b)/h in GHz over the grid, offset so the minimum is 0.

    U = -2 E_J cos(phi_m) cos(phi_b + phi_J_bar) - E_W cos(2 phi_b - phi_W_bar)
    with shape (len(phi_b), len(phi_m)).
    """
    eq = solve_equilibrium(params)
    pm = np.asarray(phi_m)[None, :]
    pb = np.asarray(phi_b)[:, None]
    U = (-2.0 * params.E_J * np.cos(pm) * np.cos(pb + eq.phi_J_bar)
         - params.E_W * np.cos(2.0 * pb - eq.phi_W_bar))
    return U - U.min()


def flux_match_table(phi: Sequence[float], omega_m: Sequence[float],
                     omega_b: Sequence[float], tol: float = 1e-6) -> float:
    """Flux (phi0) where omega_b(phi) = 2*omega_m(phi) from tabulated data.

    Bisection on the linear interpolant of omega_b - 2*omega_m; raises
    NoCrossing when the table has no sign change.
    """
    phi = np.asarray(phi, dtype=float)
    gap = np.asarray(omega_b, dtype=float) - 2.0 * np.asarray(omega_m, dtype=float)
    if len(phi) < 2:
        raise NoCrossing("need at least two tabulated points")
    sign_change = np.nonzero(gap[:-1] * gap[1:] <= 0)[0]
    exact = np.nonzero(gap == 0)[0]
    if exact.size:
        return float(phi[exact[0]])
    if not sign_change.size:
        raise NoCrossing("omega_b - 2*omega_m does not change sign on the table")
    i = int(sign_change[0])
    f = lambda x: float(np.interp(x, phi, gap))
    return _bisect(f, float(phi[i]), float(phi[i + 1]), tol=tol)


def flux_match_ring(params: RingParams, phi_lo: float, phi_hi: float,
                    n: int = 201) -> float:
    """Frequency-matching flux for the bare ring model.

    The bare dispersion obeys omega_b/omega_m = sqrt(1 + 2 E_W_eff/E_J_eff)
    < sqrt(3), so omega_b = 2*omega_m cannot be met while E_W < E_J: expect
    NoCrossing for physical parameters. The stub-loaded device reaches the
    condition through its linear network, which is not modeled here; use
    flux_match_table with measured or fitted dispersion data instead.
    """
    phis = np.linspace(phi_lo, phi_hi, n)
    om_m, om_b = [], []
    for f in phis:
        eq = solve_equilibrium(replace(params, phi_ext=f))
        mp = mode_params(eq, params.E_C)
        om_m.append(mp.omega_m)
        om_b.append(mp.omega_b)
    return flux_match_table(phis, om_m, om_b)


SWEEP_COLUMNS = (
    "phi_ext[phi0]", "phi_J_bar[rad]", "phi_W_bar[rad]",
    "EJ_eff[GHz]", "EW_eff[GHz]", "omega_m[GHz]", "omega_b[GHz]",
    "g2[MHz]", "chi_mm[kHz]", "chi_bb[MHz]", "chi_mb[MHz]",
)


def sweep_rows(params: RingParams, phis: Sequence[float], *,
               zpf_m: float | None = None, zpf_b: float | None = None
               ) -> list[tuple[float, ...]]:
    """Flux sweep serialized per the CSV column contract (SWEEP_COLUMNS)."""
    rows = []
    for f in phis:
        eq = solve_equilibrium(replace(params, phi_ext=float(f)))
        mp = mode_params(eq, params.E_C, zpf_m=zpf_m, zpf_b=zpf_b)
        rows.append((
            float(f), eq.phi_J_bar, eq.phi_W_bar, eq.E_J_eff, eq.E_W_eff,
            mp.omega_m / TWO_PI / 1e9, mp.omega_b / TWO_PI / 1e9,
            mp.g2 / TWO_PI / 1e6, mp.chi_mm / TWO_PI / 1e3,
            mp.chi_bb / TWO_PI / 1e6, mp.chi_mb / TWO_PI / 1e6,
        ))
    return rows
