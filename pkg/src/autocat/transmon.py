"""Charge-basis transmon and the coupled transmon-memory-readout spectrum.

The tomography transmon is diagonalized exactly in the charge basis
|-N..N>, where 4*E_C*(n - n_g)^2 is diagonal and -E_J*cos(theta) is a pair
of shift matrices. The coupled model adds the memory and readout oscillators

    H/h = eps_t + w_m m'm + w_c c'c + g_mt sin(theta) (m + m')
          - i g_ct n_t (c - c')

(primes denote daggers) with the transmon projected onto its lowest
eigenlevels. Eigenstates are labeled by maximum overlap with bare product
states; overlap collisions near hybridization points are surfaced as
LabelAmbiguity rather than silently reassigned.

Units contract: transmon energies enter as E/h in GHz; oscillator
frequencies and couplings are angular (rad/s); spectra are returned in GHz
and frequency shifts in rad/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConvergenceError, DimensionCap, LabelAmbiguity

__all__ = [
    "TransmonParams",
    "CoupledSpec",
    "CoupledLevels",
    "NearestResonance",
    "transmon_spectrum",
    "coupled_spectrum",
    "memory_shift",
    "memory_lamb_shift",
    "nearest_resonance",
    "shift_table",
    "coupling_sweep",
    "SHIFT_COLUMNS",
]

TWO_PI = 2.0 * math.pi
GHZ = TWO_PI * 1e9

SHIFT_COLUMNS = ("n_photons", "transmon_level", "shift_MHz", "label_confidence")


@dataclass(frozen=True)
class TransmonParams:
    """Transmon energies (E/h in GHz), offset charge, charge-basis cutoff."""

    E_C: float
    E_J: float
    n_g: float = 0.0
    charge_cutoff: int = 20

    def __post_init__(self) -> None:
        if self.E_C <= 0:
            raise ValueError("E_C must be positive")
        if self.E_J < 0:
            raise ValueError("E_J must be nonnegative")
        if self.charge_cutoff < 10:
            raise ValueError("charge_cutoff must be >= 10")


def _charge_hamiltonian(params: TransmonParams, cutoff: int) -> np.ndarray:
    n = np.arange(-cutoff, cutoff + 1, dtype=float)
    H = np.diag(4.0 * params.E_C * (n - params.n_g) ** 2)
    hop = np.full(2 * cutoff, -params.E_J / 2.0)
    H += np.diag(hop, 1) + np.diag(hop, -1)
    return H


def _sin_theta(cutoff: int) -> np.ndarray:
    # e^{i theta} raises the charge by one in this basis
    dim = 2 * cutoff + 1
    return (np.eye(dim, k=1) - np.eye(dim, k=-1)) / 2j


def transmon_spectrum(params: TransmonParams, n_levels: int = 12) -> np.ndarray:
    """Lowest n_levels eigenenergies in GHz, sorted ascending.

    The charge cutoff is validated by recomputing at cutoff+5; if any kept
    level moves by more than 1 kHz the basis is too small and
    ConvergenceError is raised.
    """
    if n_levels < 2:
        raise ValueError("n_levels must be >= 2")
    if n_levels > 2 * params.charge_cutoff + 1:
        raise ValueError("n_levels exceeds charge basis size")
    levels = np.linalg.eigvalsh(_charge_hamiltonian(params, params.charge_cutoff))
    check = np.linalg.eigvalsh(_charge_hamiltonian(params, params.charge_cutoff + 5))
    drift = np.max(np.abs(levels[:n_levels] - check[:n_levels]))
    if drift > 1e-6:
        raise ConvergenceError(
            f"charge cutoff {params.charge_cutoff} not converged: top kept "
            f"level moves {drift * 1e6:.3g} kHz on cutoff+5"
        )
    return levels[:n_levels]


def _projected_ops(params: TransmonParams, n_levels: int):
    """Transmon eigenenergies (GHz) plus sin(theta) and n_t in the kept
    eigenbasis."""
    if n_levels > 2 * params.charge_cutoff + 1:
        raise ValueError("n_levels exceeds charge basis size")
    H = _charge_hamiltonian(params, params.charge_cutoff)
    evals, evecs = np.linalg.eigh(H)
    check = np.linalg.eigvalsh(_charge_hamiltonian(params, params.charge_cutoff + 5))
    drift = np.max(np.abs(evals[:n_levels] - check[:n_levels]))
    if drift > 1e-6:
        raise ConvergenceError(
            f"charge cutoff {params.charge_cutoff} not converged: top kept "
            f"level moves {drift * 1e6:.3g} kHz on cutoff+5"
        )
    W = evecs[:, :n_levels]
    cutoff = params.charge_cutoff
    n_op = np.diag(np.arange(-cutoff, cutoff + 1, dtype=float))
    sin_t = W.conj().T @ _sin_theta(cutoff) @ W
    n_t = W.conj().T @ n_op @ W
    return evals[:n_levels], sin_t, n_t


@dataclass(frozen=True)
class CoupledSpec:
    """Transmon coupled to the memory and readout oscillators.

    omega_m, omega_c, g_mt, g_ct are angular (rad/s). fock_dims is
    (memory, readout); the readout is a spectator and defaults to 3 levels.
    """

    transmon: TransmonParams
    omega_m: float
    omega_c: float
    g_mt: float
    g_ct: float
    fock_dims: tuple[int, int] = (6, 3)
    n_transmon_levels: int = 12
    dim_cap: int = 6000

    def __post_init__(self) -> None:
        if self.fock_dims[0] < 2 or self.fock_dims[1] < 2:
            raise ValueError("fock_dims must each be >= 2")
        if self.g_mt < 0 or self.g_ct < 0:
            raise ValueError("couplings must be real and >= 0")

    @property
    def dim(self) -> int:
        return self.fock_dims[0] * self.fock_dims[1] * self.n_transmon_levels


def _coupled_hamiltonian(spec: CoupledSpec) -> np.ndarray:
    """Dense coupled Hamiltonian in GHz, product order (memory, readout,
    transmon)."""
    if spec.dim > spec.dim_cap:
        raise DimensionCap(
            f"coupled dimension {spec.dim} exceeds cap {spec.dim_cap}"
        )
    N_m, N_c = spec.fock_dims
    eps, sin_t, n_t = _projected_ops(spec.transmon, spec.n_transmon_levels)

    a_m = np.diag(np.sqrt(np.arange(1, N_m, dtype=float)), 1)
    a_c = np.diag(np.sqrt(np.arange(1, N_c, dtype=float)), 1)
    I_m = np.eye(N_m)
    I_c = np.eye(N_c)
    I_t = np.eye(spec.n_transmon_levels)

    num_m = a_m.conj().T @ a_m
    num_c = a_c.conj().T @ a_c

    def kron3(A, B, C):
        return np.kron(np.kron(A, B), C)

    H = kron3(num_m, I_c, I_t) * (spec.omega_m / GHZ)
    H = H + kron3(I_m, num_c, I_t) * (spec.omega_c / GHZ)
    H = H + kron3(I_m, I_c, np.diag(eps)).astype(complex)
    H = H + (spec.g_mt / GHZ) * kron3(a_m + a_m.conj().T, I_c, sin_t)
    H = H + (spec.g_ct / GHZ) * kron3(I_m, -1j * (a_c - a_c.conj().T), n_t)
    return (H + H.conj().T) / 2.0


def _decode(index: int, spec: CoupledSpec) -> tuple[int, int, int]:
    n_lev = spec.n_transmon_levels
    N_c = spec.fock_dims[1]
    i = index % n_lev
    n_c = (index // n_lev) % N_c
    n_m = index // (n_lev * N_c)
    return (i, n_m, n_c)


@dataclass(frozen=True)
class CoupledLevels:
    """Sorted coupled eigenenergies (GHz) with maximum-overlap labels.

    labels[k] = (transmon level, memory Fock, readout Fock) claimed by
    eigenstate k; confidence[k] is the squared overlap with that product
    state. Labels claimed by several eigenstates are recorded in
    collisions and poison lookups through energy().
    """

    energies: np.ndarray
    labels: tuple[tuple[int, int, int], ...]
    confidence: np.ndarray
    spec: CoupledSpec
    collisions: frozenset = field(default_factory=frozenset)

    def energy(self, transmon: int, memory: int, readout: int = 0) -> float:
        """Energy (GHz) of the eigenstate labeled (transmon, memory,
        readout)."""
        want = (transmon, memory, readout)
        if want in self.collisions:
            raise LabelAmbiguity(
                f"label {want} claimed by multiple eigenstates (hybridized)"
            )
        try:
            k = self.labels.index(want)
        except ValueError:
            raise LabelAmbiguity(f"no eigenstate labeled {want}") from None
        return float(self.energies[k])

    def label_confidence(self, transmon: int, memory: int,
                         readout: int = 0) -> float:
        want = (transmon, memory, readout)
        if want in self.collisions:
            return 0.0
        try:
            k = self.labels.index(want)
        except ValueError:
            return 0.0
        return float(self.confidence[k])


def coupled_spectrum(spec: CoupledSpec) -> CoupledLevels:
    """Diagonalize the coupled model and label eigenstates by maximum
    overlap with bare product states."""
    H = _coupled_hamiltonian(spec)
    evals, evecs = np.linalg.eigh(H)
    weight = np.abs(evecs) ** 2
    claims = np.argmax(weight, axis=0)
    conf = weight[claims, np.arange(len(evals))]
    labels = tuple(_decode(int(p), spec) for p in claims)
    seen: dict[tuple[int, int, int], int] = {}
    collided = set()
    for lab in labels:
        seen[lab] = seen.get(lab, 0) + 1
        if seen[lab] > 1:
            collided.add(lab)
    return CoupledLevels(
        energies=evals,
        labels=labels,
        confidence=conf,
        spec=spec,
        collisions=frozenset(collided),
    )


def memory_shift(spec: CoupledSpec, transmon_level: int, photons: int,
                 levels: CoupledLevels | None = None) -> float:
    """Memory frequency shift (rad/s) for a given transmon level and
    photon number.

    The shift is the (photons -> photons+1) transition frequency minus the
    dressed memory frequency in the transmon ground state, E(0,1) - E(0,0),
    so the ground-state reference vanishes by construction. Requires
    resolvable labels at (level, photons) and (level, photons+1).
    """
    if levels is None:
        levels = coupled_spectrum(spec)
    if photons + 1 >= spec.fock_dims[0]:
        raise ValueError("photons + 1 exceeds the memory Fock dimension")
    up = levels.energy(transmon_level, photons + 1)
    dn = levels.energy(transmon_level, photons)
    ref = levels.energy(0, 1) - levels.energy(0, 0)
    return ((up - dn) - ref) * GHZ


def memory_lamb_shift(spec: CoupledSpec,
                      levels: CoupledLevels | None = None) -> float:
    """Dressed minus bare memory frequency (rad/s) with the transmon in its
    ground state; second order in g_mt."""
    if levels is None:
        levels = coupled_spectrum(spec)
    dressed = levels.energy(0, 1) - levels.energy(0, 0)
    return dressed * GHZ - spec.omega_m


class NearestResonance(NamedTuple):
    lower: int
    upper: int
    spacing: float
    detuning: float


def nearest_resonance(params: TransmonParams, omega_m: float,
                      n_levels: int = 12) -> NearestResonance:
    """Transmon transition i -> i+1 whose spacing is closest to the memory
    frequency. spacing and detuning are in GHz."""
    levels = transmon_spectrum(params, n_levels)
    spacings = np.diff(levels)
    f_m = omega_m / GHZ
    k = int(np.argmin(np.abs(spacings - f_m)))
    return NearestResonance(k, k + 1, float(spacings[k]),
                            float(spacings[k] - f_m))


def shift_table(spec: CoupledSpec, transmon_levels: Sequence[int],
                max_photons: int) -> list[tuple[int, int, float, float]]:
    """Rows (n_photons, transmon_level, shift_MHz, label_confidence) for
    every requested level and photon number.

    Unresolvable labels yield NaN shifts with confidence 0 instead of
    raising, mirroring how tracked spectra expose their mistracking
    artifacts.
    """
    if max_photons + 1 >= spec.fock_dims[0]:
        raise ValueError("max_photons + 1 exceeds the memory Fock dimension")
    levels = coupled_spectrum(spec)
    rows = []
    for i in transmon_levels:
        for n in range(max_photons + 1):
            conf = min(levels.label_confidence(i, n),
                       levels.label_confidence(i, n + 1))
            try:
                shift = memory_shift(spec, i, n, levels=levels)
            except LabelAmbiguity:
                shift = math.nan
                conf = 0.0
            rows.append((n, i, shift / (TWO_PI * 1e6), conf))
    return rows


def coupling_sweep(spec: CoupledSpec,
                   g_mt_values: Sequence[float]) -> np.ndarray:
    """Eigenenergies (GHz) tracked along a g_mt sweep by adiabatic
    continuation.

    Row j holds the tracked energies at g_mt_values[j]; column identity is
    fixed by maximum overlap with the previous sweep point (product-state
    order at the first point). Output shape (len(g_mt_values), dim).
    """
    from dataclasses import replace

    prev_vecs = None
    out = np.empty((len(g_mt_values), spec.dim))
    for j, g in enumerate(g_mt_values):
        H = _coupled_hamiltonian(replace(spec, g_mt=float(g)))
        evals, evecs = np.linalg.eigh(H)
        if prev_vecs is None:
            # product-state order at the sweep start; unclaimed slots keep
            # energy order so a collision degrades instead of crashing
            claims = np.argmax(np.abs(evecs) ** 2, axis=0)
            track = np.arange(len(evals))
            track[claims] = np.arange(len(evals))
        else:
            overlap = np.abs(prev_vecs.conj().T @ evecs) ** 2
            track = np.argmax(overlap, axis=1)
        out[j] = evals[track]
        prev_vecs = evecs[:, track]
    return out
