"""Lindblad dynamics of the driven memory-buffer system.

The rotating-frame master equation is

    d rho/dt = -i[H, rho] + sum_c D[C_c] rho,
    H = Delta_m m+m + Delta_b b+b - (chi_mm/2) m+2 m2 - (chi_bb/2) b+2 b2
        - chi_mb m+m b+b + g2 m2 b+ + g2* m+2 b - eps_d b+ - eps_d* b
        + eps_Z e^{i theta_z} m+ + eps_Z* e^{-i theta_z} m,
    C in {sqrt(k1) m, sqrt(kphi_m) m+m, sqrt(kb) b, sqrt(kphi_b) b+b},

with eps_d = alpha^2 g2 setting the stabilized amplitude. Everything is kept
in angular units (rad/s) and seconds.

Superoperators use row-major vectorization, vec(A rho B) = (A kron B^T) vec(rho).
With eps_Z = 0 every term above is parity-definite under conjugation by the
memory parity P_m (m2 b+ changes n_m by 2), so S = (P_m kron P_m^T) commutes
with the Liouvillian and the spectrum splits into S = +1 (populations, even
coherences) and S = -1 (odd coherences, where the cat's logical-Z coherence
|C+><C-| lives) sectors.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .circuit import ModeParams
from .errors import (
    AdiabaticityWarning,
    DegenerateNull,
    EigenFailure,
    SpaceMismatch,
    StepFailure,
    TraceDriftWarning,
    TruncationError,
)
from .fock import (
    ModeSpace,
    Operator,
    QuantumState,
    adequate_dim,
    annihilation,
    identity,
    tensor,
)

__all__ = [
    "Envelope",
    "DriveSpec",
    "RateSet",
    "LindbladModel",
    "build_two_mode_model",
    "adiabatic_model",
    "add_z_drive",
    "liouvillian",
    "evolve",
    "steady_state",
    "slowest_decay",
    "liouvillian_spectrum",
    "expectation",
    "memory_parity_sign",
]

BUFFER_DEPHASING_RATIO = 60.0  # flux-noise scaling of kappa_phi_b/kappa_phi_m


@dataclass(frozen=True)
class Envelope:
    """Scalar drive envelope: constant, square(T), or gaussian(T, w=T/6)."""

    kind: str
    T: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("constant", "square", "gaussian"):
            raise ValueError(f"unknown envelope kind {self.kind!r}")
        if self.kind != "constant" and self.T <= 0:
            raise ValueError("time-limited envelope needs T > 0")

    @classmethod
    def constant(cls) -> "Envelope":
        return cls("constant")

    @classmethod
    def square(cls, T: float) -> "Envelope":
        return cls("square", T)

    @classmethod
    def gaussian(cls, T: float) -> "Envelope":
        return cls("gaussian", T)

    @property
    def width(self) -> float:
        return self.T / 6.0

    def __call__(self, t: float) -> float:
        if self.kind == "constant":
            return 1.0
        if self.kind == "square":
            return 1.0 if 0.0 <= t <= self.T else 0.0
        w = self.width
        # area-normalized so the integral equals T, like the square pulse
        return (6.0 / math.sqrt(2.0 * math.pi)) * math.exp(
            -((t - self.T / 2.0) ** 2) / (2.0 * w * w))


@dataclass(frozen=True)
class DriveSpec:
    """Drives and detunings of the rotating-frame model (rad/s)."""

    epsilon_d: complex = 0j
    epsilon_Z: complex = 0j
    theta_z: float = 0.0
    envelope: Envelope = field(default_factory=Envelope.constant)
    Delta_m: float = 0.0
    Delta_b: float = 0.0


@dataclass(frozen=True)
class RateSet:
    """Loss and dephasing rates (rad/s). kappa_phi_b defaults to the
    flux-noise scaling 60 x kappa_phi_m when not given."""

    kappa_1: float = 0.0
    kappa_b: float = 0.0
    kappa_phi_m: float = 0.0
    kappa_phi_b: float | None = None

    def __post_init__(self) -> None:
        if self.kappa_phi_b is None:
            object.__setattr__(
                self, "kappa_phi_b", BUFFER_DEPHASING_RATIO * self.kappa_phi_m)
        for name in ("kappa_1", "kappa_b", "kappa_phi_m", "kappa_phi_b"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True, eq=False)
class LindbladModel:
    """Static Hamiltonian, time-modulated terms, and collapse operators.

    collapse operators carry their sqrt(rate) scaling; H_time entries are
    (Operator, scalar coefficient function of t) pairs added to H_static.
    """

    space: tuple[ModeSpace, ...]
    H_static: Operator
    H_time: tuple[tuple[Operator, Callable[[float], float]], ...]
    collapse_ops: tuple[Operator, ...]
    alpha_target: complex = 0j

    def __post_init__(self) -> None:
        ops = [self.H_static] + [o for o, _ in self.H_time] + list(self.collapse_ops)
        for op in ops:
            if op.space != self.space:
                raise SpaceMismatch("model operators live on different spaces")

    @property
    def is_time_independent(self) -> bool:
        return len(self.H_time) == 0

    @property
    def dim(self) -> int:
        return self.H_static.matrix.shape[0]


def _hermitize(space, mat: np.ndarray) -> Operator:
    return Operator(space, (mat + mat.conj().T) / 2.0, hermitian=True)


def build_two_mode_model(modes: ModeParams, rates: RateSet, drive: DriveSpec,
                         dims: tuple[int, int]) -> LindbladModel:
    """Bipartite memory-buffer model of the stabilization master equation.

    dims = (N_m, N_b), memory first in every tensor product. N_m must be
    adequate for the stabilized amplitude |alpha| = sqrt(|eps_d / g2|) and
    N_b >= 6. The Z drive eps_Z e^{i theta_z} m+ + h.c. is modulated by
    drive.envelope; all other terms are static.
    """
    N_m, N_b = dims
    if N_b < 6:
        raise TruncationError("buffer truncation N_b must be >= 6")
    g2 = modes.g2
    if g2 != 0:
        alpha_target = complex(np.sqrt(complex(drive.epsilon_d) / g2))
    else:
        alpha_target = 0j
    if N_m < adequate_dim(alpha_target):
        raise TruncationError(
            f"N_m={N_m} below adequacy {adequate_dim(alpha_target)} for "
            f"|alpha|={abs(alpha_target):.2f}")
    sm, sb = ModeSpace(N_m), ModeSpace(N_b)
    space = (sm, sb)
    m = tensor([annihilation(sm), identity(sb)]).matrix
    b = tensor([identity(sm), annihilation(sb)]).matrix
    md, bd = m.conj().T, b.conj().T
    n_m, n_b = md @ m, bd @ b

    H = (drive.Delta_m * n_m + drive.Delta_b * n_b
         - 0.5 * modes.chi_mm * (md @ md @ m @ m)
         - 0.5 * modes.chi_bb * (bd @ bd @ b @ b)
         - modes.chi_mb * (n_m @ n_b)
         + g2 * (m @ m @ bd) + np.conj(g2) * (md @ md @ b)
         - drive.epsilon_d * bd - np.conj(drive.epsilon_d) * b)

    H_time: list[tuple[Operator, Callable[[float], float]]] = []
    if drive.epsilon_Z != 0:
        Hz = (drive.epsilon_Z * np.exp(1j * drive.theta_z) * md
              + np.conj(drive.epsilon_Z) * np.exp(-1j * drive.theta_z) * m)
        if drive.envelope.kind == "constant":
            H = H + Hz
        else:
            H_time.append((_hermitize(space, Hz), drive.envelope))

    collapse = []
    if rates.kappa_1 > 0:
        collapse.append(Operator(space, math.sqrt(rates.kappa_1) * m))
    if rates.kappa_phi_m > 0:
        collapse.append(Operator(space, math.sqrt(rates.kappa_phi_m) * n_m))
    if rates.kappa_b > 0:
        collapse.append(Operator(space, math.sqrt(rates.kappa_b) * b))
    if rates.kappa_phi_b > 0:
        collapse.append(Operator(space, math.sqrt(rates.kappa_phi_b) * n_b))

    return LindbladModel(space, _hermitize(space, H), tuple(H_time),
                         tuple(collapse), alpha_target)


def adiabatic_model(g2: float, kappa_b: float, alpha: complex,
                    rates: RateSet | None = None, chi_mm: float = 0.0,
                    Delta_m: float = 0.0, dim: int | None = None
                    ) -> LindbladModel:
    """Single-memory-mode model after adiabatic elimination of the buffer.

    Two-photon dissipation kappa_2 = 4 g2^2 / kappa_b with loss operator
    sqrt(kappa_2)(m^2 - alpha^2), plus the memory channels of `rates`
    (buffer entries are only consumed through kappa_2). Warns when the
    elimination condition 8 g2 |alpha| < kappa_b fails.
    """
    if kappa_b <= 0:
        raise ValueError("kappa_b must be positive")
    if 8.0 * abs(g2) * abs(alpha) >= kappa_b:
        warnings.warn(
            f"adiabatic elimination marginal: 8 g2 |alpha| = "
            f"{8 * abs(g2) * abs(alpha):.3e} >= kappa_b = {kappa_b:.3e}",
            AdiabaticityWarning)
    kappa_2 = 4.0 * g2 * g2 / kappa_b
    if dim is None:
        dim = adequate_dim(alpha)
    sm = ModeSpace(dim)
    space = (sm,)
    m = annihilation(sm).matrix
    md = m.conj().T
    n = md @ m
    H = Delta_m * n - 0.5 * chi_mm * (md @ md @ m @ m)
    collapse = []
    if kappa_2 > 0:
        L2 = m @ m - complex(alpha) ** 2 * np.eye(dim)
        collapse.append(Operator(space, math.sqrt(kappa_2) * L2))
    if rates is not None:
        if rates.kappa_1 > 0:
            collapse.append(Operator(space, math.sqrt(rates.kappa_1) * m))
        if rates.kappa_phi_m > 0:
            collapse.append(Operator(space, math.sqrt(rates.kappa_phi_m) * n))
    return LindbladModel(space, _hermitize(space, H), (), tuple(collapse),
                         complex(alpha))


def add_z_drive(model: LindbladModel, eps_Z: complex, theta_z: float = 0.0,
                envelope: Envelope | None = None) -> LindbladModel:
    """Model with the Zeno drive eps_Z e^{i theta_z} m+ + h.c. added on
    the memory mode (mode 0). A non-constant envelope modulates only this
    term; everything else is untouched.

    At theta_z = 0 the drive displaces perpendicular to a real cat
    amplitude and rotates the logical phase at Omega_Z = 4 Re(eps_Z alpha);
    the rotation speed scales as cos(theta_z), vanishing at +-pi/2 where
    the displacement is along alpha and Zeno-blocked."""
    sm = model.space[0]
    if len(model.space) == 1:
        m = annihilation(sm).matrix
    else:
        m = tensor([annihilation(sm)]
                   + [identity(s) for s in model.space[1:]]).matrix
    Hz = (eps_Z * np.exp(1j * theta_z) * m.conj().T
          + np.conj(eps_Z) * np.exp(-1j * theta_z) * m)
    if envelope is None or envelope.kind == "constant":
        H = _hermitize(model.space, model.H_static.matrix + Hz)
        return LindbladModel(model.space, H, model.H_time,
                             model.collapse_ops, model.alpha_target)
    return LindbladModel(
        model.space, model.H_static,
        model.H_time + ((_hermitize(model.space, Hz), envelope),),
        model.collapse_ops, model.alpha_target)


def _h_superop(H: np.ndarray) -> sp.csr_matrix:
    n = H.shape[0]
    eye = sp.identity(n, format="csr")
    Hs = sp.csr_matrix(H)
    return -1j * (sp.kron(Hs, eye, format="csr")
                  - sp.kron(eye, Hs.T, format="csr"))


def _dissipator_superop(C: np.ndarray) -> sp.csr_matrix:
    n = C.shape[0]
    eye = sp.identity(n, format="csr")
    Cs = sp.csr_matrix(C)
    CdC = sp.csr_matrix(C.conj().T @ C)
    return (sp.kron(Cs, Cs.conj(), format="csr")
            - 0.5 * sp.kron(CdC, eye, format="csr")
            - 0.5 * sp.kron(eye, CdC.T, format="csr"))


def liouvillian(model: LindbladModel) -> sp.csr_matrix:
    """Static Liouvillian in row-major vectorization (time terms excluded)."""
    L = _h_superop(model.H_static.matrix)
    for C in model.collapse_ops:
        L = L + _dissipator_superop(C.matrix)
    return L.tocsr()


def _time_superops(model: LindbladModel) -> list[tuple[sp.csr_matrix, Callable]]:
    return [(_h_superop(op.matrix), fn) for op, fn in model.H_time]


def evolve(model: LindbladModel, rho0: QuantumState, times: Sequence[float],
           rtol: float = 1e-8, atol: float = 1e-11, renormalize: bool = False,
           max_step: float | None = None) -> list[QuantumState]:
    """Integrate the master equation, reporting the state at each time.

    Adaptive RK45 on the vectorized density matrix. Trace is NOT
    renormalized by default; drift beyond 1e-7 emits TraceDriftWarning.
    Raises StepFailure when the step controller gives up.
    """
    if rho0.space != model.space:
        raise SpaceMismatch("initial state space differs from model space")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be a nonempty increasing 1-D grid")
    L = liouvillian(model)
    terms = _time_superops(model)

    if max_step is None:
        max_step = np.inf
        for op, fn in model.H_time:
            if isinstance(fn, Envelope) and fn.kind == "gaussian":
                max_step = min(max_step, fn.width / 4.0)
            elif isinstance(fn, Envelope) and fn.kind == "square":
                max_step = min(max_step, fn.T / 20.0)

    def rhs(t, y):
        out = L @ y
        for Lk, fn in terms:
            out = out + fn(t) * (Lk @ y)
        return out

    y0 = rho0.rho.ravel().astype(complex)
    t0 = 0.0 if times[0] > 0 else float(times[0])
    sol = solve_ivp(rhs, (t0, float(times[-1])), y0, method="RK45",
                    t_eval=times, rtol=rtol, atol=atol, max_step=max_step)
    if not sol.success:
        raise StepFailure(f"integrator failed: {sol.message}")
    n = model.dim
    out_states = []
    worst_drift = 0.0
    for k in range(sol.y.shape[1]):
        rho = sol.y[:, k].reshape(n, n)
        rho = (rho + rho.conj().T) / 2.0
        tr = float(np.trace(rho).real)
        worst_drift = max(worst_drift, abs(tr - 1.0))
        if renormalize:
            rho = rho / tr
        out_states.append(QuantumState(model.space, rho, _validate=False))
    if worst_drift > 1e-7:
        warnings.warn(f"trace drift {worst_drift:.2e} exceeds 1e-7",
                      TraceDriftWarning)
    return out_states


def _rate_scale(L: sp.csr_matrix) -> float:
    d = np.abs(L.diagonal())
    return float(d.max()) if d.size else 1.0


def steady_state(model: LindbladModel, zero_tol: float | None = None
                 ) -> QuantumState:
    """Trace-one null vector of the static Liouvillian.

    Direct method: one row of L is replaced by the trace functional and the
    resulting system solved; residual is checked against 1e-9 relative to
    the Liouvillian's rate scale. Falls back to an eigendecomposition when
    the direct solve is singular, raising DegenerateNull if more than two
    null vectors appear (beyond parity doubling).
    """
    if not model.is_time_independent:
        raise ValueError("steady state needs a time-independent model")
    L = liouvillian(model)
    n = model.dim
    scale = _rate_scale(L)
    if zero_tol is None:
        zero_tol = 1e-9 * scale

    trace_row = sp.csr_matrix(
        (np.ones(n), (np.zeros(n, dtype=int), np.arange(n) * (n + 1))),
        shape=(1, n * n))
    rhs = np.zeros(n * n, dtype=complex)
    rhs[0] = 1.0
    A = sp.vstack([trace_row, L.tocsr()[1:]]).tocsc()
    try:
        v = spla.splu(A).solve(rhs)
        resid = float(np.linalg.norm(L @ v))
        if resid < zero_tol:
            rho = v.reshape(n, n)
            rho = (rho + rho.conj().T) / 2.0
            rho /= np.trace(rho).real
            return QuantumState(model.space, rho, _validate=False)
    except RuntimeError:
        pass  # singular: degenerate null space, handled below

    # eigendecomposition route: count the slow subspace honestly
    if n * n <= 2500:
        w, V = np.linalg.eig(L.toarray())
        order = np.argsort(np.abs(w))
        null_idx = [i for i in order if np.abs(w[i]) < zero_tol]
    else:
        try:
            w, V = spla.eigs(L, k=6, sigma=1e-6 * scale, which="LM")
        except Exception as exc:
            raise EigenFailure(f"sparse eigensolver failed: {exc}") from exc
        null_idx = [i for i in range(len(w)) if np.abs(w[i]) < zero_tol]
    if len(null_idx) > 2:
        raise DegenerateNull(
            f"{len(null_idx)} Liouvillian null vectors (beyond parity doubling)")
    if not null_idx:
        raise EigenFailure("no null vector found below tolerance")
    for i in null_idx:
        rho = V[:, i].reshape(n, n)
        rho = (rho + rho.conj().T) / 2.0
        tr = np.trace(rho).real
        if abs(tr) < 1e-12:
            continue
        rho /= tr
        if np.linalg.eigvalsh(rho).min() > -1e-7:
            return QuantumState(model.space, rho, _validate=False)
    raise DegenerateNull("no positive trace-carrying null vector")


def memory_parity_sign(model: LindbladModel) -> np.ndarray:
    """Diagonal of S = (P_m kron I) kron (P_m kron I)^T on vec(rho)."""
    signs = (-1.0) ** np.arange(model.space[0].dim)
    for spc in model.space[1:]:
        signs = np.kron(signs, np.ones(spc.dim))
    return np.kron(signs, signs)


def _sector_matrix(L: sp.csr_matrix, s: np.ndarray, want: float,
                   check: bool = True) -> sp.csr_matrix:
    mask = np.nonzero(s == want)[0]
    other = np.nonzero(s != want)[0]
    Lc = L.tocsc()
    sub = Lc[:, mask].tocsr()
    if check and other.size:
        cross = sub[other]
        if cross.nnz and abs(cross).max() > 1e-9 * (abs(L).max() or 1.0):
            raise ValueError(
                "Liouvillian does not commute with memory parity; "
                "use symmetry='joined'")
    return sub[mask]


def liouvillian_spectrum(model: LindbladModel, symmetry: str = "joined",
                         k: int = 8, dense_cap: int = 2500) -> np.ndarray:
    """Slow Liouvillian eigenvalues in a memory-parity sector.

    symmetry: 'parity-even' (S=+1: populations and even coherences),
    'parity-odd' (S=-1: odd coherences, the logical-Z sector), or 'joined'.
    Dense eigendecomposition up to dense_cap superoperator rows, else
    ARPACK shift-invert targeting zero. Returns eigenvalues sorted by |Re|.
    """
    if not model.is_time_independent:
        raise ValueError("spectral analysis needs a time-independent model")
    L = liouvillian(model)
    if symmetry == "joined":
        Ls = L
    elif symmetry in ("parity-even", "parity-odd"):
        s = memory_parity_sign(model)
        Ls = _sector_matrix(L, s, +1.0 if symmetry == "parity-even" else -1.0)
    else:
        raise ValueError(f"unknown symmetry {symmetry!r}")
    m = Ls.shape[0]
    if m <= dense_cap:
        w = np.linalg.eigvals(Ls.toarray())
    else:
        scale = _rate_scale(L)
        try:
            w, _ = spla.eigs(Ls, k=min(k, m - 2), sigma=1e-6 * scale,
                             which="LM")
        except Exception as exc:
            raise EigenFailure(f"sparse eigensolver failed: {exc}") from exc
    return w[np.argsort(np.abs(w.real))]


def slowest_decay(model: LindbladModel, symmetry: str = "joined",
                  zero_tol: float | None = None, k: int = 8,
                  dense_cap: int = 2500) -> float:
    """Smallest nonzero decay rate |Re(lambda)| in the requested sector.

    Eigenvalues with |Re| below zero_tol (default 1e-12 of the rate scale)
    count as stationary and are skipped.
    """
    w = liouvillian_spectrum(model, symmetry, k=k, dense_cap=dense_cap)
    if zero_tol is None:
        zero_tol = 1e-12 * _rate_scale(liouvillian(model))
    rates = np.abs(w.real)
    live = rates[rates > zero_tol]
    if live.size == 0:
        raise EigenFailure(
            "no decaying eigenvalue found in the requested sector")
    return float(live.min())


def expectation(state: QuantumState, op: Operator) -> complex:
    """Tr(rho O); <psi|O|psi> for pure states."""
    if state.space != op.space:
        raise SpaceMismatch("state and operator spaces differ")
    if state.is_pure:
        return complex(np.vdot(state.data, op.matrix @ state.data))
    return complex(np.trace(state.data @ op.matrix))
