"""Truncated Fock-space operator algebra and canonical state constructors.

Single modes are described by a ModeSpace (truncation dimension); composite
systems by tuples of ModeSpace with the mode ordering fixed as
(memory, buffer[, transmon]) everywhere. All matrices are dense complex
arrays: total dimensions stay below ~500 for every desk-scale run, where
dense BLAS kernels beat any sparse bookkeeping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import KindMismatch, SpaceMismatch, TruncationError

__all__ = [
    "ModeSpace",
    "Operator",
    "QuantumState",
    "adequate_dim",
    "annihilation",
    "cat_state",
    "check_truncation",
    "coherent_state",
    "displacement",
    "fock_state",
    "identity",
    "number",
    "parity",
    "partial_trace",
    "tensor",
    "thermal_state",
]


@dataclass(frozen=True)
class ModeSpace:
    """A single bosonic mode truncated to Fock states |0>..|dim-1>."""

    dim: int

    def __post_init__(self) -> None:
        if self.dim < 2:
            raise ValueError(f"Fock truncation must be >= 2, got {self.dim}")


Space = tuple[ModeSpace, ...]


def _as_space(space: ModeSpace | Space) -> Space:
    if isinstance(space, ModeSpace):
        return (space,)
    return tuple(space)


def _total_dim(space: Space) -> int:
    return math.prod(s.dim for s in space)


@dataclass(frozen=True)
class Operator:
    """Dense operator on a (product of) ModeSpace(s).

    The hermitian flag is advisory; when set it is verified to machine
    tolerance at construction.
    """

    space: Space
    matrix: np.ndarray
    hermitian: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "space", _as_space(self.space))
        mat = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", mat)
        n = _total_dim(self.space)
        if mat.shape != (n, n):
            raise SpaceMismatch(
                f"matrix shape {mat.shape} does not match space dim {n}"
            )
        if self.hermitian and not np.allclose(mat, mat.conj().T, atol=1e-12):
            raise ValueError("operator flagged hermitian is not")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dag(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T, self.hermitian)

    def __matmul__(self, other: "Operator") -> "Operator":
        if self.space != other.space:
            raise SpaceMismatch("operator product across different spaces")
        return Operator(self.space, self.matrix @ other.matrix)

    def __add__(self, other: "Operator") -> "Operator":
        if self.space != other.space:
            raise SpaceMismatch("operator sum across different spaces")
        return Operator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        if self.space != other.space:
            raise SpaceMismatch("operator difference across different spaces")
        return Operator(self.space, self.matrix - other.matrix)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(self.space, self.matrix * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class QuantumState:
    """Pure vector or density matrix on a (product of) ModeSpace(s).

    Constructors in this module renormalize after truncation, so
    trace(rho) = 1 within norm_tolerance by construction.
    """

    space: Space
    data: np.ndarray
    norm_tolerance: float = 1e-10
    _validate: bool = field(default=True, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "space", _as_space(self.space))
        arr = np.asarray(self.data, dtype=complex)
        object.__setattr__(self, "data", arr)
        n = _total_dim(self.space)
        if arr.ndim == 1:
            if arr.shape != (n,):
                raise SpaceMismatch(f"vector length {arr.shape} != dim {n}")
            if self._validate and abs(np.linalg.norm(arr) - 1.0) > self.norm_tolerance:
                raise ValueError("pure state vector is not unit norm")
        elif arr.ndim == 2:
            if arr.shape != (n, n):
                raise SpaceMismatch(f"matrix shape {arr.shape} != dim {n}")
            if self._validate:
                tr = np.trace(arr).real
                if abs(tr - 1.0) > self.norm_tolerance:
                    raise ValueError(f"density matrix trace {tr} != 1")
        else:
            raise ValueError("state must be a vector or a square matrix")

    @property
    def is_pure(self) -> bool:
        return self.data.ndim == 1

    @property
    def dim(self) -> int:
        return _total_dim(self.space)

    @property
    def rho(self) -> np.ndarray:
        """Density matrix form regardless of internal representation."""
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return self.data

    def overlap(self, other: "QuantumState") -> float:
        """Fidelity-like overlap Tr(rho sigma); |<a|b>|^2 for pure states."""
        if self.space != other.space:
            raise SpaceMismatch("overlap across different spaces")
        if self.is_pure and other.is_pure:
            return abs(np.vdot(self.data, other.data)) ** 2
        return float(np.trace(self.rho @ other.rho).real)


def adequate_dim(alpha: complex) -> int:
    """Smallest truncation satisfying dim >= |alpha|^2 + 4|alpha| + 6.

    Covers roughly five sigma of the Poisson tail; keeps displacement
    unitarity error below 1e-8 for |alpha|^2 <= 20 at dim <= 50.
    """
    a = abs(alpha)
    return int(math.ceil(a * a + 4.0 * a + 6.0))


def check_truncation(space: ModeSpace, alpha: complex) -> None:
    need = abs(alpha) ** 2 + 4.0 * abs(alpha) + 6.0
    if space.dim < need:
        raise TruncationError(
            f"dim={space.dim} inadequate for |alpha|={abs(alpha):.3f} "
            f"(need >= {need:.1f})"
        )


def annihilation(space: ModeSpace) -> Operator:
    """Ladder operator with entries sqrt(n) at (n-1, n)."""
    n = np.arange(1, space.dim, dtype=float)
    return Operator((space,), np.diag(np.sqrt(n), k=1))


def number(space: ModeSpace) -> Operator:
    return Operator((space,), np.diag(np.arange(space.dim, dtype=float)), hermitian=True)


def identity(space: ModeSpace | Space) -> Operator:
    sp = _as_space(space)
    return Operator(sp, np.eye(_total_dim(sp)), hermitian=True)


def parity(space: ModeSpace) -> Operator:
    """Photon-number parity (-1)^n."""
    return Operator(
        (space,), np.diag((-1.0) ** np.arange(space.dim)), hermitian=True
    )


def displacement(space: ModeSpace, beta: complex) -> Operator:
    """D(beta) = expm(beta a^dag - beta* a) on the truncated space.

    Computed by matrix exponential (single code path); raises
    TruncationError when the adequacy heuristic fails, since the truncated
    exponential is then visibly non-unitary.
    """
    check_truncation(space, beta)
    a = annihilation(space).matrix
    gen = beta * a.conj().T - np.conj(beta) * a
    return Operator((space,), expm(gen))


def fock_state(space: ModeSpace, n: int) -> QuantumState:
    if not 0 <= n < space.dim:
        raise ValueError(f"Fock index {n} outside truncation {space.dim}")
    vec = np.zeros(space.dim, dtype=complex)
    vec[n] = 1.0
    return QuantumState((space,), vec)


def coherent_state(space: ModeSpace, alpha: complex) -> QuantumState:
    """|alpha> with amplitudes e^{-|a|^2/2} a^n / sqrt(n!), renormalized."""
    check_truncation(space, alpha)
    n = np.arange(space.dim)
    # log-domain amplitudes avoid overflow in n! for large truncations
    logmag = -abs(alpha) ** 2 / 2 + n * np.log(abs(alpha) + 1e-300) \
        - 0.5 * np.array([math.lgamma(k + 1) for k in n])
    phase = np.exp(1j * n * np.angle(alpha)) if alpha != 0 else np.ones(space.dim)
    vec = np.exp(logmag) * phase
    if alpha == 0:
        vec = np.zeros(space.dim, dtype=complex)
        vec[0] = 1.0
    vec = vec / np.linalg.norm(vec)
    return QuantumState((space,), vec)


def cat_state(space: ModeSpace, alpha: complex, theta: float = 0.0) -> QuantumState:
    """Normalized (|alpha> + e^{i theta} |-alpha>)/sqrt(N).

    theta=0 is the even cat |C+> (even Fock support only), theta=pi the odd
    cat.
    """
    plus = coherent_state(space, alpha).data
    minus = coherent_state(space, -alpha).data
    vec = plus + np.exp(1j * theta) * minus
    nrm = np.linalg.norm(vec)
    if nrm < 1e-12:
        raise ValueError("cat superposition vanished (alpha=0, theta=pi)")
    return QuantumState((space,), vec / nrm)


def thermal_state(space: ModeSpace, n_th: float) -> QuantumState:
    """Boltzmann-distributed diagonal state with geometric weights.

    Weights n_th^n / (1+n_th)^{n+1}; requires the truncated tail mass to be
    below 1e-9, else TruncationError.
    """
    if n_th < 0:
        raise ValueError("n_th must be >= 0")
    if n_th == 0:
        return QuantumState((space,), np.diag(fock_state(space, 0).rho.diagonal()))
    n = np.arange(space.dim, dtype=float)
    w = np.exp(n * np.log(n_th / (1 + n_th)) - np.log(1 + n_th))
    tail = (n_th / (1 + n_th)) ** space.dim  # exact geometric tail mass
    if tail > 1e-9:
        raise TruncationError(
            f"thermal tail mass {tail:.2e} beyond dim={space.dim} exceeds 1e-9"
        )
    w = w / w.sum()
    return QuantumState((space,), np.diag(w.astype(complex)))


def tensor(factors: list) -> Operator | QuantumState:
    """Kronecker product of operators or states, memory-first ordering."""
    if not factors:
        raise ValueError("tensor of no factors")
    kinds = {type(f) for f in factors}
    if kinds == {Operator}:
        space: Space = ()
        mat = np.array([[1.0 + 0j]])
        herm = True
        for f in factors:
            space = space + f.space
            mat = np.kron(mat, f.matrix)
            herm = herm and f.hermitian
        return Operator(space, mat, hermitian=herm)
    if kinds == {QuantumState}:
        space = ()
        pure = all(f.is_pure for f in factors)
        arr = np.array([1.0 + 0j]) if pure else np.array([[1.0 + 0j]])
        for f in factors:
            space = space + f.space
            arr = np.kron(arr, f.data if pure else f.rho)
        return QuantumState(space, arr)
    raise KindMismatch(f"cannot tensor mixed kinds {sorted(k.__name__ for k in kinds)}")


def partial_trace(state: QuantumState, keep: int) -> QuantumState:
    """Reduced density matrix of mode `keep`; trace preserved."""
    dims = [s.dim for s in state.space]
    if not 0 <= keep < len(dims):
        raise IndexError(f"mode index {keep} out of range for {len(dims)} modes")
    rho = state.rho.reshape(dims + dims)
    order = [keep] + [i for i in range(len(dims)) if i != keep]
    rho = np.transpose(rho, axes=[*order, *[o + len(dims) for o in order]])
    d_keep = dims[keep]
    d_rest = int(np.prod([dims[i] for i in range(len(dims)) if i != keep], initial=1))
    rho = rho.reshape(d_keep, d_rest, d_keep, d_rest)
    red = np.einsum("ikjk->ij", rho)
    return QuantumState((state.space[keep],), red, norm_tolerance=1e-9)
