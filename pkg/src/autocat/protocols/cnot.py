"""Conditional pi/2 target rotation: the cat CNOT at desk scale.

The control cat is treated as a stiff classical label +-|alpha_c| (a full
second quantized mode is out of scope and the conditional Hamiltonian is
already the approximation used to define the gate). The target undergoes
a number rotation at +-2|alpha_c| g_CNOT for the gate time, then optional
re-stabilization into the rotated manifold {|+-i alpha_t>}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..dynamics import LindbladModel, evolve
from ..fock import ModeSpace, Operator, QuantumState, cat_state
from ..wigner import parity_point

__all__ = [
    "CnotCoupling",
    "cnot_coupling",
    "cnot_gate_time",
    "CnotResult",
    "cnot_sequence",
]


class CnotCoupling(NamedTuple):
    g_cnot: float
    drive_phase: float


def cnot_coupling(g4: float, phi_c_zpf: float, phi_t_zpf: float,
                  xi0: complex) -> CnotCoupling:
    """Four-wave CNOT rate g_CNOT = 12 g4 phi_c phi_t^2 |xi0| and the
    pump phase the scheme requires, arg(xi0) = arg(alpha_c)."""
    if g4 < 0 or phi_c_zpf < 0 or phi_t_zpf < 0:
        raise ValueError("magnitudes must be >= 0")
    g = 12.0 * g4 * phi_c_zpf * phi_t_zpf ** 2 * abs(xi0)
    return CnotCoupling(g_cnot=g, drive_phase=float(np.angle(complex(xi0))))


def cnot_gate_time(alpha_c: complex, g_cnot: float) -> float:
    """Gate duration T_g = pi / (4 |alpha_c| g_CNOT)."""
    if alpha_c == 0 or g_cnot <= 0:
        raise ValueError("needs alpha_c != 0 and g_cnot > 0")
    return math.pi / (4.0 * abs(alpha_c) * g_cnot)


@dataclass(frozen=True)
class CnotResult:
    state: QuantumState
    fidelity: float
    gate_time: float
    rotation: float


def cnot_sequence(control: complex, target_alpha: complex, g_cnot: float,
                  dim: int, kappa_1: float = 0.0,
                  restabilize_kappa2: float = 0.0,
                  stab_time: float | None = None,
                  T_g: float | None = None,
                  initial: QuantumState | None = None) -> CnotResult:
    """Simulate the three-step CNOT on the target cat.

    1. target stabilization off; 2. number rotation
    H = -s 2|alpha_c| g_CNOT n for T_g, where s = +-1 follows the sign of
    the control amplitude along its nominal axis, so the target coherent
    components pick up +-pi/2; 3. optional re-stabilization into
    {|+-i alpha_t>} via two-photon loss with the drive phase advanced by
    pi (restabilize_kappa2 > 0 turns this on).

    The target starts in the even cat unless `initial` (a pure state on a
    dim-sized mode) says otherwise; fidelity is the overlap with that
    state rotated by the exact conditional phase.
    """
    if control == 0:
        raise ValueError("control amplitude must be +-|alpha_c|, not 0")
    s = 1.0 if complex(control).real >= 0 else -1.0
    alpha_c = abs(control)
    if T_g is None:
        T_g = cnot_gate_time(alpha_c, g_cnot)
    theta = s * 2.0 * alpha_c * g_cnot * T_g

    space = (ModeSpace(dim),)
    m = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)
    n = m.conj().T @ m
    H = Operator(space, -s * 2.0 * alpha_c * g_cnot * n, hermitian=True)
    collapse = []
    if kappa_1 > 0:
        collapse.append(Operator(space, math.sqrt(kappa_1) * m))
    rot_model = LindbladModel(space, H, (), tuple(collapse),
                              complex(target_alpha))

    psi0 = cat_state(space[0], target_alpha) if initial is None else initial
    if psi0.space != space or not psi0.is_pure:
        raise ValueError("initial must be a pure state of the target mode")
    state = evolve(rot_model, psi0, [T_g])[-1]

    if restabilize_kappa2 > 0:
        if stab_time is None:
            stab_time = 5.0 / restabilize_kappa2
        # drive phase advanced by pi: (i alpha_t)^2 = -alpha_t^2
        L2 = m @ m + complex(target_alpha) ** 2 * np.eye(dim)
        stab = LindbladModel(
            space, Operator(space, np.zeros((dim, dim)), hermitian=True),
            (), (Operator(space, math.sqrt(restabilize_kappa2) * L2),),
            1j * complex(target_alpha))
        state = evolve(stab, state, [stab_time])[-1]

    ideal = np.exp(1j * theta * np.arange(dim)) * psi0.data
    fidelity = float(np.real(ideal.conj() @ state.rho @ ideal))
    return CnotResult(state=state, fidelity=fidelity, gate_time=T_g,
                      rotation=theta)
