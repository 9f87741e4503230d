import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from autocat import fock
from autocat.errors import KindMismatch, TruncationError


def test_annihilation_ladder_action():
    sp = fock.ModeSpace(3)
    a = fock.annihilation(sp).matrix
    one = fock.fock_state(sp, 1).data
    assert np.allclose(a @ one, fock.fock_state(sp, 0).data)
    vac = fock.fock_state(sp, 0).data
    assert np.allclose(a @ vac, 0.0)


def test_canonical_commutator_on_retained_levels():
    sp = fock.ModeSpace(12)
    a = fock.annihilation(sp).matrix
    comm = a @ a.conj().T - a.conj().T @ a
    # exact except the last level, where truncation breaks the identity
    assert np.allclose(comm[:-1, :-1], np.eye(sp.dim - 1))


def test_displacement_identity_at_zero():
    sp = fock.ModeSpace(10)
    D = fock.displacement(sp, 0.0).matrix
    assert np.allclose(D, np.eye(10), atol=1e-12)


def test_displacement_generates_coherent_state():
    sp = fock.ModeSpace(30)
    beta = 1.3 - 0.4j
    D = fock.displacement(sp, beta).matrix
    vac = fock.fock_state(sp, 0).data
    target = fock.coherent_state(sp, beta).data
    assert np.linalg.norm(D @ vac - target) < 1e-6


def test_displacement_unitarity():
    sp = fock.ModeSpace(40)
    beta = 2.1 + 0.7j
    D = fock.displacement(sp, beta).matrix
    Dm = fock.displacement(sp, -beta).matrix
    assert np.linalg.norm(D @ Dm - np.eye(40), ord=2) < 1e-8


def test_displacement_truncation_error():
    with pytest.raises(TruncationError):
        fock.displacement(fock.ModeSpace(8), 3.0)


def test_coherent_state_zero_alpha_is_vacuum():
    sp = fock.ModeSpace(10)
    assert np.allclose(fock.coherent_state(sp, 0).data, fock.fock_state(sp, 0).data)


def test_coherent_state_poisson_mean():
    sp = fock.ModeSpace(30)
    st_ = fock.coherent_state(sp, 2.0)
    n = fock.number(sp).matrix
    mean = np.vdot(st_.data, n @ st_.data).real
    assert abs(mean - 4.0) < 1e-6


def test_coherent_overlap_closed_form():
    sp = fock.ModeSpace(40)
    alpha = 1.7
    p = fock.coherent_state(sp, alpha).data
    m = fock.coherent_state(sp, -alpha).data
    assert abs(np.vdot(p, m).real - math.exp(-2 * alpha**2)) < 1e-9


def test_cat_state_parities():
    sp = fock.ModeSpace(30)
    P = fock.parity(sp).matrix
    even = fock.cat_state(sp, 2.0, 0.0).data
    odd = fock.cat_state(sp, 2.0, math.pi).data
    assert abs(np.vdot(even, P @ even).real - 1.0) < 1e-10
    assert abs(np.vdot(odd, P @ odd).real + 1.0) < 1e-10


def test_even_cat_has_no_odd_amplitudes():
    sp = fock.ModeSpace(30)
    even = fock.cat_state(sp, 1.4, 0.0).data
    assert np.max(np.abs(even[1::2])) < 1e-12


def test_cat_small_alpha_limit_is_vacuum():
    sp = fock.ModeSpace(12)
    st_ = fock.cat_state(sp, 1e-4, 0.0)
    assert abs(abs(st_.data[0]) - 1.0) < 1e-6


def test_thermal_state_zero_temperature():
    sp = fock.ModeSpace(10)
    rho = fock.thermal_state(sp, 0.0).rho
    assert np.allclose(rho, fock.fock_state(sp, 0).rho)


def test_thermal_state_paper_ground_weight():
    sp = fock.ModeSpace(25)
    rho = fock.thermal_state(sp, 0.011).rho
    assert abs(rho[0, 0].real - 1 / 1.011) < 1e-5


def test_thermal_state_mean_occupation():
    sp = fock.ModeSpace(60)
    rho = fock.thermal_state(sp, 0.5).rho
    n = fock.number(sp).matrix
    assert abs(np.trace(rho @ n).real - 0.5) < 1e-9


def test_thermal_state_tail_guard():
    with pytest.raises(TruncationError):
        fock.thermal_state(fock.ModeSpace(4), 2.0)


def test_parity_values():
    sp = fock.ModeSpace(20)
    P = fock.parity(sp).matrix
    assert P[0, 0] == 1.0 and P[1, 1] == -1.0
    alpha = 1.1
    c = fock.coherent_state(sp, alpha).data
    assert abs(np.vdot(c, P @ c).real - math.exp(-2 * alpha**2)) < 1e-8


def test_parity_anticommutes_with_annihilation():
    sp = fock.ModeSpace(15)
    P = fock.parity(sp).matrix
    a = fock.annihilation(sp).matrix
    assert np.all(P @ a + a @ P == 0.0)


def test_tensor_identity_and_ladder():
    m, b = fock.ModeSpace(3), fock.ModeSpace(3)
    II = fock.tensor([fock.identity(m), fock.identity(b)])
    assert np.allclose(II.matrix, np.eye(9))
    aI = fock.tensor([fock.annihilation(m), fock.identity(b)])
    s11 = fock.tensor([fock.fock_state(m, 1), fock.fock_state(b, 1)])
    s01 = fock.tensor([fock.fock_state(m, 0), fock.fock_state(b, 1)])
    assert np.allclose(aI.matrix @ s11.data, s01.data)


def test_tensor_trace_factorizes():
    m, b = fock.ModeSpace(10), fock.ModeSpace(5)
    rho_m = fock.thermal_state(m, 0.05)
    rho_b = fock.fock_state(b, 2)
    prod = fock.tensor([rho_m, rho_b])
    assert abs(np.trace(prod.rho) - 1.0) < 1e-12


def test_tensor_kind_mismatch():
    m = fock.ModeSpace(3)
    with pytest.raises(KindMismatch):
        fock.tensor([fock.identity(m), fock.fock_state(m, 0)])


def test_partial_trace_recovers_factors():
    m, b = fock.ModeSpace(14), fock.ModeSpace(8)
    rho_m = fock.thermal_state(m, 0.2)
    rho_b = fock.thermal_state(b, 0.05)
    prod = fock.tensor([rho_m, rho_b])
    red0 = fock.partial_trace(prod, 0)
    red1 = fock.partial_trace(prod, 1)
    assert np.allclose(red0.rho, rho_m.rho, atol=1e-12)
    assert np.allclose(red1.rho, rho_b.rho, atol=1e-12)


def test_partial_trace_bell_state():
    m, b = fock.ModeSpace(2), fock.ModeSpace(2)
    vec = np.zeros(4, dtype=complex)
    vec[0] = vec[3] = 1 / math.sqrt(2)
    bell = fock.QuantumState((m, b), vec)
    red = fock.partial_trace(bell, 0)
    assert np.allclose(red.rho, np.eye(2) / 2, atol=1e-12)


def test_partial_trace_preserves_trace_random():
    rng = np.random.default_rng(7)
    m, b = fock.ModeSpace(5), fock.ModeSpace(4)
    X = rng.normal(size=(20, 20)) + 1j * rng.normal(size=(20, 20))
    rho = X @ X.conj().T
    rho /= np.trace(rho)
    state = fock.QuantumState((m, b), rho)
    red = fock.partial_trace(state, 1)
    assert abs(np.trace(red.rho) - 1.0) < 1e-12


def test_partial_trace_index_error():
    m = fock.ModeSpace(3)
    with pytest.raises(IndexError):
        fock.partial_trace(fock.fock_state(m, 0), 1)


@given(
    alpha_re=st.floats(-2.0, 2.0),
    alpha_im=st.floats(-2.0, 2.0),
    theta=st.floats(0.0, 2 * math.pi),
)
@settings(max_examples=60, deadline=None)
def test_constructor_normalization_property(alpha_re, alpha_im, theta):
    alpha = alpha_re + 1j * alpha_im
    sp = fock.ModeSpace(fock.adequate_dim(alpha) + 4)
    states = [fock.coherent_state(sp, alpha)]
    if abs(alpha) > 1e-3 or abs(theta - math.pi) > 1e-3:
        states.append(fock.cat_state(sp, alpha, theta))
    for s in states:
        assert abs(np.trace(s.rho).real - 1.0) < 1e-10


@given(n_th=st.floats(0.0, 1.5))
@settings(max_examples=40, deadline=None)
def test_thermal_normalization_property(n_th):
    sp = fock.ModeSpace(80)
    rho = fock.thermal_state(sp, n_th).rho
    assert abs(np.trace(rho).real - 1.0) < 1e-10
    evals = np.linalg.eigvalsh(rho)
    assert evals.min() > -1e-12
