import math

import numpy as np
import pytest

from autocat.errors import CoverageWarning, NoOscillation, TruncationError
from autocat.fock import (
    ModeSpace,
    QuantumState,
    cat_state,
    coherent_state,
    displacement,
    fock_state,
    parity,
    thermal_state,
)
from autocat.wigner import (
    WignerGrid,
    default_axes,
    fringe_calibration,
    fringe_period,
    parity_point,
    photon_number_from_grid,
    wigner_cat,
    wigner_fock,
    wigner_numeric,
    wigner_point,
    wigner_thermal,
)

TWO_OVER_PI = 2.0 / math.pi


def displaced_parity_reference(state, beta):
    """Direct evaluation via the matrix exponential displacement."""
    sp = state.space[0]
    D = displacement(sp, beta).matrix
    P = parity(sp).matrix
    rho = state.rho
    return TWO_OVER_PI * np.real(np.trace(D.conj().T @ rho @ D @ P))


class TestNumericAgainstExponential:
    def test_random_density_matrix(self):
        rng = np.random.default_rng(7)
        sp = ModeSpace(16)
        A = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
        rho = A @ A.conj().T
        rho /= np.trace(rho).real
        # keep support away from the truncation edge
        w = np.exp(-0.9 * np.arange(16))
        rho = rho * np.outer(w, w)
        rho /= np.trace(rho).real
        state = QuantumState(sp, rho)
        betas = [0.0, 0.3 + 0.0j, -0.2 + 0.55j, 1.0 - 1.0j, 0.0 + 1.3j]
        for b in betas:
            ref = displaced_parity_reference(state, b)
            # embed=False pins the working space to the state's own, making
            # the spectral path algebraically identical to the exponential
            assert wigner_point(state, complex(b), embed=False) == \
                pytest.approx(ref, abs=1e-10)

    def test_pure_state_path(self):
        sp = ModeSpace(18)
        state = cat_state(sp, 1.4)
        for b in (0.2 + 0.1j, -0.7j, 1.1 + 0.4j):
            ref = displaced_parity_reference(state, b)
            assert wigner_point(state, b, embed=False) == \
                pytest.approx(ref, abs=1e-10)


class TestAnalyticForms:
    def test_vacuum_center(self):
        sp = ModeSpace(10)
        assert wigner_point(fock_state(sp, 0), 0.0 + 0j) == pytest.approx(
            TWO_OVER_PI, abs=1e-6)

    def test_fock_one_center(self):
        sp = ModeSpace(10)
        assert wigner_point(fock_state(sp, 1), 0.0 + 0j) == pytest.approx(
            -TWO_OVER_PI, abs=1e-10)
        assert wigner_fock(1, 0.0) == pytest.approx(-TWO_OVER_PI, abs=1e-12)

    def test_fock_gaussian_limit(self):
        b = 0.6 - 0.2j
        assert wigner_fock(0, b) == pytest.approx(
            TWO_OVER_PI * math.exp(-2 * abs(b) ** 2), rel=1e-12)

    def test_thermal_values(self):
        assert wigner_thermal(0.0, 0.0) == pytest.approx(TWO_OVER_PI, rel=1e-12)
        assert wigner_thermal(0.01, 0.0) == pytest.approx(TWO_OVER_PI / 1.02, rel=1e-12)
        # standard deviation of the Gaussian is sqrt(1+2 n_th)/2
        n_th = 0.5
        sigma = math.sqrt(1 + 2 * n_th) / 2
        ratio = wigner_thermal(n_th, sigma) / wigner_thermal(n_th, 0.0)
        assert ratio == pytest.approx(math.exp(-0.5), rel=1e-12)

    def test_thermal_numeric_pointwise(self):
        sp = ModeSpace(60)
        state = thermal_state(sp, 1.0)
        ax = np.linspace(-3.5, 3.5, 29)
        grid = wigner_numeric(state, (ax, ax))
        RE, IM = np.meshgrid(ax, ax)
        ref = wigner_thermal(1.0, RE + 1j * IM)
        assert np.max(np.abs(grid.values - ref)) < 1e-6

    def test_fock_numeric_pointwise(self):
        sp = ModeSpace(30)
        state = fock_state(sp, 3)
        ax = np.linspace(-3.0, 3.0, 31)
        grid = wigner_numeric(state, (ax, ax))
        RE, IM = np.meshgrid(ax, ax)
        ref = wigner_fock(3, RE + 1j * IM)
        assert np.max(np.abs(grid.values - ref)) < 1e-8

    def test_laguerre_generating_identity(self):
        n_th, beta = 0.3, 0.7
        q = n_th / (1.0 + n_th)
        total = sum(q**n / (1.0 + n_th) * wigner_fock(n, beta) for n in range(80))
        assert total == pytest.approx(wigner_thermal(n_th, beta), abs=1e-10)

    def test_cat_matches_numeric(self):
        alpha = 2.0
        sp = ModeSpace(40)
        for par in (+1, -1):
            theta = 0.0 if par == 1 else math.pi
            state = cat_state(sp, alpha, theta)
            ax = np.linspace(-5.0, 5.0, 41)
            grid = wigner_numeric(state, (ax, ax))
            RE, IM = np.meshgrid(ax, ax)
            ref = wigner_cat(alpha, par, RE + 1j * IM)
            assert np.max(np.abs(grid.values - ref)) < 1e-4

    def test_cat_center_is_parity(self):
        # exact normalization keeps W(0) = +/- 2/pi at ANY alpha
        for alpha in (0.5, 1.0, 2.5):
            assert wigner_cat(alpha, +1, 0.0) == pytest.approx(TWO_OVER_PI, rel=1e-12)
            assert wigner_cat(alpha, -1, 0.0) == pytest.approx(-TWO_OVER_PI, rel=1e-12)

    def test_cat_lobe_large_alpha(self):
        assert wigner_cat(3.0, +1, 3.0) == pytest.approx(1.0 / math.pi, rel=1e-6)

    def test_cat_integral_exact_small_alpha(self):
        ax = np.linspace(-4.5, 4.5, 301)
        RE, IM = np.meshgrid(ax, ax)
        W = wigner_cat(0.8, +1, RE + 1j * IM)
        grid = WignerGrid(ax, ax, W)
        assert grid.integral() == pytest.approx(1.0, abs=1e-6)


class TestInvariants:
    def test_numeric_integral_is_trace(self):
        sp = ModeSpace(24)
        state = cat_state(sp, 1.8)
        grid = wigner_numeric(state, points=101)
        assert grid.integral() == pytest.approx(1.0, abs=0.02)

    def test_wigner_bound(self):
        sp = ModeSpace(30)
        for state in (cat_state(sp, 1.6), fock_state(sp, 4), thermal_state(sp, 0.8)):
            grid = wigner_numeric(state, points=61)
            assert np.max(np.abs(grid.values)) <= TWO_OVER_PI + 1e-9

    def test_truncation_guard(self):
        sp = ModeSpace(8)
        with pytest.raises(TruncationError):
            wigner_numeric(_saturated_state(sp), points=11)


def _saturated_state(sp):
    v = np.zeros(sp.dim, dtype=complex)
    v[-1] = 1.0
    return QuantumState(sp, v)


class TestEstimators:
    @pytest.mark.parametrize("alpha", [1.5, 2.0, 2.5])
    def test_fringe_period(self, alpha):
        dim = max(30, int(alpha**2 + 4 * alpha + 8))
        state = cat_state(ModeSpace(dim), alpha)
        grid = wigner_numeric(state, points=161)
        period = fringe_period(grid)
        assert period == pytest.approx(math.pi / (2 * alpha), rel=0.01)

    def test_fringe_period_needs_fringes(self):
        sp = ModeSpace(12)
        grid = wigner_numeric(fock_state(sp, 0), points=61)
        with pytest.raises(NoOscillation):
            fringe_period(grid)

    def test_photon_number_vacuum(self):
        grid = wigner_numeric(fock_state(ModeSpace(10), 0), points=81)
        assert photon_number_from_grid(grid) == pytest.approx(0.0, abs=0.01)

    def test_photon_number_coherent(self):
        state = coherent_state(ModeSpace(30), 2.0)
        grid = wigner_numeric(state, points=121)
        assert photon_number_from_grid(grid) == pytest.approx(4.0, abs=0.05)

    def test_photon_number_thermal_analytic(self):
        ax = np.linspace(-4.0, 4.0, 161)
        RE, IM = np.meshgrid(ax, ax)
        grid = WignerGrid(ax, ax, wigner_thermal(0.5, RE + 1j * IM))
        assert photon_number_from_grid(grid) == pytest.approx(0.5, abs=0.02)

    def test_coverage_warning(self):
        ax = np.linspace(-1.0, 1.0, 41)
        RE, IM = np.meshgrid(ax, ax)
        grid = WignerGrid(ax, ax, wigner_thermal(0.5, RE + 1j * IM))
        with pytest.warns(CoverageWarning):
            photon_number_from_grid(grid)

    def test_parity_point(self):
        sp = ModeSpace(30)
        assert parity_point(cat_state(sp, 2.0)) == pytest.approx(TWO_OVER_PI, abs=1e-9)
        assert parity_point(fock_state(sp, 1)) == pytest.approx(-TWO_OVER_PI, abs=1e-12)
        rho = 0.5 * coherent_state(sp, 2.0).rho + 0.5 * coherent_state(sp, -2.0).rho
        mix = QuantumState(sp, rho)
        assert parity_point(mix) == pytest.approx(
            TWO_OVER_PI * math.exp(-2 * 4.0), rel=1e-3)

    def test_fringe_calibration(self):
        assert fringe_calibration(math.pi, 1.0) == pytest.approx(1.0, rel=1e-12)
        # round-trip: dV_alpha = 2 alpha/mu, dV_I = pi/(2 alpha mu)
        mu, alpha = 31.4, 2.0
        assert fringe_calibration(2 * alpha / mu, math.pi / (2 * alpha * mu)) == \
            pytest.approx(mu, rel=1e-9)
        assert fringe_calibration(0.12739, 0.025032) == pytest.approx(31.4, abs=0.05)


class TestGridDefaults:
    def test_default_axes_cover_state(self):
        state = coherent_state(ModeSpace(40), 2.5)
        re_ax, im_ax = default_axes(state)
        assert len(re_ax) == 161
        assert re_ax[-1] == pytest.approx(2.5 + 3.0, abs=0.01)

    def test_grid_shape_contract(self):
        with pytest.raises(ValueError):
            WignerGrid(np.arange(3.0), np.arange(4.0), np.zeros((3, 4)))
