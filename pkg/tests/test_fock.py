import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tmsns.errors import CutoffTooSmall
from tmsns.fock import (
    apply_coupled,
    apply_coupled_creation,
    band_amplitudes,
    expectation,
    off_band_max,
    oracle_state,
    tmsv,
)
from tmsns.schmidt import schmidt_coefficient


class TestTmsv:
    def test_lambda_zero_is_vacuum(self):
        state = tmsv(0.0, 5)
        expected = np.zeros((6, 6))
        expected[0, 0] = 1.0
        np.testing.assert_array_equal(state.amp, expected)

    def test_small_cutoff_diagonal(self):
        state = tmsv(0.5, 2)
        s = math.sqrt(0.75)
        np.testing.assert_allclose(np.diag(state.amp), [s, 0.5 * s, 0.25 * s], rtol=1e-15)
        assert off_band_max(state, 0) == 0.0

    def test_leakage_at_cutoff_50(self):
        # sum_{n > 50} 0.75 * 0.25**n = 0.25**51
        state = tmsv(0.5, 50)
        assert state.norm_deficit == pytest.approx(0.25**51, rel=1e-12)
        assert state.norm_deficit < 1e-29


class TestCoupledOperators:
    def test_annihilates_vacuum(self):
        for which in "AB":
            out = apply_coupled(tmsv(0.6, 60), which, 0.6, dagger=False)
            assert np.linalg.norm(out.amp) < 1e-12

    @pytest.mark.parametrize("label", [(0, 0), (1, 0), (1, 1), (2, 1)])
    def test_commutator_expectation(self, label):
        lam = 0.4
        psi = oracle_state(label, lam, 80)
        for which in "AB":
            a_adag = apply_coupled(apply_coupled(psi, which, lam, True), which, lam, False)
            adag_a = apply_coupled(apply_coupled(psi, which, lam, False), which, lam, True)
            value = np.sum(psi.amp * (a_adag.amp - adag_a.amp))
            assert value == pytest.approx(1.0, abs=1e-12)

    def test_single_creation_matches_closed_form(self):
        lam = 0.35
        state = apply_coupled_creation(tmsv(lam, 80), "A", lam)
        band = band_amplitudes(state, 1)
        closed = [schmidt_coefficient((1, 0), m, lam) for m in range(len(band))]
        np.testing.assert_allclose(band, closed, atol=1e-14)
        assert off_band_max(state, 1) < 1e-14

    def test_dropped_mass_is_tracked(self):
        state = apply_coupled_creation(tmsv(0.9, 5), "A", 0.9)
        assert state.norm_deficit > tmsv(0.9, 5).norm_deficit

    def test_rejects_unknown_mode(self):
        with pytest.raises(ValueError):
            apply_coupled(tmsv(0.3, 4), "C", 0.3, dagger=True)


class TestOracleState:
    def test_vacuum_label_is_tmsv(self):
        np.testing.assert_array_equal(oracle_state((0, 0), 0.3, 20).amp, tmsv(0.3, 20).amp)

    def test_p11_entries(self):
        lam = 0.3
        x = lam * lam
        band = band_amplitudes(oracle_state((1, 1), lam, 60), 0)
        m = np.arange(len(band), dtype=float)
        p11 = (1 - x) * x ** (m - 1) * (m - (m + 1) * x) ** 2
        assert np.max(np.abs(band**2 - p11)) < 1e-10

    def test_three_two(self):
        lam = 0.5
        band = band_amplitudes(oracle_state((3, 2), lam, 80), 1)
        closed = np.array([schmidt_coefficient((3, 2), m, lam) for m in range(len(band))])
        assert np.max(np.abs(band**2 - closed**2)) < 1e-9

    def test_number_operator_eigenvalues(self):
        lam = 0.45
        for label in [(2, 1), (3, 3), (0, 2)]:
            psi = oracle_state(label, lam, 90)
            for which, n in zip("AB", label):
                mean = expectation(psi, which, lam)
                second = expectation(psi, which, lam, power=2)
                assert mean == pytest.approx(n, abs=1e-10)
                assert second - mean**2 < 1e-10

    def test_cutoff_too_small(self):
        with pytest.raises(CutoffTooSmall):
            oracle_state((2, 1), 0.9, 10)
        with pytest.raises(CutoffTooSmall):
            oracle_state((2, 2), 0.1, 3)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 3), st.integers(0, 3), st.sampled_from([0.1, 0.3, 0.5]))
def test_swap_symmetry(n_a, n_b, lam):
    direct = oracle_state((n_a, n_b), lam, 70).amp
    swapped = oracle_state((n_b, n_a), lam, 70).amp
    np.testing.assert_allclose(direct, swapped.T, atol=1e-13)
    spectrum = np.sort(band_amplitudes(oracle_state((n_a, n_b), lam, 70), n_a - n_b) ** 2)
    other = np.sort(band_amplitudes(oracle_state((n_b, n_a), lam, 70), n_b - n_a) ** 2)
    np.testing.assert_allclose(spectrum, other, atol=1e-13)
