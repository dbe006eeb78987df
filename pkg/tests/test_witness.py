import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq
from scipy.stats import nbinom

from tmsns.errors import DivisionByZeroMass, IncompatibleTruncation
from tmsns.majorization import Outcome, majorizes
from tmsns.schmidt import Distribution, distribution
from tmsns.witness import (
    THRESHOLD_00_11,
    THRESHOLD_00_11_PRIME,
    THRESHOLD_10_11,
    Kind,
    ToeplitzWitness,
    a_00_11,
    build_A_00_11,
    build_A_10_11,
    build_A_prime,
    build_D,
    is_column_stochastic,
    toeplitz_deconvolve,
    verify_witness,
)


def displayed_a_prime(lam):
    """The 6 x 6 block exactly as printed, 0-based."""
    l2, l4, l6, l8, l10, l12 = (lam**k for k in (2, 4, 6, 8, 10, 12))
    r2 = 4 * l4 - 4 * l2 + 1
    r3 = 5 * l6 - 8 * l4 + 3 * l2
    r4 = 7 * l8 - 12 * l6 + 5 * l4
    r5 = 9 * l10 - 16 * l8 + 7 * l6
    r6 = 11 * l12 - 20 * l10 + 9 * l8
    mod3 = 5 * l6 - 9 * l4 + 3 * l2
    mod2 = 4 * l4 - 3 * l2 + 1
    return np.array(
        [
            [l2 - l4, l2 - l4, l2, 0, 0, 0],
            [r2, 0, 0, 0, 0, 0],
            [r3, r2, 0, 0, 0, 0],
            [r4, r3, r2, 0, 0, 0],
            [r5, r4, mod3, mod2, 0, 0],
            [r6, r5, r4, mod3, mod2, 0],
        ]
    )


def identity(size=10):
    coeffs = np.zeros(size)
    coeffs[0] = 1.0
    return ToeplitzWitness(None, coeffs, Kind.PRODUCT)


class TestBuildD:
    def test_identity_at_zero(self):
        np.testing.assert_array_equal(build_D(0.0, 3).coeffs, [1.0, 0.0, 0.0])

    def test_half(self):
        np.testing.assert_allclose(build_D(0.5, 3).coeffs, [0.75, 0.1875, 0.046875], rtol=1e-15)

    @pytest.mark.parametrize("lam", np.linspace(0.0, 0.99, 12))
    def test_stochastic_everywhere(self, lam):
        assert is_column_stochastic(build_D(lam, 50)).is_column_stochastic

    @pytest.mark.parametrize("m", [1, 2, 3, 4])
    def test_powers_are_negative_binomial(self, m):
        lam = 0.6
        coeffs = build_D(lam, 40).power(m).coeffs
        np.testing.assert_allclose(coeffs, nbinom.pmf(np.arange(40), m, 1 - lam**2), atol=1e-15)


class TestA1011:
    def test_lambda_zero(self):
        np.testing.assert_array_equal(build_A_10_11(0.0, 5).coeffs, [0.0, 1.0, 0.0, 0.0, 0.0])

    def test_prefactor_form(self):
        lam = 0.3
        x = lam**2
        printed = np.array([x, 2 * x**2 - 4 * x + 1, 2 * x**3 - 4 * x**2 + 2 * x, 2 * x**4 - 4 * x**3 + 2 * x**2]) / (1 - x)
        np.testing.assert_allclose(build_A_10_11(lam, 4).coeffs, printed, rtol=1e-14)

    def test_nonnegativity_boundary(self):
        root = brentq(lambda lam: build_A_10_11(lam, 2).coeffs[1], 0.3, 0.7, xtol=1e-15)
        assert root == pytest.approx(THRESHOLD_10_11, abs=1e-12)
        assert THRESHOLD_10_11 == pytest.approx(0.541196, abs=1e-6)

    def test_maps_p10_to_p11(self):
        lam = 0.4
        w = build_A_10_11(lam, 60)
        assert verify_witness(w, distribution((1, 0), lam), distribution((1, 1), lam)) < 1e-12


class TestA0011:
    def test_displayed_rows(self):
        lam = 0.45
        x = lam**2
        printed = [x, 3 * x**2 - 4 * x + 1, 5 * x**3 - 8 * x**2 + 3 * x, 7 * x**4 - 12 * x**3 + 5 * x**2]
        np.testing.assert_allclose(build_A_00_11(lam, 4).coeffs, printed, rtol=1e-13)

    def test_nonnegativity_boundary(self):
        root = brentq(lambda lam: build_A_00_11(lam, 2).coeffs[1], 0.3, 0.7, xtol=1e-15)
        assert root == pytest.approx(THRESHOLD_00_11, abs=1e-12)

    @pytest.mark.parametrize("lam", [0.2, 0.5, 0.7])
    def test_recurrence(self, lam):
        a = a_00_11(lam, np.arange(32))
        x = lam**2
        for n in range(1, 31):
            assert abs(a[n + 1] - (x * a[n] + 2 * x**n * (1 - x) ** 2)) < 1e-14

    def test_printed_recurrence_exponent_fails(self):
        # with (1 - lam)^2 instead of (1 - lam^2)^2 the recurrence breaks
        lam = 0.5
        a = a_00_11(lam, np.arange(4))
        assert abs(a[2] - (lam**2 * a[1] + 2 * lam**2 * (1 - lam) ** 2)) > 1e-2

    def test_maps_p00_to_p11(self):
        lam = 0.5
        w = build_A_00_11(lam, 60)
        assert verify_witness(w, distribution((0, 0), lam), distribution((1, 1), lam)) < 1e-12


class TestAPrime:
    @pytest.mark.parametrize("lam", [0.2, 0.5, 0.66])
    def test_reproduces_displayed_block(self, lam):
        np.testing.assert_allclose(build_A_prime(lam, 6).entries, displayed_a_prime(lam), atol=1e-15)

    def test_generator_matches_block(self):
        w = build_A_prime(0.55, 30)
        block = np.array([[w.generator(i, j) for j in range(30)] for i in range(30)])
        np.testing.assert_array_equal(block, w.entries)

    def test_critical_entry(self):
        lam = 0.6
        entry = build_A_prime(lam, 6).entries[4, 2]
        assert entry == pytest.approx(5 * lam**6 - 9 * lam**4 + 3 * lam**2, rel=1e-14)
        # the same condition written after dividing by lam^2
        assert entry / lam**2 == pytest.approx(5 * lam**4 - 9 * lam**2 + 3, rel=1e-14)
        root = brentq(lambda t: build_A_prime(t, 6).entries[4, 2], 0.5, 0.7, xtol=1e-15)
        assert root == pytest.approx(THRESHOLD_00_11_PRIME, abs=1e-12)
        assert THRESHOLD_00_11_PRIME == pytest.approx(0.6646, abs=1e-4)

    def test_maps_p00_to_p11(self):
        lam = 0.6
        w = build_A_prime(lam, 80)
        assert verify_witness(w, distribution((0, 0), lam), distribution((1, 1), lam)) < 1e-10

    def test_column_sums(self):
        w = build_A_prime(0.3, 40)
        np.testing.assert_allclose(w.column_sums, 1.0, atol=1e-12)

    def test_column_tails_against_long_block(self):
        lam = 0.5
        short, long = build_A_prime(lam, 20), build_A_prime(lam, 400)
        brute = long.entries[20:, :20].sum(axis=0)
        np.testing.assert_allclose(short.column_tails, brute, atol=1e-15)

    def test_rejects_small_size(self):
        with pytest.raises(ValueError):
            build_A_prime(0.3, 5)


class TestTails:
    @pytest.mark.parametrize("builder", [build_D, build_A_10_11, build_A_00_11])
    @pytest.mark.parametrize("K", [1, 2, 5, 30])
    def test_analytic_tail_matches_long_sum(self, builder, K):
        lam = 0.7
        long = builder(lam, 3000).coeffs
        assert builder(lam, K).tail == pytest.approx(math.fsum(long[K:]), abs=1e-13)


class TestStochasticity:
    def test_d_high_lambda(self):
        assert is_column_stochastic(build_D(0.9, 50)).is_column_stochastic

    def test_a1011_above_threshold(self):
        report = is_column_stochastic(build_A_10_11(0.6, 50))
        assert not report.is_column_stochastic
        assert report.first_negative[:2] == (1, 0)
        assert report.first_negative[2] < 0

    def test_identity(self):
        assert is_column_stochastic(identity()).is_column_stochastic

    def test_a_prime_first_negative(self):
        report = is_column_stochastic(build_A_prime(0.67, 30))
        assert not report.is_column_stochastic
        assert report.first_negative[:2] == (4, 2)

    def test_row_sum_violation(self):
        w = ToeplitzWitness(None, [0.5, 0.7], Kind.PRODUCT, tail=-0.2)
        report = is_column_stochastic(w)
        assert not report.is_column_stochastic
        assert report.max_row_sum == pytest.approx(1.2)


class TestVerify:
    def test_identity(self):
        p = distribution((2, 1), 0.4)
        assert verify_witness(identity(len(p)), p, p) == 0.0

    def test_d_chain_step(self):
        lam = 0.5
        assert verify_witness(build_D(lam, 50), distribution((0, 0), lam), distribution((1, 0), lam)) < 1e-14

    def test_d_squared(self):
        lam = 0.5
        w = build_D(lam, 50).power(2)
        assert verify_witness(w, distribution((0, 0), lam), distribution((2, 0), lam)) < 1e-13

    def test_incompatible(self):
        p = Distribution.from_probs([])
        with pytest.raises(IncompatibleTruncation):
            verify_witness(build_D(0.3, 5), p, p)


class TestDeconvolve:
    def test_self_gives_identity(self):
        p = distribution((1, 1), 0.5)
        coeffs = toeplitz_deconvolve(p, p).coeffs
        assert coeffs[0] == pytest.approx(1.0, abs=1e-15)
        assert np.max(np.abs(coeffs[1:])) < 1e-13

    def test_rediscovers_d(self):
        lam = 0.5
        w = toeplitz_deconvolve(distribution((0, 0), lam), distribution((1, 0), lam))
        np.testing.assert_allclose(w.coeffs, build_D(lam, w.size).coeffs, atol=1e-14)

    def test_rediscovers_a1011(self):
        lam = 0.4
        w = toeplitz_deconvolve(distribution((1, 0), lam), distribution((1, 1), lam))
        np.testing.assert_allclose(w.coeffs, build_A_10_11(lam, w.size).coeffs, atol=1e-13)

    def test_zero_leading_mass(self):
        with pytest.raises(DivisionByZeroMass):
            toeplitz_deconvolve(distribution((1, 1), 0.0), distribution((0, 0), 0.0))

    def test_size_larger_than_prefix(self):
        p = distribution((0, 0), 0.3)
        with pytest.raises(IncompatibleTruncation):
            toeplitz_deconvolve(p, p, len(p) + 1)

    def test_coefficient_sum_tends_to_one(self):
        lam = 0.6
        p, q = distribution((0, 0), lam), distribution((1, 1), lam)
        sums = [math.fsum(toeplitz_deconvolve(p, q, k).coeffs) for k in (5, 20, len(p))]
        assert abs(sums[-1] - 1) < abs(sums[1] - 1) < abs(sums[0] - 1)
        assert abs(sums[-1] - 1) < 1e-10


pairs = st.tuples(st.integers(0, 3), st.integers(0, 3))


@settings(max_examples=40, deadline=None)
@given(pairs, pairs, st.floats(0.05, 0.7))
def test_deconvolution_round_trip(a, b, lam):
    p, q = distribution(a, lam), distribution(b, lam)
    w = toeplitz_deconvolve(p, q)
    scale = max(1.0, float(np.max(np.abs(w.coeffs))))
    assert verify_witness(w, p, q) <= 1e-12 * scale


@settings(max_examples=60, deadline=None)
@given(pairs, pairs, st.floats(0.05, 0.85))
def test_lemma_direction(a, b, lam):
    p, q = distribution(a, lam), distribution(b, lam)
    w = toeplitz_deconvolve(p, q)
    if is_column_stochastic(w).is_column_stochastic and verify_witness(w, p, q) < 1e-10:
        assert majorizes(p, q).outcome is not Outcome.DOES_NOT_MAJORIZE
