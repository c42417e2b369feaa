import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from htnn.hadamard import (
    SYMMETRIC,
    FOLDED_INVERSE,
    conv_theorem_check,
    dyadic_conv,
    fht1d,
    fht2d,
    hadamard_matrix,
    ifht1d,
    ifht2d,
    naive_ht,
    naive_ht2d,
    run_conv_theorem_trials,
    run_involution_trials,
)


class TestHadamardMatrix:
    def test_order_one(self):
        assert_array_equal(hadamard_matrix(1), [[1]])

    def test_order_two(self):
        assert_array_equal(hadamard_matrix(2), [[1, 1], [1, -1]])

    def test_order_four_matches_block_recursion(self):
        h2 = hadamard_matrix(2)
        expected = np.block([[h2, h2], [h2, -h2]])
        assert_array_equal(hadamard_matrix(4), expected)
        assert_array_equal(expected,
                           [[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]])

    def test_order_four_matches_kronecker_power(self):
        h2 = hadamard_matrix(2)
        assert_array_equal(hadamard_matrix(8), np.kron(h2, np.kron(h2, h2)))

    @pytest.mark.parametrize("n", [1, 2, 16, 128, 512])
    def test_orthogonality_exact_integer(self, n):
        h = hadamard_matrix(n)
        assert_array_equal(h @ h.T, n * np.eye(n, dtype=np.int64))
        assert_array_equal(h, h.T)

    @pytest.mark.parametrize("n", [0, 3, 12, 100])
    def test_rejects_non_power_of_two(self, n):
        with pytest.raises(ValueError, match="power of two"):
            hadamard_matrix(n)


class TestNaiveTransform:
    def test_impulse_spreads_uniformly(self):
        assert_allclose(naive_ht([1, 0, 0, 0]), [0.5, 0.5, 0.5, 0.5])

    def test_constant_concentrates_at_dc(self):
        assert_allclose(naive_ht([1, 1, 1, 1]), [2, 0, 0, 0])

    def test_explicit_order_four_product(self):
        # (1/2) * H4 @ [10, 1, -2, 3]
        assert_allclose(naive_ht([10, 1, -2, 3]), [6, 2, 5, 7])

    def test_rejects_bad_length(self):
        with pytest.raises(ValueError, match="power of two"):
            naive_ht([1.0, 2.0, 3.0])


class TestFastTransform:
    def test_matches_naive_on_worked_cases(self):
        for x in ([1, 0, 0, 0], [1, 1, 1, 1], [10, 1, -2, 3]):
            assert_allclose(fht1d(x), naive_ht(x), rtol=1e-12, atol=1e-15)

    @pytest.mark.parametrize("n", [1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024])
    def test_matches_naive_oracle(self, n, rng):
        x = rng.standard_normal(n)
        assert_allclose(fht1d(x, SYMMETRIC), naive_ht(x, SYMMETRIC),
                        rtol=1e-12, atol=1e-12)
        assert_allclose(fht1d(x, FOLDED_INVERSE), naive_ht(x, FOLDED_INVERSE),
                        rtol=1e-12, atol=1e-12)

    def test_large_random_case(self, rng):
        x = rng.standard_normal(1024)
        assert_allclose(fht1d(x), naive_ht(x), rtol=1e-12, atol=1e-12)

    def test_involution_under_symmetric(self, rng):
        for n in (1, 2, 64, 1024, 4096):
            x = rng.standard_normal(n)
            assert_allclose(fht1d(fht1d(x)), x, rtol=1e-12, atol=1e-12)

    def test_parseval_energy(self, rng):
        x = rng.standard_normal(256)
        assert np.linalg.norm(fht1d(x)) == pytest.approx(np.linalg.norm(x), rel=1e-12)

    def test_input_not_mutated(self, rng):
        x = rng.standard_normal(64)
        snapshot = x.copy()
        fht1d(x)
        assert_array_equal(x, snapshot)

    def test_round_trip_both_conventions(self, rng):
        x = rng.standard_normal(128)
        assert_allclose(ifht1d(fht1d(x, SYMMETRIC), SYMMETRIC), x, atol=1e-12)
        assert_allclose(ifht1d(fht1d(x, FOLDED_INVERSE), FOLDED_INVERSE), x, atol=1e-12)

    def test_folded_inverse_scales(self):
        # unnormalized forward: constant vector -> N at index 0; 1/N inverse recovers it
        assert_allclose(fht1d([1, 1, 1, 1], FOLDED_INVERSE), [4, 0, 0, 0])
        assert_allclose(ifht1d([4, 0, 0, 0], FOLDED_INVERSE), [1, 1, 1, 1])

    def test_inverse_of_constant_case(self):
        assert_allclose(ifht1d([2, 0, 0, 0], SYMMETRIC), [1, 1, 1, 1])


class Test2DTransform:
    def test_constant_image_concentrates_at_dc(self):
        assert_allclose(fht2d(np.ones((2, 2))), [[2, 0], [0, 0]])

    def test_identity_matrix_is_fixed_point(self):
        # (1/2) H2 @ I @ H2 == I, confirmed by the matrix-product oracle
        eye = np.eye(2)
        assert_allclose(naive_ht2d(eye), eye)
        assert_allclose(fht2d(eye), eye)

    @pytest.mark.parametrize("shape", [(2, 2), (8, 8), (4, 16), (64, 64), (1024, 1024)])
    def test_matches_double_matrix_product_oracle(self, shape, rng):
        x = rng.standard_normal(shape)
        assert_allclose(fht2d(x), naive_ht2d(x), rtol=1e-12, atol=1e-10)

    def test_row_column_separability_order_immaterial(self, rng):
        x = rng.standard_normal((8, 16))
        by_rows_then_cols = fht2d(x)
        by_cols_then_rows = fht2d(x.T).T
        assert_allclose(by_rows_then_cols, by_cols_then_rows, atol=1e-12)

    def test_round_trip(self, rng):
        x = rng.standard_normal((8, 8))
        assert_allclose(ifht2d(fht2d(x)), x, atol=1e-12)
        assert_allclose(ifht2d(fht2d(x, FOLDED_INVERSE), FOLDED_INVERSE), x, atol=1e-12)

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError, match="power of two"):
            fht2d(np.ones((3, 4)))


class TestDyadicConvolution:
    def test_identity_kernel(self, rng):
        x = rng.standard_normal(8)
        kernel = np.zeros(8)
        kernel[0] = 1.0
        assert_allclose(dyadic_conv(kernel, x), x)

    @pytest.mark.parametrize("k", [1, 3, 7])
    def test_impulse_at_k_is_dyadic_shift(self, k, rng):
        x = rng.standard_normal(8)
        kernel = np.zeros(8)
        kernel[k] = 1.0
        assert_allclose(dyadic_conv(kernel, x), x[np.arange(8) ^ k])

    def test_commutative(self, rng):
        a, x = rng.standard_normal(16), rng.standard_normal(16)
        assert_allclose(dyadic_conv(a, x), dyadic_conv(x, a), atol=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            dyadic_conv(np.ones(4), np.ones(8))


class TestConvolutionTheorem:
    def test_scalar_case_always_holds(self):
        assert conv_theorem_check(np.array([3.0]), np.array([-2.0])).ok

    def test_random_pair_transform_identity(self, rng):
        # both sides computed by brute force: dyadic_conv + naive matrix transform
        a, x = rng.standard_normal(8), rng.standard_normal(8)
        lhs = naive_ht(dyadic_conv(a, x))
        rhs = np.sqrt(8) * naive_ht(a) * naive_ht(x)
        assert_allclose(lhs, rhs, atol=1e-12)
        assert conv_theorem_check(a, x, tol=1e-10).ok

    def test_perturbed_pair_detected(self, rng):
        a, x = rng.standard_normal(16), rng.standard_normal(16)
        report = conv_theorem_check(a, x, tol=1e-10)
        assert report.ok
        # a deliberately broken tolerance flags the same pair
        assert not conv_theorem_check(a, x, tol=report.max_abs_error / 10 + 1e-30).ok

    def test_trial_runner_passes(self):
        report = run_conv_theorem_trials(max_n=64, trials=50, tol=1e-10, seed=3)
        assert report["ok"]
        assert report["max_abs_error"] < 1e-10

    def test_involution_runner_detects_absurd_tolerance(self):
        assert not run_involution_trials(max_n=256, trials=5, tol=1e-30, seed=0)["ok"]
