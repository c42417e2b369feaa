import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from htnn.hadamard import SYMMETRIC, fht1d, fht2d, naive_ht
from htnn.quantum import (
    EXACT,
    SAMPLED,
    MeasurementPlan,
    apply_hadamard_all,
    default_epsilon,
    hybrid_ht,
    hybrid_ht2d,
    lemma1_check,
    measure,
    prepare_state,
    run_lemma1_trials,
)

SQ2 = np.sqrt(0.5)


class TestStatePreparation:
    def test_basis_state(self):
        state = prepare_state([1.0, 0.0])
        assert state.num_qubits == 1
        assert_allclose(state.amplitudes, [1.0, 0.0])

    def test_equal_superposition(self):
        state = prepare_state([SQ2, SQ2])
        assert_allclose(state.amplitudes, [SQ2, SQ2])

    def test_rejects_non_unit_norm(self):
        with pytest.raises(ValueError, match="unit-norm"):
            prepare_state([0.9, 0.0])

    def test_rejects_bad_length(self):
        v = np.ones(3) / np.sqrt(3)
        with pytest.raises(ValueError, match="power of two"):
            prepare_state(v)


class TestGateApplication:
    def test_single_qubit_hadamard(self):
        out = apply_hadamard_all(prepare_state([1.0, 0.0]))
        assert_allclose(out.amplitudes, [SQ2, SQ2])

    def test_involution(self):
        out = apply_hadamard_all(apply_hadamard_all(prepare_state([SQ2, SQ2])))
        assert_allclose(out.amplitudes, [SQ2, SQ2], atol=1e-15)

    def test_matches_fast_transform(self, rng):
        x = rng.standard_normal(32)
        x /= np.linalg.norm(x)
        out = apply_hadamard_all(prepare_state(x))
        assert_allclose(out.amplitudes, fht1d(x, SYMMETRIC), atol=1e-12)

    def test_norm_preserved(self, rng):
        for _ in range(20):
            x = rng.standard_normal(64)
            out = apply_hadamard_all(prepare_state(x / np.linalg.norm(x)))
            assert np.linalg.norm(out.amplitudes) == pytest.approx(1.0, abs=1e-12)


class TestMeasurement:
    def test_exact_probabilities(self):
        probs = measure(prepare_state([SQ2, SQ2]), MeasurementPlan(EXACT))
        assert_allclose(probs, [0.5, 0.5])

    def test_deterministic_outcome_under_sampling(self):
        probs = measure(prepare_state([1.0, 0.0]),
                        MeasurementPlan(SAMPLED, shots=1000, seed=1))
        assert_allclose(probs, [1.0, 0.0])

    def test_same_seed_same_counts(self, rng):
        x = rng.standard_normal(16)
        state = prepare_state(x / np.linalg.norm(x))
        plan = MeasurementPlan(SAMPLED, shots=4096, seed=99)
        assert_array_equal(measure(state, plan), measure(state, plan))

    def test_sampled_probabilities_sum_to_one(self, rng):
        x = rng.standard_normal(8)
        state = prepare_state(x / np.linalg.norm(x))
        probs = measure(state, MeasurementPlan(SAMPLED, shots=12345, seed=0))
        assert probs.sum() == pytest.approx(1.0, abs=1e-12)

    def test_zero_shots_rejected(self):
        with pytest.raises(ValueError, match="positive shot count"):
            MeasurementPlan(SAMPLED, shots=0)


class TestHybridTransform:
    def test_worked_trace(self):
        report = hybrid_ht(np.array([1.0, -1.0, 0.0, 0.0]), epsilon=1.0)
        assert report.b == pytest.approx(3.0)
        assert report.c == pytest.approx(np.sqrt(10.0))
        assert report.delta == pytest.approx(1.0)
        assert_allclose(report.probabilities, [0.1, 0.4, 0.1, 0.4], atol=1e-12)
        assert_allclose(report.result, [0.0, 1.0, 0.0, 1.0], atol=1e-12)
        assert_allclose(report.result, fht1d([1.0, -1.0, 0.0, 0.0]), atol=1e-12)

    def test_zero_vector(self):
        report = hybrid_ht(np.zeros(8), epsilon=1.0)
        assert_allclose(report.result, np.zeros(8), atol=1e-12)

    def test_matches_naive_oracle(self):
        report = hybrid_ht(np.array([10.0, 1.0, -2.0, 3.0]))
        assert_allclose(report.result, [6, 2, 5, 7], atol=1e-10)
        assert_allclose(report.result, naive_ht([10, 1, -2, 3]), atol=1e-10)

    def test_exact_equals_fast_transform_across_sizes(self, rng):
        for n in (1, 2, 4, 16, 64, 256):
            for _ in range(20):
                x = rng.uniform(-5, 5, n)
                assert_allclose(hybrid_ht(x).result, fht1d(x), atol=1e-10)

    def test_epsilon_free_choice(self, rng):
        x = rng.standard_normal(16)
        for eps in (1e-6, 1.0, 1e4):
            assert_allclose(hybrid_ht(x, epsilon=eps).result, fht1d(x), atol=1e-8)

    def test_rejects_nonpositive_epsilon(self):
        with pytest.raises(ValueError, match="positive"):
            hybrid_ht(np.ones(4), epsilon=0.0)

    def test_shift_satisfies_positivity_precondition(self, rng):
        x = rng.standard_normal(32)
        report = hybrid_ht(x, epsilon=0.5)
        assert report.b > np.sum(np.abs(x[1:]))
        shifted = x.copy()
        shifted[0] = report.b
        assert lemma1_check(shifted)

    def test_default_epsilon_positive_and_relative(self):
        assert default_epsilon(np.zeros(4)) == pytest.approx(1e-3)
        assert default_epsilon(1000 * np.ones(4)) == pytest.approx(1e-3 * 4001.0)

    def test_sampled_reproducible(self, rng):
        x = rng.standard_normal(8)
        plan = MeasurementPlan(SAMPLED, shots=10_000, seed=7)
        assert_array_equal(hybrid_ht(x, plan=plan).result, hybrid_ht(x, plan=plan).result)

    def test_shot_noise_shrinks_with_more_shots(self, rng):
        x = rng.uniform(-1, 1, 8)
        exact = fht1d(x)
        errs = {}
        for shots in (10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6):
            plan = MeasurementPlan(SAMPLED, shots=shots, seed=11)
            approx = hybrid_ht(x, plan=plan).result
            errs[shots] = float(np.sqrt(np.mean((approx - exact) ** 2)))
        assert errs[10 ** 6] < errs[10 ** 3]
        assert errs[10 ** 6] < 0.02


class TestHybrid2D:
    def test_constant_image(self):
        out = hybrid_ht2d(np.ones((2, 2)))
        assert_allclose(out, [[2, 0], [0, 0]], atol=1e-12)

    def test_exact_matches_fht2d(self, rng):
        x = rng.standard_normal((8, 8))
        assert_allclose(hybrid_ht2d(x), fht2d(x), atol=1e-9)

    def test_sampled_error_bound_unit_scale(self, rng):
        x = rng.uniform(-1, 1, (8, 8))
        plan = MeasurementPlan(SAMPLED, shots=10 ** 6, seed=21)
        out = hybrid_ht2d(x, plan=plan)
        assert np.max(np.abs(out - fht2d(x))) < 0.05

    def test_sampled_deterministic_per_row_subseeds(self, rng):
        x = rng.standard_normal((4, 4))
        plan = MeasurementPlan(SAMPLED, shots=50_000, seed=5)
        assert_array_equal(hybrid_ht2d(x, plan=plan), hybrid_ht2d(x, plan=plan))


class TestLemma1:
    def test_dominant_first_entry(self):
        # 10 > |1| + |-2| + |3|; transform is [6, 2, 5, 7]
        assert lemma1_check([10, 1, -2, 3])

    def test_violated_condition(self):
        # 1 < 2; transform (1/2)[3, -1, 3, -1] has negative entries
        assert naive_ht([1, 2, 0, 0]).min() < 0
        assert not lemma1_check([1, 2, 0, 0])

    @pytest.mark.parametrize("eps", [1e-9, 1e-3, 5.0])
    def test_positive_impulse(self, eps):
        x = np.zeros(16)
        x[0] = eps
        assert lemma1_check(x)

    def test_trial_runner(self):
        report = run_lemma1_trials(n=32, trials=200, seed=0)
        assert report["ok"]
        assert report["violations"] == 0
