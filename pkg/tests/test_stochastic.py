"""Validation, primitivity, invariant distributions, power cache, file I/O."""

import math

import numpy as np
import pytest

from consensus_robustness import (
    MatrixPowerCache,
    errors,
    family_matrix,
    invariant_distribution,
    is_primitive,
    lazy,
    matrix_power_cache,
    mixing_example,
    read_matrix,
    validate_stochastic,
    write_matrix,
)
from consensus_robustness.stochastic import default_cache_mb


def directed_cycle(n):
    A = np.zeros((n, n))
    for i in range(n):
        A[i, (i + 1) % n] = 1.0
    return A


class TestValidation:
    def test_identity_accepted(self):
        A = validate_stochastic(np.eye(3))
        assert A.n == 3
        assert np.array_equal(A.entries, np.eye(3))

    def test_row_sum_violation_reports_row_and_deviation(self):
        with pytest.raises(errors.RowSumViolation) as info:
            validate_stochastic([[0.5, 0.6], [0.5, 0.5]])
        assert info.value.row == 0
        assert info.value.deviation == pytest.approx(0.1)

    def test_row_sum_violation_lists_all_offenders(self):
        with pytest.raises(errors.RowSumViolation) as info:
            validate_stochastic([[0.9, 0.0], [0.0, 1.2]])
        assert [row for row, _ in info.value.violations] == [0, 1]

    def test_mixing_example_b5_accepted(self):
        B5 = 0.75 * np.eye(5) + 0.25 * np.full((5, 5), 0.2)
        A = validate_stochastic(B5)
        assert A.entries[0, 0] == pytest.approx(0.8)
        assert A.entries[0, 1] == pytest.approx(0.05)

    def test_negative_entry_rejected_with_location(self):
        raw = np.eye(3)
        raw[1, 2] = -1e-13
        raw[1, 1] = 1.0 + 1e-13
        with pytest.raises(errors.NegativeEntry) as info:
            validate_stochastic(raw)
        assert info.value.entries[0][:2] == (1, 2)

    def test_float_noise_negatives_clamped_to_zero(self):
        raw = np.eye(3)
        raw[0, 1] = -5e-15
        raw[0, 0] = 1.0 + 5e-15
        A = validate_stochastic(raw)
        assert A.entries[0, 1] == 0.0

    def test_non_square_rejected(self):
        with pytest.raises(errors.NonSquare):
            validate_stochastic(np.ones((2, 3)) / 3)

    def test_non_finite_rejected(self):
        raw = np.eye(2)
        raw[0, 0] = np.nan
        with pytest.raises(errors.NegativeEntry):
            validate_stochastic(raw)

    def test_entries_are_immutable(self):
        A = validate_stochastic(np.eye(3))
        with pytest.raises(ValueError):
            A.entries[0, 0] = 0.5


class TestPrimitivity:
    @pytest.mark.parametrize("n", [3, 4, 5, 8])
    def test_directed_cycle_is_periodic_n(self, n):
        report = is_primitive(validate_stochastic(directed_cycle(n)))
        assert not report
        assert report.reason == "periodic"
        assert report.period == n

    @pytest.mark.parametrize("n", [3, 5, 8])
    def test_lazy_directed_cycle_is_primitive(self, n):
        A = lazy(validate_stochastic(directed_cycle(n)))
        assert is_primitive(A)

    def test_complete_network_is_primitive(self):
        assert is_primitive(validate_stochastic(np.full((6, 6), 1.0 / 6)))

    def test_reducible_block_diagonal(self):
        A = np.zeros((4, 4))
        A[:2, :2] = 0.5
        A[2:, 2:] = 0.5
        report = is_primitive(validate_stochastic(A))
        assert not report
        assert report.reason == "reducible"

    def test_star_before_lazy_has_period_two(self):
        report = is_primitive(family_matrix("star", 5))
        assert report.reason == "periodic"
        assert report.period == 2

    @pytest.mark.parametrize(
        "family,n",
        [("lazy-star", 6), ("lazy-cycle", 8), ("mixing-example", 5), ("lazy-path", 7),
         ("lazy-directed-cycle", 12)],
    )
    def test_wielandt_positivity_cross_check(self, family, n):
        # Primitive implies A^((n-1)^2 + 1) strictly positive (small n only).
        A = family_matrix(family, n)
        assert is_primitive(A)
        power = np.linalg.matrix_power(A.entries, (n - 1) ** 2 + 1)
        assert np.all(power > 0)


class TestInvariantDistribution:
    def test_complete_network_uniform(self):
        n = 6
        pi = invariant_distribution(validate_stochastic(np.full((n, n), 1.0 / n)))
        assert np.allclose(pi.pi, 1.0 / n, atol=1e-12)
        assert pi.residual <= 1e-10

    @pytest.mark.parametrize("n", [5, 8, 16])
    def test_doubly_stochastic_uniform(self, n):
        pi = invariant_distribution(family_matrix("lazy-cycle", n))
        assert np.allclose(pi.pi, 1.0 / n, atol=1e-10)

    @pytest.mark.parametrize("n", [4, 8, 20])
    def test_lazy_star_closed_form(self, n):
        A = family_matrix("lazy-star", n)
        pi = invariant_distribution(A)
        assert pi.pi[0] == pytest.approx(0.5, abs=1e-10)
        assert np.allclose(pi.pi[1:], 1.0 / (2 * (n - 1)), atol=1e-10)

    def test_matches_dense_eigenvector_oracle(self):
        A = family_matrix("flocking-random", 12, p=0.5, seed=11)
        pi = invariant_distribution(A)
        w, v = np.linalg.eig(A.entries.T)
        lead = np.real(v[:, np.argmin(np.abs(w - 1.0))])
        lead /= lead.sum()
        assert np.allclose(pi.pi, lead, atol=1e-9)

    @pytest.mark.parametrize("family", ["lazy-star", "lazy-cycle", "mixing-example"])
    def test_fixed_point_under_powers(self, family):
        A = family_matrix(family, 8)
        pi = invariant_distribution(A)
        for k in (1, 2, 4, 8):
            Ak = np.linalg.matrix_power(A.entries, k)
            assert np.max(np.abs(pi.pi @ Ak - pi.pi)) <= 1e-9

    def test_strictly_positive_for_primitive(self):
        pi = invariant_distribution(family_matrix("lazy-path", 9))
        assert np.all(pi.pi > 0)

    def test_rejects_non_primitive(self):
        with pytest.raises(errors.NotPrimitive):
            invariant_distribution(validate_stochastic(directed_cycle(5)))


class TestPowerCache:
    def test_identity_powers(self):
        cache = matrix_power_cache(validate_stochastic(np.eye(4)), 3)
        assert len(cache) == 4
        for level in cache:
            assert np.array_equal(level, np.eye(4))

    def test_b5_closed_form_fourth_power(self):
        cache = matrix_power_cache(mixing_example(5), 2)
        alpha = 0.75
        expected = alpha**4 * np.eye(5) + (1 - alpha**4) * np.full((5, 5), 0.2)
        assert np.max(np.abs(cache[2] - expected)) <= 1e-12

    def test_matches_repeated_multiplication_oracle(self):
        A = family_matrix("lazy-cycle", 8)
        cache = matrix_power_cache(A, 4)
        oracle = np.eye(8)
        for _ in range(16):
            oracle = oracle @ A.entries
        assert np.max(np.abs(cache[4] - oracle)) <= 1e-12

    def test_cached_powers_stay_row_stochastic(self):
        cache = matrix_power_cache(family_matrix("lazy-star", 12), 6)
        for level in cache:
            assert np.max(np.abs(level.sum(axis=1) - 1.0)) <= 1e-10

    @pytest.mark.parametrize("k", [1, 3, 7, 21, 100])
    def test_power_binary_assembly(self, k):
        A = family_matrix("lazy-cycle", 6)
        cache = matrix_power_cache(A, 0)
        expected = np.linalg.matrix_power(A.entries, k)
        assert np.max(np.abs(cache.power(k) - expected)) <= 1e-12

    def test_power_zero_is_identity(self):
        cache = matrix_power_cache(family_matrix("lazy-cycle", 5), 0)
        assert np.array_equal(cache.power(0), np.eye(5))

    def test_memory_cap_enforced(self):
        A = family_matrix("lazy-cycle", 64)
        with pytest.raises(errors.DimensionTooLarge):
            matrix_power_cache(A, 50, cache_mb=0.1)

    def test_env_var_controls_default_cap(self, monkeypatch):
        monkeypatch.setenv("CONSENSUS_ROBUSTNESS_CACHE_MB", "0.05")
        assert default_cache_mb() == pytest.approx(0.05)
        A = family_matrix("lazy-cycle", 64)
        with pytest.raises(errors.DimensionTooLarge):
            MatrixPowerCache(A, 50)

    def test_bad_env_var_rejected(self, monkeypatch):
        monkeypatch.setenv("CONSENSUS_ROBUSTNESS_CACHE_MB", "lots")
        with pytest.raises(errors.UsageError):
            default_cache_mb()


class TestMatrixFiles:
    def test_round_trip_preserves_values_exactly(self, tmp_path):
        A = family_matrix("flocking-random", 9, p=0.6, seed=2)
        path = tmp_path / "m.txt"
        write_matrix(path, A)
        raw = read_matrix(path)
        assert np.array_equal(raw, A.entries)

    def test_comments_and_blank_lines_skipped(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("# header\n2\n\n1 0  # trailing comment\n0.5 0.5\n")
        raw = read_matrix(path)
        assert raw.tolist() == [[1.0, 0.0], [0.5, 0.5]]

    def test_wrong_row_count_rejected(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("3\n1 0 0\n0 1 0\n")
        with pytest.raises(errors.UsageError):
            read_matrix(path)

    def test_wrong_width_rejected(self, tmp_path):
        path = tmp_path / "m.txt"
        path.write_text("2\n1 0 0\n0 1\n")
        with pytest.raises(errors.UsageError):
            read_matrix(path)

    def test_17_digit_rendering(self, tmp_path):
        value = 1.0 / 3.0
        raw = np.array([[value, 1 - value], [1 - value, value]])
        path = tmp_path / "m.txt"
        write_matrix(path, raw)
        again = read_matrix(path)
        assert again[0, 0] == value


def test_log_time_iteration_budget_formula():
    # The fallback threshold 10 n log n stays modest at the sizes we sweep.
    assert int(math.ceil(10 * 128 * math.log(128))) < 10_000
