"""Variance parameter, bound verification, exponent fits, sweeps."""

import numpy as np
import pytest

from consensus_robustness import (
    errors,
    family_matrix,
    fit_exponent,
    flocking_bounds_check,
    mixing_example,
    pi_projection_comparison,
    projector_uniform,
    ratio_constancy,
    sweep,
    sweep_to_csv,
    var0,
    verify_theorem_bounds,
)
from consensus_robustness.analysis import SWEEP_COLUMNS


class TestVar0:
    def test_complete_network_raises(self):
        with pytest.raises(errors.ConsensusAlreadyReached):
            var0(family_matrix("complete", 6))

    @pytest.mark.parametrize("n", [5, 9, 16])
    def test_mixing_example_closed_form(self, n):
        alpha = 1.0 - 1.0 / (n - 1)
        assert var0(mixing_example(n)) == pytest.approx(alpha * (1.0 - 1.0 / n), abs=1e-12)

    def test_lazy_star_matches_projected_entry_oracle(self):
        A = family_matrix("lazy-star", 4)
        oracle = np.max(np.abs(projector_uniform(4).matrix @ A.entries))
        assert var0(A) == pytest.approx(oracle, abs=1e-14)
        assert oracle == pytest.approx(1.0 / 3.0, abs=1e-12)


class TestTheoremBounds:
    @pytest.mark.parametrize("family", ["lazy-star", "lazy-cycle"])
    @pytest.mark.parametrize("n", [8, 16, 32])
    def test_all_three_inequalities_hold(self, family, n):
        check = verify_theorem_bounds(family_matrix(family, n))
        assert check.trace_upper_ok
        assert check.sigma_upper_ok
        assert check.sigma_lower_ok
        assert check.all_ok

    def test_mixing_example_closed_form_headroom(self):
        n = 16
        check = verify_theorem_bounds(mixing_example(n))
        alpha = 1.0 - 1.0 / (n - 1)
        expected = alpha**2 / (1.0 - alpha**2) * (n - 1) / n
        assert check.trace_P / n - 1.0 == pytest.approx(expected, rel=1e-8)
        assert check.all_ok

    def test_ratios_positive_and_finite(self):
        check = verify_theorem_bounds(family_matrix("lazy-path", 12))
        assert 0 < check.lower_ratio < np.inf
        assert 0 < check.upper_ratio < np.inf
        assert 0 < check.sigma_ratio < np.inf

    @pytest.mark.parametrize("family", ["lazy-star", "lazy-cycle", "lazy-path", "mixing-example"])
    def test_summary_relations(self, family):
        # trace/(n var0 t) bounded above; n sigma1/t bounded away from zero.
        check = verify_theorem_bounds(family_matrix(family, 16))
        assert check.lower_ratio <= 8.0
        assert check.n * check.sigma1_P / check.t_half >= 0.25


class TestFitExponent:
    def test_exact_square_law(self):
        ns = [16, 32, 64, 128]
        fit = fit_exponent(ns, [float(n) ** 2 for n in ns])
        assert fit.slope == pytest.approx(2.0, abs=1e-12)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_exact_power_law_recovered_to_high_precision(self):
        ns = [8, 16, 32, 64, 128]
        fit = fit_exponent(ns, [3.7 * float(n) ** 1.5 for n in ns])
        assert fit.slope == pytest.approx(1.5, abs=1e-12)

    def test_constant_data(self):
        fit = fit_exponent([16, 32, 64], [5.0, 5.0, 5.0])
        assert fit.slope == pytest.approx(0.0, abs=1e-12)

    def test_cubic_with_linear_correction(self):
        ns = [16, 32, 64, 128]
        fit = fit_exponent(ns, [3.0 * n**3 + n for n in ns])
        assert 2.9 < fit.slope <= 3.0

    def test_non_positive_rejected(self):
        with pytest.raises(errors.NonPositiveValue):
            fit_exponent([8, 16, 32], [1.0, 0.0, 2.0])

    def test_needs_three_points(self):
        with pytest.raises(errors.UsageError):
            fit_exponent([8, 16], [1.0, 2.0])


class TestRatioConstancy:
    def test_lazy_cycle_spread(self):
        result = ratio_constancy("lazy-cycle", (8, 16, 32, 64))
        assert result.spread <= 2.0
        assert result.constant_ok

    def test_lazy_star_spread(self):
        result = ratio_constancy("lazy-star", (8, 16, 32, 64))
        assert result.spread <= 2.0

    def test_mixing_family_recorded_without_claim(self):
        result = ratio_constancy("mixing-example", (8, 16, 32))
        assert len(result.points) == 3
        assert all(r > 0 for _, r in result.points)


class TestSweep:
    def test_rows_and_fits_present(self):
        result = sweep("lazy-star", [8, 16, 32])
        assert [row.n for row in result.rows] == [8, 16, 32]
        assert set(result.fits) == {"trace_P", "sigma1_P", "t_half", "var0", "rho_QA"}
        assert not result.failures

    def test_requires_three_increasing_points(self):
        with pytest.raises(errors.UsageError):
            sweep("lazy-star", [8])
        with pytest.raises(errors.UsageError):
            sweep("lazy-star", [8, 32, 16])

    def test_csv_schema_and_determinism(self):
        result = sweep("lazy-cycle", [8, 16, 32])
        text = sweep_to_csv(result)
        lines = text.strip().split("\n")
        assert lines[0] == ",".join(SWEEP_COLUMNS)
        assert len([ln for ln in lines if not ln.startswith("#")]) == 4
        assert any(ln.startswith("# fit trace_P") for ln in lines)
        again = sweep_to_csv(sweep("lazy-cycle", [8, 16, 32]))
        assert again == text

    def test_parallel_evaluation_matches_serial(self):
        serial = sweep_to_csv(sweep("lazy-path", [8, 16, 32], jobs=1))
        parallel = sweep_to_csv(sweep("lazy-path", [8, 16, 32], jobs=3))
        assert parallel == serial

    def test_failures_marked_per_n(self):
        # The plain star is periodic: every grid point fails, and the
        # failure markers carry the error type.
        result = sweep("star", [8, 16, 32])
        assert not result.rows
        assert set(result.failures) == {8, 16, 32}
        assert all("NotPrimitive" in msg for msg in result.failures.values())
        text = sweep_to_csv(result)
        assert "# failed n=8" in text

    def test_random_family_deterministic_per_seed(self):
        a = sweep_to_csv(sweep("flocking-random", [8, 16, 32], p=0.5, seed=4))
        b = sweep_to_csv(sweep("flocking-random", [8, 16, 32], p=0.5, seed=4))
        assert a == b


class TestFlockingChecks:
    def test_complete_flocking_lambda2(self):
        check = flocking_bounds_check(family_matrix("flocking-complete", 8))
        assert check.lambda2_ok
        assert check.lambda2 <= 1.0 - 1.0 / 8

    def test_path_flocking_fields(self):
        check = flocking_bounds_check(family_matrix("flocking-path", 16))
        assert check.t_half >= 1
        assert check.sigma1_over_n2 == pytest.approx(check.sigma1 / 256)
        assert check.tightness_ratio == pytest.approx(16 * check.sigma1 / check.t_half)

    def test_requires_flocking(self):
        with pytest.raises(errors.NotFlocking):
            flocking_bounds_check(family_matrix("lazy-cycle", 8))


class TestPiProjectionComparison:
    def test_doubly_stochastic_equality(self):
        cmp = pi_projection_comparison(family_matrix("lazy-cycle", 10))
        assert cmp.ok
        assert cmp.trace_pi == pytest.approx(cmp.trace_uniform, rel=1e-8)

    def test_lazy_star_pi_trace_dominates(self):
        cmp = pi_projection_comparison(family_matrix("lazy-star", 16))
        assert cmp.ok
        assert cmp.trace_pi >= cmp.trace_uniform - cmp.slack

    def test_random_flocking(self):
        cmp = pi_projection_comparison(family_matrix("flocking-random", 16, p=0.4, seed=6))
        assert cmp.ok
