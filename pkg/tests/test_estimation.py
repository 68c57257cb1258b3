"""Estimation lab: exact errors, regret series, thresholds, truncation, integrals."""

import math

import numpy as np
import pytest

from oppsched import estimation
from oppsched.estimation import (constant_estimator, custom_estimator, empirical_mean,
                                 exact_expected_error, regret_normalizer,
                                 regret_normalizer_series, regret_series,
                                 regret_thresholds, truncation_cap, two_point_separation)

C = math.sqrt(8.0 / 3.0)


class TestExactExpectedError:
    @pytest.mark.parametrize("p", [0.25, 0.5, 0.7])
    @pytest.mark.parametrize("n", list(range(1, 17)))
    def test_empirical_mean_mse_closed_form(self, p, n):
        got = exact_expected_error(empirical_mean(), p, n, 2.0)
        assert abs(got - p * (1 - p) / n) <= 1e-12

    def test_worked_value_half_n4(self):
        assert exact_expected_error(empirical_mean(), 0.5, 4, 2.0) == pytest.approx(0.0625, abs=1e-15)

    def test_constant_has_no_data_dependence(self):
        for n in (1, 5, 12):
            got = exact_expected_error(constant_estimator(0.3), 0.6, n, 1.5)
            assert got == pytest.approx(0.3 ** 1.5, abs=1e-12)

    def test_symmetric_two_point_absolute_error(self):
        # n = 1, alpha = 1, p = 1/2: |W - 1/2| = 1/2 surely
        assert exact_expected_error(empirical_mean(), 0.5, 1, 1.0) == pytest.approx(0.5, abs=1e-15)

    def test_degenerate_probabilities(self):
        assert exact_expected_error(empirical_mean(), 0.0, 6, 2.0) == 0.0
        assert exact_expected_error(empirical_mean(), 1.0, 6, 2.0) == 0.0

    def test_enumeration_matches_grouped_path(self):
        # a custom function that recomputes the empirical mean must agree
        # with the count-grouped builtin to double precision
        mimic = custom_estimator(lambda u, w: sum(w) / len(w))
        for n in (1, 3, 7, 10):
            for p in (0.25, 0.6):
                for alpha in (1.0, 2.0):
                    a = exact_expected_error(mimic, p, n, alpha)
                    b = exact_expected_error(empirical_mean(), p, n, alpha)
                    assert a == pytest.approx(b, abs=1e-13)

    def test_history_order_dependent_custom(self):
        # last-observation estimator: error only depends on p, any n
        last = custom_estimator(lambda u, w: float(w[-1]))
        for n in (1, 2, 5):
            got = exact_expected_error(last, 0.3, n, 2.0)
            # E|W - p|^2 = p(1-p)
            assert got == pytest.approx(0.3 * 0.7, abs=1e-13)

    def test_randomized_estimator_averages_over_seeds(self):
        # answer u, ignore the data: conditional error is |u - p|^alpha
        est = custom_estimator(lambda u, w: u, randomized=True, seed=77)
        got = exact_expected_error(est, 0.4, 3, 2.0, u_draws=16)
        us = np.random.default_rng(77).random(16)
        assert got == pytest.approx(float(np.mean((us - 0.4) ** 2)), abs=1e-12)

    def test_guards(self):
        with pytest.raises(ValueError):
            exact_expected_error(empirical_mean(), 0.5, 23, 2.0)
        with pytest.raises(ValueError):
            exact_expected_error(empirical_mean(), 0.5, 0, 2.0)
        with pytest.raises(ValueError):
            exact_expected_error(empirical_mean(), 1.5, 3, 2.0)
        with pytest.raises(ValueError):
            exact_expected_error(empirical_mean(), 0.5, 3, 0.0)


class TestMonteCarloAgreement:
    @pytest.mark.parametrize("n", [1, 5, 12])
    @pytest.mark.parametrize("alpha", [1.0, 2.0])
    def test_mc_matches_exact_within_four_se(self, n, alpha):
        p = 0.45
        exact = exact_expected_error(empirical_mean(), p, n, alpha)
        mc, se = estimation.mc_expected_error(empirical_mean(), p, n, alpha,
                                              n_samples=10 ** 6, seed=800 + n)
        assert abs(mc - exact) <= 4.0 * se

    def test_mc_series_matches_exact(self):
        p, m, alpha = 0.35, 10, 2.0
        series = regret_series(empirical_mean(), p, m, alpha, mode="monte-carlo",
                               mc_samples=200_000, seed=4)
        exact = regret_series(empirical_mean(), p, m, alpha, mode="exact")
        assert series.per_step_se is not None
        for n in range(m):
            assert abs(series.per_step[n] - exact.per_step[n]) <= 4 * series.per_step_se[n]

    def test_mc_custom_path(self):
        last = custom_estimator(lambda u, w: float(w[-1]))
        mc, se = estimation.mc_expected_error(last, 0.3, 4, 2.0, n_samples=20_000, seed=9)
        assert abs(mc - 0.21) <= 4 * se


class TestNormalizers:
    def test_v3_of_two(self):
        assert regret_normalizer(3, 2.0) == pytest.approx(1 + 0.5 + 1 / 3, abs=1e-15)

    def test_harmonic_identity_alpha_two(self):
        h = np.cumsum(1.0 / np.arange(1, 101))
        np.testing.assert_allclose(regret_normalizer_series(100, 2.0), h, atol=1e-12)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5, 2.0])
    def test_integral_lower_bound(self, alpha):
        for m in (1, 2, 10, 100, 5000):
            vm = regret_normalizer(m, alpha)
            if alpha == 2.0:
                lower = math.log(m + 1.0)
            else:
                lower = ((m + 1.0) ** (1 - alpha / 2) - 1.0) / (1 - alpha / 2)
            assert vm >= lower - 1e-12


class TestRegretSeries:
    def test_empirical_mean_cumulative_is_harmonic(self):
        p, m = 0.3, 22
        series = regret_series(empirical_mean(), p, m, 2.0)
        h = np.cumsum(1.0 / np.arange(1, m + 1))
        np.testing.assert_allclose(series.cumulative, p * (1 - p) * h, atol=1e-12)
        assert series.mode == "exact"

    def test_series_shape_invariants(self):
        series = regret_series(empirical_mean(), 0.6, 30, 1.0)
        assert np.all(series.per_step >= 0.0) and np.all(series.per_step <= 1.0)
        assert np.all(np.diff(series.cumulative) >= 0.0)
        assert len(series.normalizers) == 30

    def test_exact_series_matches_pointwise_enumeration(self):
        vals = estimation.exact_error_series(empirical_mean(), 0.4, 15, [1.5])[0]
        for n in range(1, 16):
            assert vals[n - 1] == pytest.approx(
                exact_expected_error(empirical_mean(), 0.4, n, 1.5), abs=1e-12)

    def test_custom_estimator_exact_below_guard(self):
        last = custom_estimator(lambda u, w: float(w[-1]))
        series = regret_series(last, 0.3, 6, 2.0)
        assert series.mode == "exact"
        np.testing.assert_allclose(series.per_step, 0.21, atol=1e-12)


class TestThresholds:
    def test_alpha_two_exact(self):
        thr = regret_thresholds(2.0)
        assert thr.threshold == 3.0 / 2.0 ** 10
        assert thr.alpha2_threshold == 3.0 / 2.0 ** 10

    def test_alpha_one_exact(self):
        thr = regret_thresholds(1.0)
        assert thr.alpha1_threshold == 1.0 / (2.0 ** 4 * math.sqrt(8.0 / 3.0))
        # the two alpha = 1 normalizations differ by the factor 2 between
        # V_m(1) and sqrt(m+1) - 1
        assert 2.0 * thr.threshold == pytest.approx(thr.alpha1_threshold, rel=1e-14)

    def test_general_formula(self):
        for alpha in (0.5, 1.0, 1.7, 2.0):
            thr = regret_thresholds(alpha)
            assert thr.threshold == pytest.approx(
                1.0 / (C ** alpha * 2.0 ** (3 + 2 * alpha)), rel=1e-14)

    def test_domain_guard(self):
        with pytest.raises(ValueError):
            regret_thresholds(0.0)
        with pytest.raises(ValueError):
            regret_thresholds(2.5)


class TestTruncation:
    def test_separation_and_cap_values(self):
        assert two_point_separation(1) == pytest.approx(1 / (2 * C), abs=1e-15)
        assert truncation_cap(1, 2.0) == pytest.approx(3.0 / 256.0, abs=1e-15)

    def test_truncated_error_caps_large_error(self):
        got = estimation.truncated_error(empirical_mean(), 0.5, 1, 2.0)
        assert got == pytest.approx(3.0 / 256.0, abs=1e-15)

    def test_truncated_error_keeps_small_error(self):
        # perfect constant estimator: error 0, below any cap
        assert estimation.truncated_error(constant_estimator(0.5), 0.5, 3, 2.0) == 0.0


class TestTwoPointBound:
    def test_worked_example_at_boundary_separation(self):
        p = 0.25
        q = p + two_point_separation(1)
        chk = estimation.two_point_regret_check(empirical_mean(), p, q, 1, 2.0)
        assert not chk.vacuous
        assert chk.rhs == pytest.approx(3.0 / 256.0, abs=1e-15)
        assert chk.lhs == pytest.approx(p * (1 - p) + q * (1 - q), abs=1e-12)
        assert chk.holds

    def test_equal_probabilities_tight_vacuous(self):
        chk = estimation.two_point_regret_check(empirical_mean(), 0.5, 0.5, 4, 2.0)
        assert chk.rhs == 0.0 and chk.holds

    def test_adversarial_midpoint_constant(self):
        # constant((p+q)/2) sits exactly 4x above the bound
        for n, alpha in ((1, 2.0), (4, 1.0), (9, 2.0)):
            eps = two_point_separation(n)
            p = 0.5 - eps / 2
            q = 0.5 + eps / 2
            est = constant_estimator((p + q) / 2)
            chk = estimation.two_point_regret_check(est, p, q, n, alpha)
            assert not chk.vacuous
            assert chk.lhs == pytest.approx(4.0 * chk.rhs, rel=1e-12)
            assert chk.holds

    def test_vacuous_when_separation_exceeded(self):
        chk = estimation.two_point_regret_check(empirical_mean(), 0.25, 0.75, 9, 2.0)
        assert chk.vacuous and chk.holds

    def test_domain_guard(self):
        with pytest.raises(ValueError):
            estimation.two_point_regret_check(empirical_mean(), 0.1, 0.5, 1, 2.0)


class TestMeasureProxy:
    def test_empirical_mean_alpha2_fraction_one(self):
        # normalized sum is exactly p(1-p) >= 3/16 > 3/2^10 for every sample
        res = estimation.measure_proxy_experiment(empirical_mean(), 50, 22, 2.0, seed=5)
        assert res.fraction_above == 1.0
        assert res.mode == "exact"
        for p, v in res.entries:
            assert v == pytest.approx(p * (1 - p), rel=1e-12)

    def test_constant_half_estimator_mostly_above(self):
        # normalized sum m (p - 1/2)^2 / V_m(2) crosses the threshold except
        # in a shrinking band around 1/2
        res = estimation.measure_proxy_experiment(constant_estimator(0.5), 200, 22, 2.0, seed=6)
        assert 0.8 <= res.fraction_above <= 1.0
        band = math.sqrt(res.threshold * regret_normalizer(22, 2.0) / 22)
        for p, v in res.entries:
            assert (v >= res.threshold) == (abs(p - 0.5) >= band - 1e-12)

    def test_empty_report(self):
        res = estimation.measure_proxy_experiment(empirical_mean(), 0, 5, 2.0, seed=1)
        assert res.entries == [] and math.isnan(res.fraction_above)


class TestIntegralCheck:
    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
    def test_empirical_mean_integral_inequality(self, alpha):
        chk = estimation.integral_regret_check(empirical_mean(), 22, alpha)
        assert chk.holds
        assert chk.lhs > 0 and chk.rhs > 0

    def test_every_horizon_up_to_guard(self):
        for m in range(1, 23):
            assert estimation.integral_regret_check(empirical_mean(), m, 2.0,
                                                    grid_points=256).holds

    def test_rejects_custom(self):
        last = custom_estimator(lambda u, w: float(w[-1]))
        with pytest.raises(ValueError):
            estimation.integral_regret_check(last, 5, 2.0)


class TestTightness:
    def test_alpha_two_factor(self):
        rep = estimation.tightness_report(2.0)
        assert rep.factor == pytest.approx(2.0 ** 10 / 12.0, rel=1e-12)  # 85.333...
        assert abs(rep.factor - 85.4) / 85.4 < 0.01

    def test_alpha_one_factor(self):
        rep = estimation.tightness_report(1.0)
        assert rep.factor == pytest.approx(32.0 * math.sqrt(2.0 / 3.0), rel=1e-9)

    def test_closed_form_identity(self):
        for alpha in (0.25, 0.5, 1.0, 1.5, 2.0):
            rep = estimation.tightness_report(alpha)
            assert rep.factor == pytest.approx(
                2.0 ** (3 + 2.5 * alpha) / 3.0 ** (alpha / 2), rel=1e-10)

    def test_small_alpha_limit_is_eight(self):
        assert estimation.tightness_report(1e-9).factor == pytest.approx(8.0, rel=1e-6)


class TestAchievabilityBounds:
    def test_alpha2_regret_bound_to_one_million(self):
        # p(1-p) H_m <= 1/4 + (1/4) log m for every m up to 1e6
        m = 10 ** 6
        h = np.cumsum(1.0 / np.arange(1, m + 1))
        bound = 0.25 + 0.25 * np.log(np.arange(1, m + 1))
        for p in (0.25, 0.5, 0.7):
            assert np.all(p * (1 - p) * h <= bound + 1e-12)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
    def test_per_step_jensen_bound_and_cumulative(self, alpha):
        m = 2000
        for p in (0.25, 0.7):
            per = estimation.exact_error_series(empirical_mean(), p, m, [alpha])[0]
            ms = np.arange(1, m + 1, dtype=float)
            jensen = (p * (1 - p) / ms) ** (alpha / 2)
            assert np.all(per <= jensen + 1e-12)
            closed = (0.5 ** alpha / (1 - alpha / 2)) * (ms ** (1 - alpha / 2) - alpha / 2)
            assert np.all(np.cumsum(per) <= closed + 1e-12)
