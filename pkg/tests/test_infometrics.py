"""KL, total variation, Pinsker, and the refined TV bound."""

import itertools
import math

import numpy as np
import pytest

from oppsched import infometrics
from oppsched.infometrics import (ProductBernoulli, bernoulli_kl, kl_product,
                                  pinsker_check, popcounts, tv_bound_check, tv_exact)

GRID = [round(0.25 + 0.05 * i, 2) for i in range(11)]  # 0.25, 0.30, ..., 0.75


def tv_by_outcome_enumeration(p, q, n):
    """Independent oracle: literal half-L1 over all 2^n outcomes."""
    bp = ProductBernoulli(p, n).outcome_probabilities()
    bq = ProductBernoulli(q, n).outcome_probabilities()
    return 0.5 * float(np.abs(bp - bq).sum())


def tv_by_subset_sup(p, q, n):
    """Definition-level oracle: sup over every event of the measure gap."""
    bp = ProductBernoulli(p, n).outcome_probabilities()
    bq = ProductBernoulli(q, n).outcome_probabilities()
    best = 0.0
    for mask in range(2 ** (2 ** n)):
        sel = [(mask >> i) & 1 for i in range(2 ** n)]
        diff = abs(sum(bp[i] - bq[i] for i in range(2 ** n) if sel[i]))
        best = max(best, diff)
    return best


class TestProductMeasure:
    @pytest.mark.parametrize("p,n", [(0.5, 3), (0.25, 8), (0.9, 12), (0.0, 4), (1.0, 4)])
    def test_outcome_probabilities_sum_to_one(self, p, n):
        probs = ProductBernoulli(p, n).outcome_probabilities()
        assert probs.sum() == pytest.approx(1.0, abs=1e-12)
        assert probs.min() >= 0.0

    def test_popcounts_doubling(self):
        assert popcounts(4).tolist() == [bin(i).count("1") for i in range(16)]

    def test_validation(self):
        with pytest.raises(ValueError):
            ProductBernoulli(1.2, 3)
        with pytest.raises(ValueError):
            ProductBernoulli(0.5, 0)


class TestKl:
    def test_zero_iff_equal(self):
        for p in (0.0, 0.3, 1.0):
            assert kl_product(p, p, 5) == 0.0
        for p, q in ((0.3, 0.31), (0.5, 0.25)):
            assert kl_product(p, q, 1) > 1e-12

    def test_two_sample_worked_value(self):
        assert kl_product(0.5, 0.25, 2) == pytest.approx(math.log(4.0 / 3.0), abs=1e-14)

    def test_two_sample_value_against_outcome_sum(self):
        # oracle: explicit sum over the 4 outcomes
        p, q = 0.5, 0.25
        bp = ProductBernoulli(p, 2).outcome_probabilities()
        bq = ProductBernoulli(q, 2).outcome_probabilities()
        direct = float((bp * np.log(bp / bq)).sum())
        assert kl_product(p, q, 2) == pytest.approx(direct, abs=1e-14)

    def test_single_sample_value(self):
        assert kl_product(0.75, 0.25, 1) == pytest.approx(0.5 * math.log(3.0), abs=1e-14)

    def test_absolute_continuity_failures(self):
        assert kl_product(0.5, 0.0, 3) == math.inf
        assert kl_product(0.5, 1.0, 3) == math.inf
        assert kl_product(0.0, 0.5, 3) == pytest.approx(-3 * math.log(0.5), abs=1e-12)

    def test_nonnegative_on_grid(self):
        for p, q in itertools.product(GRID, GRID):
            assert bernoulli_kl(p, q) >= -1e-15

    def test_quadratic_upper_bound_on_interval(self):
        # per-sample KL <= (16/3) (p-q)^2 for p, q in [1/4, 3/4]
        for p, q in itertools.product(GRID, GRID):
            assert bernoulli_kl(p, q) <= 16.0 * (p - q) ** 2 / 3.0 + 1e-12

    def test_half_eps_squared_claim_fails(self):
        # the tempting sharper bound KL <= eps^2/2 is false at p = 1/2,
        # eps = 1/16; the 16/3 coefficient is needed
        p, eps = 0.5, 1.0 / 16.0
        kl = bernoulli_kl(p, p + eps)
        assert kl > eps ** 2 / 2.0
        assert kl <= 16.0 * eps ** 2 / 3.0


class TestTvExact:
    def test_single_sample_is_absolute_difference(self):
        for p, q in ((0.5, 0.25), (0.3, 0.9), (0.0, 1.0)):
            assert tv_exact(p, q, 1) == pytest.approx(abs(p - q), abs=1e-15)

    def test_equal_measures(self):
        assert tv_exact(0.37, 0.37, 8) == 0.0

    def test_worked_two_sample_value(self):
        # enumerate: |1/4 - 9/16| + 2|1/4 - 3/16| + |1/4 - 1/16| halved
        assert tv_exact(0.5, 0.25, 2) == pytest.approx(0.3125, abs=1e-15)

    @pytest.mark.parametrize("n", [1, 2, 4, 7, 10])
    def test_matches_outcome_enumeration(self, n):
        for p, q in ((0.25, 0.75), (0.5, 0.55), (0.3, 0.4)):
            assert tv_exact(p, q, n) == pytest.approx(tv_by_outcome_enumeration(p, q, n), abs=1e-13)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_matches_subset_supremum(self, n):
        # definition-level check, feasible only for tiny outcome spaces
        for p, q in ((0.5, 0.25), (0.3, 0.6)):
            assert tv_exact(p, q, n) == pytest.approx(tv_by_subset_sup(p, q, n), abs=1e-12)

    def test_symmetry_and_triangle(self):
        rng = np.random.default_rng(15)
        for _ in range(100):
            p, q, r = rng.random(3)
            n = int(rng.integers(1, 9))
            assert tv_exact(p, q, n) == pytest.approx(tv_exact(q, p, n), abs=1e-14)
            assert tv_exact(p, r, n) <= tv_exact(p, q, n) + tv_exact(q, r, n) + 1e-12

    def test_cost_guard(self):
        with pytest.raises(ValueError):
            tv_exact(0.5, 0.25, 23)


class TestBounds:
    def test_tv_bound_trivial_case(self):
        chk = tv_bound_check(0.25, 0.75, 4)
        assert chk.bound == pytest.approx(infometrics.TV_COEFF, abs=1e-12)
        assert chk.bound >= 1.0 >= chk.tv
        assert chk.holds

    def test_tv_bound_nontrivial_case(self):
        chk = tv_bound_check(0.5, 0.55, 10)
        assert chk.bound == pytest.approx(infometrics.TV_COEFF * 0.05 * math.sqrt(10), abs=1e-12)
        assert chk.holds

    def test_pinsker_worked_example(self):
        chk = pinsker_check(0.5, 0.25, 2)
        assert chk.tv == pytest.approx(0.3125, abs=1e-15)
        # the reverse order has the smaller divergence here, so the min wins;
        # the one-order value sqrt(0.5 ln(4/3)) ~ 0.3793 is an upper bound
        assert chk.pinsker_rhs == pytest.approx(
            math.sqrt(0.5 * kl_product(0.25, 0.5, 2)), abs=1e-14)
        assert chk.pinsker_rhs <= math.sqrt(0.5 * math.log(4 / 3)) + 1e-12
        assert chk.holds

    def test_pinsker_takes_smaller_order(self):
        chk = pinsker_check(0.7, 0.3, 1)
        both = (math.sqrt(0.5 * kl_product(0.7, 0.3, 1)),
                math.sqrt(0.5 * kl_product(0.3, 0.7, 1)))
        assert chk.pinsker_rhs == pytest.approx(min(both), abs=1e-14)

    def test_grid_zero_violations(self):
        # the acceptance grid: p, q in {0.25..0.75 step 0.05}, n in 1..12
        for n in range(1, 13):
            for p, q in itertools.product(GRID, GRID):
                assert tv_bound_check(p, q, n).holds
                assert pinsker_check(p, q, n).holds
