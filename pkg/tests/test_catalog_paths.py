"""Cross-checks for the non-default utility kinds through every solver path."""

import math
import warnings

import numpy as np
import pytest

from oppsched import converse, estimation, optimal, policies, system


def boundary_utility_grid_argmax(q, u, resolution=1e-6):
    rs = np.arange(0.0, 1.0 + resolution, resolution)
    x1 = (1.0 - q) + q * rs
    x2 = q * (1.0 - rs ** 2)
    vals = np.array([u.value(float(a), float(b)) for a, b in
                     zip(x1[:: 1000], x2[:: 1000])])
    # coarse pass then fine pass around the coarse winner
    center = rs[::1000][int(np.argmax(vals))]
    lo = max(0.0, center - 2e-3)
    hi = min(1.0, center + 2e-3)
    fine = np.arange(lo, hi, resolution)
    vals = np.array([u.value(float((1 - q) + q * r), float(q * (1 - r * r)))
                     for r in fine])
    return float(fine[int(np.argmax(vals))])


class TestScaledLogThroughSolvers:
    def test_optimal_point_matches_grid_oracle(self):
        u = system.scaled_log_utility(3.0)
        q = 0.6
        op = optimal.optimal_point(q, u)
        r_grid = boundary_utility_grid_argmax(q, u)
        assert op.r_star == pytest.approx(r_grid, abs=2e-6)
        # grid maximum value can only fall below the solver's by curvature
        grid_phi = u.value(*optimal.boundary_point(q, r_grid))
        assert op.phi_star >= grid_phi - 1e-9
        assert op.phi_star == pytest.approx(grid_phi, abs=1e-9)

    def test_numeric_beta_positive(self):
        beta = optimal.numeric_beta(system.scaled_log_utility(2.0), 0.25, 0.75)
        assert beta > 0.0

    def test_greedy_one_slot_argmax(self):
        u = system.scaled_log_utility(2.0)
        g = policies.GreedyPolicy(u)
        rs = np.arange(0.0, 1.0 + 1e-6, 1e-6)
        vals = np.log1p(2.0 * rs) + np.log1p(2.0 * (1.0 - rs ** 2))
        assert g.counterfactual_r() == pytest.approx(rs[np.argmax(vals)], abs=2e-6)

    def test_plugin_tracks_solver_on_general_utility(self):
        u = system.scaled_log_utility(2.0)
        p = policies.PlugInPolicy(u)
        for s in (1, 0, 1, 1):
            p.advance(s)
        want = optimal.solve_general_r(0.75, u, check=False)
        assert p.counterfactual_r() == pytest.approx(want, abs=1e-10)

    def test_frank_wolfe_linearized_response(self):
        u = system.scaled_log_utility(2.0)
        fw = policies.FrankWolfePolicy(u)
        g1, g2 = u.grad(0.5, 0.5)
        rs = np.linspace(0.0, 1.0, 200001)
        inner = g1 * rs + g2 * (1.0 - rs ** 2)
        assert fw.counterfactual_r() == pytest.approx(rs[np.argmax(inner)], abs=1e-5)

    def test_genie_with_general_utility_is_stationary_optimum(self):
        u = system.scaled_log_utility(2.0)
        genie = policies.GeniePolicy(0.4, u)
        assert genie.counterfactual_r() == pytest.approx(
            optimal.solve_general_r(0.4, u, check=False), abs=1e-10)


class TestGenieTrendAcrossHorizons:
    def test_scaled_gap_consistent_with_zero_at_every_horizon(self):
        # the genie's true gap is identically zero: phi(E[Xbar(T)]) = phi*
        # at every T, so each measured scaled gap must sit within noise
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            series = converse.gap_experiment("genie:0.5", 0.5, [1000, 10_000],
                                             reps=500, master_seed=606)
        for pt in series.points:
            scaled_se = pt.horizon * pt.se / math.log(pt.horizon)
            assert abs(pt.scaled_gap) <= 3.0 * scaled_se
            # theta round-trip residue only: ~(1e-16)^2 per slot
            assert pt.bound_rhs <= 1e-30


class TestEstimatorEdges:
    def test_constant_estimator_mc_has_zero_variance(self):
        mc, se = estimation.mc_expected_error(estimation.constant_estimator(0.4),
                                              0.6, 5, 2.0, n_samples=1000, seed=1)
        assert mc == pytest.approx(abs(0.4 - 0.6) ** 2, abs=1e-15)
        assert se <= 1e-15  # identical samples up to summation roundoff

    def test_constant_series_mc_matches_exact(self):
        series = estimation.regret_series(estimation.constant_estimator(0.3), 0.55,
                                          8, 1.0, mode="monte-carlo",
                                          mc_samples=2000, seed=2)
        np.testing.assert_allclose(series.per_step, 0.25, atol=1e-12)

    def test_truncated_series_caps_consistent(self):
        # the cap decreases like n^(-alpha/2); truncated errors never exceed it
        for n in (1, 4, 9, 16):
            for alpha in (1.0, 2.0):
                cap = estimation.truncation_cap(n, alpha)
                got = estimation.truncated_error(estimation.empirical_mean(),
                                                 0.5, n, alpha)
                assert got <= cap + 1e-15
