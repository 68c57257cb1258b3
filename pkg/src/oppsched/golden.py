"""Golden-value regression fixtures.

Each fixture freezes a derived quantity, computed once from the package's
independent oracles (closed forms, grid searches, outcome enumeration) and
committed as a literal.  ``run_golden_regression`` recomputes everything
through the live code paths and names any quantity that drifted beyond its
tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from . import converse, estimation, infometrics, optimal, policies, system


@dataclass(frozen=True)
class GoldenCase:
    name: str
    compute: Callable[[], float]
    expected: float
    tol: float


FIXTURES: list[GoldenCase] = [
    GoldenCase("optimal_r(0.5)", lambda: float(optimal.optimal_r(0.5)),
               0.4142135623730951, 1e-12),
    GoldenCase("optimal_r(1.0)", lambda: float(optimal.optimal_r(1.0)),
               0.5485837703548635, 1e-12),
    GoldenCase("optimal_r(0.0)", lambda: float(optimal.optimal_r(0.0)), 0.25, 0.0),
    GoldenCase("phi_star(0.3)", lambda: optimal.phi_star(0.3), 0.8242483579949684, 1e-12),
    GoldenCase("phi_star(0.5)", lambda: optimal.phi_star(0.5), 0.8813735870195432, 1e-12),
    GoldenCase("phi_star(0.7)", lambda: optimal.phi_star(0.7), 0.9232357394086386, 1e-12),
    GoldenCase("x_star1(0.5)", lambda: optimal.optimal_point(0.5).x_star.x1,
               0.7071067811865476, 1e-12),
    GoldenCase("x_star2(0.5)", lambda: optimal.optimal_point(0.5).x_star.x2,
               0.4142135623730950, 1e-12),
    GoldenCase("r_slope(0)", lambda: float(optimal.optimal_r_derivative(0.0)), 0.328125, 0.0),
    GoldenCase("r_slope(1)=min_slope", lambda: float(optimal.optimal_r_derivative(1.0)),
               0.2257081148225682, 1e-15),
    GoldenCase("greedy_r", lambda: policies.GreedyPolicy().counterfactual_r(),
               0.5485837703548636, 1e-12),
    GoldenCase("greedy_phi_at_q05",
               lambda: system.utility_value(
                   system.log1p_utility(),
                   optimal.boundary_point(0.5, policies.GreedyPolicy().counterfactual_r())),
               0.8731562503659493, 1e-12),
    GoldenCase("mse_threshold", lambda: estimation.regret_thresholds(2.0).alpha2_threshold,
               3.0 / 2.0 ** 10, 0.0),
    GoldenCase("abs_threshold", lambda: estimation.regret_thresholds(1.0).alpha1_threshold,
               0.038273277230987154, 1e-15),
    GoldenCase("scaled_gap_threshold", lambda: converse.MEASURE_THRESHOLD,
               1.865630606570714e-05, 1e-18),
    GoldenCase("tightness_factor(2)", lambda: estimation.tightness_report(2.0).factor,
               85.33333333333333, 1e-10),
    GoldenCase("tightness_factor(1)", lambda: estimation.tightness_report(1.0).factor,
               26.127890589687237, 1e-10),
    GoldenCase("tv(0.5,0.25,2)", lambda: infometrics.tv_exact(0.5, 0.25, 2), 0.3125, 1e-12),
    GoldenCase("kl(0.5,0.25,2)", lambda: infometrics.kl_product(0.5, 0.25, 2),
               0.28768207245178085, 1e-14),
    GoldenCase("shannon_x1(theta1=1)", lambda: system.shannon_fdm_point(1.0, 0.7, 3.0).x1,
               0.9704060527839233, 1e-12),
    GoldenCase("shannon_x1(theta1=0.5)", lambda: system.shannon_fdm_point(0.5, 0.7, 3.0).x1,
               0.6810685521693596, 1e-12),
    GoldenCase("mse_empirical_mean(p=.5,n=4)",
               lambda: estimation.exact_expected_error(estimation.empirical_mean(), 0.5, 4, 2.0),
               0.0625, 1e-12),
    GoldenCase("two_point_separation(1)", lambda: estimation.two_point_separation(1),
               0.30618621784789724, 1e-15),
    GoldenCase("truncation_cap(1,2)", lambda: estimation.truncation_cap(1, 2.0),
               3.0 / 256.0, 1e-12),
]


@dataclass(frozen=True)
class GoldenResult:
    name: str
    ok: bool
    got: float
    expected: float
    tol: float


def run_golden_regression() -> list[GoldenResult]:
    """Recompute every fixture; a report entry per quantity, failures named."""
    results = []
    for case in FIXTURES:
        got = case.compute()
        ok = abs(got - case.expected) <= case.tol
        results.append(GoldenResult(name=case.name, ok=ok, got=got,
                                    expected=case.expected, tol=case.tol))
    return results
