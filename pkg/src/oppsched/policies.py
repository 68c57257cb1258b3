"""Scheduling policies: statistics-unaware algorithms and the genie baseline.

Every policy exposes the same two-call protocol per slot: a side-effect-free
``counterfactual_r()`` giving the curve parameter it would play if the
current state were 1 (the conditional mean, for randomized policies), then
``advance(s)`` which realizes the decision for the observed state and
updates internal state.  Statistics-unaware policies never see the true
channel probability; only the genie is constructed with it.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .system import (ChannelTrace, RatePoint, RunRecord, UtilityFunction,
                     check_solver_assumptions, log1p_utility, solver_assumptions_ok)
from . import optimal

PLUGIN_PRIOR = 0.5        # estimate used before the first observation
PLUGIN_CLAMP_LO = 1e-9    # cosmetic clamp applied to the empirical frequency


def _golden_max(fn, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Argmax of a unimodal function on [lo, hi] by golden-section search."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def one_slot_greedy_r(u: UtilityFunction) -> float:
    """Curve parameter maximizing the one-slot utility phi(r, 1 - r^2).

    Strictly concave separable utilities are solved through the split
    equation at q = 1 (the one-slot problem is its q = 1 case); the rest
    (min, linear) fall back to golden-section search, which suffices
    because the one-slot objective is concave in r for the whole catalog.
    """
    if u.kind == "log1p":
        return optimal.R_AT_Q1
    if u.differentiable and u.separable and solver_assumptions_ok(u):
        return optimal.solve_general_r(1.0, u, check=False)
    return _golden_max(lambda r: u.value(r, 1.0 - r * r), 0.0, 1.0)


def best_linear_response(g1: float, g2: float) -> float:
    """Argmax over r in [0, 1] of the linearized objective g1 r + g2 (1 - r^2).

    Concave in r for g2 >= 0 with stationary point g1 / (2 g2), clamped to
    the interval; for g2 <= 0 the maximum sits at an endpoint.
    """
    if g2 > 0.0:
        return min(1.0, max(0.0, g1 / (2.0 * g2)))
    # g2 <= 0 makes the objective convex: endpoint values are g2 at r=0, g1 at r=1
    return 1.0 if g1 >= g2 else 0.0


class Policy:
    """Base protocol for per-slot scheduling policies."""

    name = "policy"
    statistics_unaware = True
    randomized = False

    def counterfactual_r(self) -> float:
        """Mean curve parameter the policy would play this slot if the state were 1."""
        raise NotImplementedError

    def sample_counterfactual_r(self, rng: np.random.Generator) -> float:
        """One conditional draw of the curve parameter; the mean for deterministic policies."""
        return self.counterfactual_r()

    def advance(self, s: int) -> RatePoint:
        """Realize the decision for state s and update internal state."""
        raise NotImplementedError


class GreedyPolicy(Policy):
    """Maximizes the immediate one-slot utility; ignores all history."""

    name = "greedy"

    def __init__(self, utility: Optional[UtilityFunction] = None):
        self.utility = utility if utility is not None else log1p_utility()
        self._r = one_slot_greedy_r(self.utility)
        self.t = 0

    def counterfactual_r(self) -> float:
        return self._r

    def advance(self, s: int) -> RatePoint:
        self.t += 1
        if s == 0:
            return RatePoint(1.0, 0.0)
        r = self._r
        return RatePoint(r, 1.0 - r * r)


class PlugInPolicy(Policy):
    """Plays the optimal parameter for the empirical state-1 frequency.

    Uses the prior guess 1/2 before the first observation; afterwards the
    raw frequency, clamped into [1e-9, 1] before the map evaluation.
    """

    name = "plugin"

    def __init__(self, utility: Optional[UtilityFunction] = None):
        self.utility = utility if utility is not None else log1p_utility()
        if self.utility.kind not in ("log1p",):
            # one-time validation; per-slot solves then skip the grid check
            check_solver_assumptions(self.utility)
        self.t = 0
        self.ones = 0

    @property
    def estimate(self) -> float:
        return PLUGIN_PRIOR if self.t == 0 else self.ones / self.t

    def _r_for(self, qhat: float) -> float:
        qc = min(1.0, max(PLUGIN_CLAMP_LO, qhat))
        if self.utility.kind == "log1p":
            return float(optimal.optimal_r(qc))
        return optimal.solve_general_r(qc, self.utility, check=False)

    def counterfactual_r(self) -> float:
        return self._r_for(self.estimate)

    def advance(self, s: int) -> RatePoint:
        r = self.counterfactual_r()
        self.t += 1
        self.ones += int(s)
        if s == 0:
            return RatePoint(1.0, 0.0)
        return RatePoint(r, 1.0 - r * r)


class FrankWolfePolicy(Policy):
    """Stochastic conditional-gradient policy on the running-average iterate.

    Keeps an iterate xbar; each slot plays the feasible point maximizing
    the linearized utility grad(xbar) . X, then moves xbar toward the
    realized decision with stepsize 1/(t+1) (vanishing) or a constant
    eta in (0, 1).  With the vanishing schedule the iterate is exactly the
    arithmetic mean of all decisions so far.
    """

    name = "frank-wolfe"

    def __init__(self, utility: Optional[UtilityFunction] = None,
                 eta: Optional[float] = None, x0: tuple[float, float] = (0.5, 0.5)):
        self.utility = utility if utility is not None else log1p_utility()
        if not self.utility.differentiable:
            raise ValueError("Frank-Wolfe needs a differentiable utility")
        if eta is not None and not 0.0 < eta < 1.0:
            raise ValueError(f"constant stepsize must lie in (0, 1), got {eta}")
        self.eta = eta
        self.name = "fw-vanishing" if eta is None else f"fw-constant:{eta}"
        self.t = 0
        self.xbar = (float(x0[0]), float(x0[1]))

    def counterfactual_r(self) -> float:
        g1, g2 = self.utility.grad(self.xbar[0], self.xbar[1])
        return best_linear_response(g1, g2)

    def advance(self, s: int) -> RatePoint:
        r = self.counterfactual_r()
        if s == 0:
            x = RatePoint(1.0, 0.0)
        else:
            x = RatePoint(r, 1.0 - r * r)
        eta_t = self.eta if self.eta is not None else 1.0 / (self.t + 1.0)
        self.xbar = ((1.0 - eta_t) * self.xbar[0] + eta_t * x.x1,
                     (1.0 - eta_t) * self.xbar[1] + eta_t * x.x2)
        self.t += 1
        return x


class GeniePolicy(Policy):
    """Statistics-aware baseline: plays the optimal stationary parameter for the true q."""

    name = "genie"
    statistics_unaware = False

    def __init__(self, q: float, utility: Optional[UtilityFunction] = None):
        if not 0.0 < q <= 1.0:
            raise ValueError(f"genie requires q in (0, 1], got {q}")
        self.utility = utility if utility is not None else log1p_utility()
        self.q = float(q)
        if self.utility.kind == "log1p":
            self._r = float(optimal.optimal_r(q))
        else:
            self._r = optimal.solve_general_r(q, self.utility)
        self.name = f"genie:{q}"
        self.t = 0

    def counterfactual_r(self) -> float:
        return self._r

    def advance(self, s: int) -> RatePoint:
        self.t += 1
        if s == 0:
            return RatePoint(1.0, 0.0)
        r = self._r
        return RatePoint(r, 1.0 - r * r)


def make_policy(spec: str, utility: Optional[UtilityFunction] = None) -> Policy:
    """Build a policy from its CLI spec string.

    Recognized forms: ``greedy``, ``plugin``, ``fw-vanishing``,
    ``fw-constant:<eta>``, ``genie:<q>``.
    """
    spec = spec.strip()
    if spec == "greedy":
        return GreedyPolicy(utility)
    if spec == "plugin":
        return PlugInPolicy(utility)
    if spec == "fw-vanishing":
        return FrankWolfePolicy(utility, eta=None)
    if spec.startswith("fw-constant:"):
        return FrankWolfePolicy(utility, eta=float(spec.split(":", 1)[1]))
    if spec.startswith("genie:"):
        return GeniePolicy(float(spec.split(":", 1)[1]), utility)
    raise ValueError(f"unknown policy spec {spec!r}")


def run_policy(policy: Policy | str, trace: ChannelTrace,
               utility: Optional[UtilityFunction] = None,
               z_draws: int = 64, z_seed: int = 0) -> RunRecord:
    """Drive a policy over one trace, recording decisions and estimator inputs.

    ``z_series[t]`` holds the conditional-mean curve parameter before slot t
    was advanced; for randomized policies it is estimated by averaging
    ``z_draws`` conditional draws from a dedicated substream.
    """
    if isinstance(policy, str):
        policy = make_policy(policy, utility)
    T = trace.horizon
    decisions = np.empty((T, 2), dtype=float)
    z_series = np.empty(T, dtype=float)
    z_rng = np.random.default_rng(z_seed) if policy.randomized else None
    for t in range(T):
        if policy.randomized:
            z_series[t] = float(np.mean([policy.sample_counterfactual_r(z_rng)
                                         for _ in range(z_draws)]))
        else:
            z_series[t] = policy.counterfactual_r()
        x = policy.advance(int(trace.states[t]))
        decisions[t, 0] = x.x1
        decisions[t, 1] = x.x2
    mean = decisions.mean(axis=0)
    return RunRecord(trace=trace, decisions=decisions,
                     running_average=RatePoint(float(mean[0]), float(mean[1])),
                     z_series=z_series)
