"""Bernoulli estimation lab: exact expected errors, regret series and thresholds.

An estimator sequence maps (random seed u, the first n observations) to a
value in [0, 1].  For deterministic estimators the expected alpha-power
error at step n is a finite sum over the 2^n outcomes; when the estimate
depends on the history only through its count of ones (empirical mean,
constants) that sum regroups exactly into n+1 binomially-weighted terms,
which keeps the exact path cheap at any horizon.  History-dependent custom
estimators use the full outcome enumeration (capped at n = 22) or seeded
Monte-Carlo beyond.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .infometrics import TV_COEFF, popcounts

MAX_ENUM_N = 22      # outcome-enumeration cost guard (2^22 ~ 4M outcomes)
_EXACT_COMB_N = 50   # below this, binomial weights use exact integer combinations


@dataclass(frozen=True)
class EstimatorSpec:
    """One estimator sequence: empirical-mean, constant(value) or custom(fn).

    ``fn(u, history)`` receives the seed u in [0, 1) and the observed bits
    as a tuple and must return a value in [0, 1].  ``randomized`` marks
    estimators whose output genuinely depends on u; their errors are
    averaged over seed draws from ``seed``.
    """

    kind: str
    value: Optional[float] = None
    fn: Optional[Callable[[float, tuple], float]] = None
    randomized: bool = False
    seed: int = 0

    @property
    def count_based(self) -> bool:
        """True when the estimate depends on the history only through its sum."""
        return self.kind in ("empirical-mean", "constant")


def empirical_mean() -> EstimatorSpec:
    """The running average of the observations."""
    return EstimatorSpec(kind="empirical-mean")


def constant_estimator(value: float) -> EstimatorSpec:
    """Ignores the data and always answers ``value``."""
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"estimate must lie in [0, 1], got {value}")
    return EstimatorSpec(kind="constant", value=float(value))


def custom_estimator(fn: Callable[[float, tuple], float], randomized: bool = False,
                     seed: int = 0) -> EstimatorSpec:
    """Wrap an arbitrary history-dependent estimation function."""
    return EstimatorSpec(kind="custom", fn=fn, randomized=randomized, seed=seed)


def _seed_draws(est: EstimatorSpec, u_draws: int) -> np.ndarray:
    # the seed of a randomized estimator is realized once per series; the
    # deterministic kinds get a single (ignored or fixed) draw
    rng = np.random.default_rng(est.seed)
    if est.randomized:
        return rng.random(u_draws)
    return rng.random(1)


def _count_values(est: EstimatorSpec, n: int) -> np.ndarray:
    if est.kind == "empirical-mean":
        return np.arange(n + 1, dtype=float) / n
    if est.kind == "constant":
        return np.full(n + 1, est.value, dtype=float)
    raise ValueError(f"estimator kind {est.kind!r} is not count-based")


def _binom_weights(n: int, p: float, log_fact: Optional[np.ndarray] = None) -> np.ndarray:
    """P[k ones among n], k = 0..n; exact combinations for small n."""
    k = np.arange(n + 1)
    if n <= _EXACT_COMB_N:
        combs = np.array([math.comb(n, i) for i in range(n + 1)], dtype=float)
        return combs * p ** k * (1.0 - p) ** (n - k)
    if log_fact is None:
        log_fact = _log_factorials(n)
    if p == 0.0 or p == 1.0:
        out = np.zeros(n + 1)
        out[n if p == 1.0 else 0] = 1.0
        return out
    logpmf = (log_fact[n] - log_fact[k] - log_fact[n - k]
              + k * math.log(p) + (n - k) * math.log1p(-p))
    return np.exp(logpmf)


def _log_factorials(n: int) -> np.ndarray:
    lf = np.zeros(n + 1)
    if n >= 1:
        lf[1:] = np.cumsum(np.log(np.arange(1, n + 1, dtype=float)))
    return lf


def _enum_error(est: EstimatorSpec, p: float, n: int, alpha: float, u: float) -> float:
    """Expected error by full outcome enumeration, conditional on the seed u."""
    counts = popcounts(n)
    weights = p ** counts * (1.0 - p) ** (n - counts)
    if est.count_based:
        vals = _count_values(est, n)[counts]
    else:
        vals = np.empty(2 ** n)
        for i in range(2 ** n):
            w = tuple((i >> j) & 1 for j in range(n))
            vals[i] = est.fn(u, w)
    return float(np.dot(weights, np.abs(vals - p) ** alpha))


def exact_expected_error(est: EstimatorSpec, p: float, n: int, alpha: float,
                         u_draws: int = 16) -> float:
    """Exact expected alpha-power error at step n.

    Sum over all length-n outcomes of |estimate - p|^alpha times the outcome
    probability; count-based estimators use the regrouped binomial form of
    the same sum.  Randomized estimators are averaged over ``u_draws``
    conditional-seed realizations.
    """
    if n < 1:
        raise ValueError(f"step must be >= 1, got {n}")
    if n > MAX_ENUM_N:
        raise ValueError(f"exact enumeration capped at n={MAX_ENUM_N}, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if alpha <= 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if est.count_based:
        weights = _binom_weights(n, p)
        vals = _count_values(est, n)
        return float(np.dot(weights, np.abs(vals - p) ** alpha))
    us = _seed_draws(est, u_draws)
    return float(np.mean([_enum_error(est, p, n, alpha, float(u)) for u in us]))


def exact_error_series(est: EstimatorSpec, p: float, m: int,
                       alphas: Sequence[float]) -> np.ndarray:
    """Exact per-step errors for steps 1..m, one row per alpha.

    Count-based estimators only: the binomial regrouping keeps this exact
    at horizons far beyond the outcome-enumeration guard.
    """
    if not est.count_based:
        raise ValueError("exact series beyond the enumeration guard needs a count-based estimator")
    alphas = list(alphas)
    out = np.empty((len(alphas), m))
    log_fact = _log_factorials(m) if m > _EXACT_COMB_N else None
    for n in range(1, m + 1):
        weights = _binom_weights(n, p, log_fact)
        base = np.abs(_count_values(est, n) - p)
        for a, alpha in enumerate(alphas):
            out[a, n - 1] = float(np.dot(weights, base ** alpha))
    return out


def mc_expected_error(est: EstimatorSpec, p: float, n: int, alpha: float,
                      n_samples: int, seed: int = 0) -> tuple[float, float]:
    """Monte-Carlo expected error at step n; returns (estimate, standard error)."""
    rng = np.random.default_rng(seed)
    us = _seed_draws(est, 1)
    if est.kind == "empirical-mean":
        ones = rng.binomial(n, p, size=n_samples)
        errs = np.abs(ones / n - p) ** alpha
    elif est.kind == "constant":
        errs = np.full(n_samples, abs(est.value - p) ** alpha)
    else:
        bits = (rng.random((n_samples, n)) < p)
        errs = np.empty(n_samples)
        for i in range(n_samples):
            errs[i] = abs(est.fn(float(us[0]), tuple(int(b) for b in bits[i])) - p) ** alpha
    return float(errs.mean()), float(errs.std(ddof=1) / math.sqrt(n_samples))


def regret_normalizer(m: int, alpha: float) -> float:
    """The comparison normalizer: sum of n^(-alpha/2) for n = 1..m."""
    return float(regret_normalizer_series(m, alpha)[-1])


def regret_normalizer_series(m: int, alpha: float) -> np.ndarray:
    """Running normalizers for every horizon 1..m."""
    if m < 1:
        raise ValueError(f"horizon must be >= 1, got {m}")
    return np.cumsum(np.arange(1, m + 1, dtype=float) ** (-alpha / 2.0))


@dataclass(frozen=True)
class RegretSeries:
    """Per-step expected errors with running sums and normalizers."""

    p: float
    alpha: float
    per_step: np.ndarray
    cumulative: np.ndarray
    normalizers: np.ndarray
    per_step_se: Optional[np.ndarray]  # None when the series is exact
    mode: str                          # "exact" or "monte-carlo"


def regret_series(est: EstimatorSpec, p: float, m: int, alpha: float,
                  mode: str = "auto", mc_samples: int = 100_000,
                  seed: int = 0, u_draws: int = 16) -> RegretSeries:
    """Expected alpha-power errors for steps 1..m with cumulative sums.

    Exact where affordable (count-based estimators at any m; custom
    estimators up to the enumeration guard), seeded Monte-Carlo otherwise.
    """
    if mode == "auto":
        mode = "exact" if (est.count_based or m <= MAX_ENUM_N) else "monte-carlo"
    if mode == "exact":
        if est.count_based:
            per_step = exact_error_series(est, p, m, [alpha])[0]
        else:
            per_step = np.array([exact_expected_error(est, p, n, alpha, u_draws)
                                 for n in range(1, m + 1)])
        se = None
    elif mode == "monte-carlo":
        per_step, se = _mc_error_series(est, p, m, alpha, mc_samples, seed)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return RegretSeries(p=p, alpha=alpha, per_step=per_step,
                        cumulative=np.cumsum(per_step),
                        normalizers=regret_normalizer_series(m, alpha),
                        per_step_se=se, mode=mode)


def _mc_error_series(est: EstimatorSpec, p: float, m: int, alpha: float,
                     n_samples: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    us = _seed_draws(est, 1)
    sums = np.zeros(m)
    sumsq = np.zeros(m)
    rows_per_chunk = max(1, int(4e6 / m))
    done = 0
    while done < n_samples:
        rows = min(rows_per_chunk, n_samples - done)
        bits = rng.random((rows, m)) < p
        if est.kind == "empirical-mean":
            a = np.cumsum(bits, axis=1, dtype=float) / np.arange(1, m + 1, dtype=float)
            errs = np.abs(a - p) ** alpha
        elif est.kind == "constant":
            errs = np.broadcast_to(np.abs(est.value - p) ** alpha, (rows, m)).copy()
        else:
            errs = np.empty((rows, m))
            for i in range(rows):
                w = tuple(int(b) for b in bits[i])
                for n in range(1, m + 1):
                    errs[i, n - 1] = abs(est.fn(float(us[0]), w[:n]) - p) ** alpha
        sums += errs.sum(axis=0)
        sumsq += (errs ** 2).sum(axis=0)
        done += rows
    mean = sums / n_samples
    var = np.maximum(0.0, sumsq / n_samples - mean ** 2) * n_samples / max(1, n_samples - 1)
    return mean, np.sqrt(var / n_samples)


# ---------------------------------------------------------------------------
# Lower-bound constants and the truncated-error machinery
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RegretThresholds:
    """Limsup thresholds of the normalized-regret lower bound."""

    threshold: float         # 1 / (c^alpha 2^(3+2 alpha)), normalizer V_m(alpha)
    alpha2_threshold: float  # 3 / 2^10, normalizer log(m+1) (the alpha = 2 case)
    alpha1_threshold: float  # 1 / (2^4 c), normalizer sqrt(m+1) - 1 (the alpha = 1 case)


def regret_thresholds(alpha: float) -> RegretThresholds:
    """Normalized-regret lower-bound constants; valid for alpha in (0, 2]."""
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (0, 2], got {alpha}")
    # 1/c^alpha = (3/8)^(alpha/2); this form keeps the alpha = 2 value
    # exactly equal to 3/2^10 in floating point
    return RegretThresholds(
        threshold=(3.0 / 8.0) ** (alpha / 2.0) / 2.0 ** (3.0 + 2.0 * alpha),
        alpha2_threshold=3.0 / 2.0 ** 10,
        alpha1_threshold=1.0 / (2.0 ** 4 * TV_COEFF),
    )


def two_point_separation(n: int) -> float:
    """The probe separation 1 / (2 c sqrt(n)) at which the two-point bound binds."""
    if n < 1:
        raise ValueError(f"step must be >= 1, got {n}")
    return 1.0 / (2.0 * TV_COEFF * math.sqrt(n))


def truncation_cap(n: int, alpha: float) -> float:
    """Cap applied to per-step errors: separation^alpha / 2^(1+alpha)."""
    return two_point_separation(n) ** alpha / 2.0 ** (1.0 + alpha)


def truncated_error(est: EstimatorSpec, p: float, n: int, alpha: float,
                    u_draws: int = 16) -> float:
    """min(exact expected error, truncation cap) for one step."""
    return min(exact_expected_error(est, p, n, alpha, u_draws), truncation_cap(n, alpha))


@dataclass(frozen=True)
class TwoPointCheck:
    lhs: float
    rhs: float
    holds: bool
    vacuous: bool  # separation precondition failed; the bound asserts nothing


def two_point_regret_check(est: EstimatorSpec, p: float, q: float, n: int,
                           alpha: float, u_draws: int = 16) -> TwoPointCheck:
    """Check E_p|A_n - p|^a + E_q|A_n - q|^a >= |p-q|^a / 2^(1+a).

    The bound applies whenever |p - q| <= 1/(2 c sqrt(n)); outside that
    separation it is vacuous and reported as holding.
    """
    if not (0.25 <= p <= 0.75 and 0.25 <= q <= 0.75):
        raise ValueError("the two-point bound is stated for p, q in [1/4, 3/4]")
    lhs = (exact_expected_error(est, p, n, alpha, u_draws)
           + exact_expected_error(est, q, n, alpha, u_draws))
    rhs = abs(p - q) ** alpha / 2.0 ** (1.0 + alpha)
    vacuous = abs(p - q) > two_point_separation(n) + 1e-12
    return TwoPointCheck(lhs=lhs, rhs=rhs, holds=vacuous or lhs >= rhs - 1e-12,
                         vacuous=vacuous)


@dataclass(frozen=True)
class ProxyResult:
    """Finite-horizon proxy for the limsup measure statement."""

    alpha: float
    horizon: int
    threshold: float
    fraction_above: float
    entries: list[tuple[float, float]]  # (p, normalized regret) sorted by value
    mode: str


def measure_proxy_experiment(est: EstimatorSpec, n_samples: int, m: int, alpha: float,
                             seed: int, mc_samples: int = 100_000) -> ProxyResult:
    """Sample p uniformly on [1/4, 3/4]; report the fraction whose normalized
    regret at horizon m meets the lower-bound threshold.

    This evaluates the limsup criterion at a single finite horizon, so it is
    a proxy: the reported fraction carries the horizon it was computed at.
    """
    thr = regret_thresholds(alpha).threshold
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0]))
    ps = rng.uniform(0.25, 0.75, n_samples)
    entries: list[tuple[float, float]] = []
    mode = "exact" if (est.count_based or m <= MAX_ENUM_N) else "monte-carlo"
    vm = regret_normalizer(m, alpha)
    for k, p in enumerate(ps):
        series = regret_series(est, float(p), m, alpha, mode=mode,
                               mc_samples=mc_samples,
                               seed=int(np.random.SeedSequence([int(seed), k + 1]).generate_state(1)[0]))
        entries.append((float(p), float(series.cumulative[-1] / vm)))
    entries.sort(key=lambda e: e[1])
    if entries:
        frac = sum(1 for _, v in entries if v >= thr) / len(entries)
    else:
        frac = float("nan")
    return ProxyResult(alpha=alpha, horizon=m, threshold=thr, fraction_above=frac,
                       entries=entries, mode=mode)


@dataclass(frozen=True)
class IntegralCheck:
    m: int
    alpha: float
    lhs: float
    rhs: float
    holds: bool


def integral_regret_check(est: EstimatorSpec, m: int, alpha: float,
                          grid_points: int = 2048) -> IntegralCheck:
    """Integrated truncated-regret inequality over p in [1/4, 3/4].

    Checks  2 * integral of sum_{n<=m} min(E_p|A_n - p|^a, cap_n)  against
    V_m(a)/(c^a 2^(2+2a)) - V_{m}(a+1)/(c^(a+1) 2^(2+2a)), by midpoint
    quadrature with exact per-step errors (count-based estimators).
    """
    if not est.count_based:
        raise ValueError("the integral check needs a count-based estimator (exact per-step errors)")
    if m > _EXACT_COMB_N:
        raise ValueError(f"integral check capped at m={_EXACT_COMB_N}, got {m}")
    grid = 0.25 + (np.arange(grid_points) + 0.5) * (0.5 / grid_points)
    total = np.zeros(grid_points)
    for n in range(1, m + 1):
        vals = _count_values(est, n)
        k = np.arange(n + 1)
        combs = np.array([math.comb(n, i) for i in range(n + 1)], dtype=float)
        pmf_rows = combs * grid[:, None] ** k * (1.0 - grid[:, None]) ** (n - k)
        errs = (pmf_rows * np.abs(vals[None, :] - grid[:, None]) ** alpha).sum(axis=1)
        total += np.minimum(errs, truncation_cap(n, alpha))
    integral = float(total.mean() * 0.5)  # interval length 1/2, midpoint rule
    lhs = 2.0 * integral
    va = regret_normalizer(m, alpha)
    va1 = regret_normalizer(m, alpha + 1.0)
    rhs = (va / (TV_COEFF ** alpha * 2.0 ** (2.0 + 2.0 * alpha))
           - va1 / (TV_COEFF ** (alpha + 1.0) * 2.0 ** (2.0 + 2.0 * alpha)))
    return IntegralCheck(m=m, alpha=alpha, lhs=lhs, rhs=rhs, holds=lhs >= rhs - 1e-12)


@dataclass(frozen=True)
class TightnessReport:
    """Constant-factor gap between the empirical mean's regret and the lower bound."""

    alpha: float
    achievable_constant: float  # limsup constant of the empirical mean
    lower_constant: float       # matching lower-bound constant
    factor: float


def tightness_report(alpha: float) -> TightnessReport:
    """Ratio of the empirical mean's limsup regret constant to the lower bound.

    For alpha = 2 the achievable constant is 1/4 against 3/2^10; for
    alpha < 2 it is (1/2)^a / (1 - a/2) against the matching separation
    constant.  The ratio equals 2^(3 + 5a/2) / 3^(a/2) for all a in (0, 2].
    """
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (0, 2], got {alpha}")
    thr = regret_thresholds(alpha)
    if alpha == 2.0:
        upper = 0.25
        lower = thr.alpha2_threshold
    else:
        upper = 0.5 ** alpha / (1.0 - alpha / 2.0)
        lower = thr.threshold / (1.0 - alpha / 2.0)
    return TightnessReport(alpha=alpha, achievable_constant=upper,
                           lower_constant=lower, factor=upper / lower)
