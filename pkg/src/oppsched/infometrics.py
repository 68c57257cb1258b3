"""KL divergence, total variation and Pinsker checks for product Bernoulli measures.

All divergences are in nats.  Total variation over the finite outcome space
{0,1}^n is computed exactly; since the product measure of an outcome depends
only on its number of ones, the half-L1 sum over 2^n outcomes regroups into
n+1 binomially-weighted terms, which is what the implementation evaluates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Coefficient of the refined total-variation bound tv <= TV_COEFF |p-q| sqrt(n),
# valid for p, q in [1/4, 3/4].
TV_COEFF = math.sqrt(8.0 / 3.0)

MAX_ENUM_N = 22  # cost guard for exact enumeration


@dataclass(frozen=True)
class ProductBernoulli:
    """The measure of n i.i.d. Bernoulli(p) variables on {0,1}^n."""

    p: float
    n: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.n < 1:
            raise ValueError(f"dimension must be >= 1, got {self.n}")

    def outcome_probabilities(self) -> np.ndarray:
        """Probability of each of the 2^n outcomes, indexed by the integer
        whose bit j is observation j+1."""
        if self.n > MAX_ENUM_N:
            raise ValueError(f"enumeration capped at n={MAX_ENUM_N}, got {self.n}")
        k = popcounts(self.n)
        return self.p ** k * (1.0 - self.p) ** (self.n - k)


def popcounts(n: int) -> np.ndarray:
    """Number of set bits of every integer in [0, 2^n), by doubling."""
    k = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        k = np.concatenate([k, k + 1])
    return k


def bernoulli_kl(p: float, q: float) -> float:
    """KL divergence of Bernoulli(p) from Bernoulli(q) in nats.

    Conventions: 0 log(0/x) = 0; the divergence is +inf when q puts zero
    mass where p does not (absolute-continuity failure).
    """
    if not 0.0 <= p <= 1.0 or not 0.0 <= q <= 1.0:
        raise ValueError("probabilities must lie in [0, 1]")
    term1 = 0.0 if p == 0.0 else (math.inf if q == 0.0 else p * math.log(p / q))
    term2 = 0.0 if p == 1.0 else (math.inf if q == 1.0 else (1.0 - p) * math.log((1.0 - p) / (1.0 - q)))
    return term1 + term2


def kl_product(p: float, q: float, n: int) -> float:
    """KL divergence of the n-fold product measures: n times the per-sample KL."""
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    return n * bernoulli_kl(p, q)


def tv_exact(p: float, q: float, n: int) -> float:
    """Exact total variation between the two product measures.

    Half the L1 distance over all 2^n outcomes (equal to the sup over
    events on a finite space), regrouped by the count of ones.
    """
    if n > MAX_ENUM_N:
        raise ValueError(f"exact total variation capped at n={MAX_ENUM_N}, got {n}")
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    total = 0.0
    for k in range(n + 1):
        comb = math.comb(n, k)
        total += comb * abs(p ** k * (1.0 - p) ** (n - k) - q ** k * (1.0 - q) ** (n - k))
    return 0.5 * total


@dataclass(frozen=True)
class TvBoundCheck:
    tv: float
    bound: float
    holds: bool


def tv_bound_check(p: float, q: float, n: int) -> TvBoundCheck:
    """Check tv <= TV_COEFF |p-q| sqrt(n) (refined bound, p, q in [1/4, 3/4])."""
    tv = tv_exact(p, q, n)
    bound = TV_COEFF * abs(p - q) * math.sqrt(n)
    return TvBoundCheck(tv=tv, bound=bound, holds=tv <= bound + 1e-12)


@dataclass(frozen=True)
class PinskerCheck:
    tv: float
    pinsker_rhs: float
    holds: bool


def pinsker_check(p: float, q: float, n: int) -> PinskerCheck:
    """Check tv <= min over both orders of sqrt(KL/2)."""
    tv = tv_exact(p, q, n)
    rhs = min(math.sqrt(0.5 * kl_product(p, q, n)), math.sqrt(0.5 * kl_product(q, p, n)))
    return PinskerCheck(tv=tv, pinsker_rhs=rhs, holds=tv <= rhs + 1e-12)
