"""One-shot expectation region, optimal operating point, and the q -> r map.

For channel probability q the achievable one-shot expectations form the
convex hull of the boundary curve bnd(r) = (1 - q + q r, q (1 - r^2)),
cut out by three inequalities.  Under the log(1+x) utility the maximizer
sits on that curve at a parameter r given in closed form; the map from q
to that parameter (written ``optimal_r`` here) is a strictly increasing
bijection from [0, 1] onto [1/4, (sqrt 7 - 1)/3] whose slope is bounded
below by its value at q = 1.  Inverting it turns any policy's conditional
decision into an implicit estimate of q, which is what the converse
harness exploits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .system import UtilityFunction, RatePoint, check_solver_assumptions, log1p_utility

ArrayLike = Union[float, np.ndarray]

# Range of the q -> r map and the lower bound on its slope.
R_AT_Q0 = 0.25
R_AT_Q1 = (math.sqrt(7.0) - 1.0) / 3.0          # ~0.5485837703548635
MIN_R_SLOPE = 2.0 / 3.0 - math.sqrt(7.0) / 6.0  # slope at q=1, ~0.2257081148225682


@dataclass(frozen=True)
class RegionSpec:
    """The region parameter: channel probability q in (0, 1]."""

    q: float

    def __post_init__(self) -> None:
        if not 0.0 < self.q <= 1.0:
            raise ValueError(f"region requires q in (0, 1], got {self.q}")


@dataclass(frozen=True)
class OptimalPoint:
    """Optimal curve parameter, operating point and utility value."""

    r_star: float
    x_star: RatePoint
    phi_star: float


def boundary_point(q: float, r: ArrayLike) -> tuple[ArrayLike, ArrayLike]:
    """Upper-boundary point (1 - q + q r, q (1 - r^2)) of the region."""
    return (1.0 - q) + q * np.asarray(r, dtype=float), q * (1.0 - np.asarray(r, dtype=float) ** 2)


def region_contains(spec: RegionSpec, p, tol: float = 0.0) -> bool:
    """Membership test via the three defining inequalities.

    Requires 1 - q <= x1 <= 1 (within tol), x1 + x2 >= 1 (within tol) and
    x2 <= 2 (1 - x1) - (1 - x1)^2 / q (within tol).
    """
    if tol < 0.0:
        raise ValueError("tol must be nonnegative")
    q = spec.q
    x1, x2 = float(p[0]), float(p[1])
    if x1 < 1.0 - q - tol or x1 > 1.0 + tol:
        return False
    if x1 + x2 < 1.0 - tol:
        return False
    u = 1.0 - x1
    return x2 <= 2.0 * u - u * u / q + tol


@dataclass(frozen=True)
class BoundaryMixture:
    """A convex combination of two boundary points dominating a target point."""

    r_a: float
    r_b: float
    lam: float

    def point(self, q: float) -> tuple[float, float]:
        xa1, xa2 = boundary_point(q, self.r_a)
        xb1, xb2 = boundary_point(q, self.r_b)
        return (self.lam * xa1 + (1.0 - self.lam) * xb1,
                self.lam * xa2 + (1.0 - self.lam) * xb2)


def region_decompose(spec: RegionSpec, p) -> Optional[BoundaryMixture]:
    """Constructive achievability witness for a point of the region.

    Returns a boundary mixture whose point dominates p entrywise, or None
    when p fails the containment test at tolerance 1e-9.  The boundary
    point sharing p's first coordinate always dominates: its second
    coordinate equals the upper-constraint value 2(1-x1) - (1-x1)^2/q.
    """
    if not region_contains(spec, p, tol=1e-9):
        return None
    q = spec.q
    r_a = (float(p[0]) - 1.0 + q) / q
    r_a = min(1.0, max(0.0, r_a))
    return BoundaryMixture(r_a=r_a, r_b=r_a, lam=1.0)


# ---------------------------------------------------------------------------
# The q -> r map and its inverse
# ---------------------------------------------------------------------------

def optimal_r_closed_form(q: float) -> float:
    """Closed-form optimal curve parameter for the log(1+x) utility, q > 0.

    This is the positive root of 3 q r^2 + (4 - 2q) r - (1 + q) = 0, i.e.
    (-(2-q) + sqrt(4 q^2 - q + 4)) / (3 q); evaluated in the rationalized
    form (q+1) / (2 - q + sqrt(4 q^2 - q + 4)) which is algebraically equal
    and numerically stable as q -> 0.  The value runs from 1/4 up to
    (sqrt 7 - 1)/3 as q goes from 0 to 1.
    """
    if not 0.0 < q <= 1.0:
        raise ValueError(f"closed form requires q in (0, 1], got {q}")
    return float(optimal_r(q))


def optimal_r(q: ArrayLike) -> ArrayLike:
    """The q -> r map on all of [0, 1], with the continuity value 1/4 at q=0."""
    qa = np.asarray(q, dtype=float)
    root = np.sqrt((4.0 * qa * qa - qa) + 4.0)
    out = (qa + 1.0) / ((2.0 - qa) + root)
    return float(out) if np.isscalar(q) or out.ndim == 0 else out


def optimal_r_derivative(q: ArrayLike) -> ArrayLike:
    """Slope of the q -> r map, continuous on [0, 1].

    Rationalized form 21 / (2 sqrt(D) (4 sqrt(D) + 8 - q)) with
    D = 4 q^2 - q + 4; equal to the quotient-rule expression
    (q - 8 + 4 sqrt(D)) / (6 q^2 sqrt(D)) on (0, 1] and continuous at 0
    where it takes the value 21/64.  The minimum over [0, 1] is at q = 1
    and equals MIN_R_SLOPE.
    """
    qa = np.asarray(q, dtype=float)
    root = np.sqrt((4.0 * qa * qa - qa) + 4.0)
    out = 21.0 / (2.0 * root * (4.0 * root + (8.0 - qa)))
    return float(out) if np.isscalar(q) or out.ndim == 0 else out


def invert_optimal_r(y: float, slack: float = 1e-9) -> float:
    """Inverse of the q -> r map by bisection to absolute tolerance 1e-12.

    Valid because the map is strictly increasing from 1/4 to (sqrt 7 - 1)/3;
    inputs outside that range by more than `slack` are rejected, inputs
    within slack are clamped to the endpoints.
    """
    if y < R_AT_Q0 - slack or y > R_AT_Q1 + slack:
        raise ValueError(f"value {y} outside the map's range [{R_AT_Q0}, {R_AT_Q1}]")
    y = min(R_AT_Q1, max(R_AT_Q0, y))
    lo, hi = 0.0, 1.0
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if optimal_r(mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Optimal operating point and the general separable solver
# ---------------------------------------------------------------------------

def split_equation(q: float, r: float, u: UtilityFunction) -> float:
    """g(q, r) = phi1'(1 - q + q r) - 2 r phi2'(q (1 - r^2)).

    Zero exactly at the optimal curve parameter; strictly decreasing in r
    for utilities passing the solver assumptions.
    """
    x1 = (1.0 - q) + q * r
    x2 = q * (1.0 - r * r)
    return u.d1(x1) - 2.0 * r * u.d2(x2)


def solve_general_r(q: float, u: UtilityFunction, tol: float = 1e-12,
                    check: bool = True) -> float:
    """Root of the split equation in (0, 1) by bisection.

    The endpoint signs g(q, 0) > 0 > g(q, 1) are guaranteed by the solver
    assumptions (checked first; pass check=False when already validated),
    and g is strictly decreasing in r, so bisection converges
    unconditionally.  q = 0 and q = 1 are admitted as continuity cases:
    the same endpoint signs hold there under the assumptions.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"solver requires q in [0, 1], got {q}")
    if check:
        check_solver_assumptions(u)
    g0 = split_equation(q, 0.0, u)
    g1 = split_equation(q, 1.0, u)
    if not (g0 > 0.0 > g1):
        raise ValueError(f"split equation does not bracket a root at q={q}: g(0)={g0}, g(1)={g1}")
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if split_equation(q, mid, u) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def optimal_point(q: float, u: UtilityFunction | None = None) -> OptimalPoint:
    """Unique utility maximizer over the region, as a point on the boundary curve.

    For the log(1+x) utility the curve parameter is the closed form; for a
    validated separable utility it is the bisection root of the split
    equation.  Other kinds are rejected.
    """
    if not 0.0 < q <= 1.0:
        raise ValueError(f"optimal point requires q in (0, 1], got {q}")
    if u is None:
        u = log1p_utility()
    if u.kind in ("log1p",):
        r = float(optimal_r(q))
    else:
        r = solve_general_r(q, u)
    x1, x2 = boundary_point(q, r)
    return OptimalPoint(r_star=r, x_star=RatePoint(float(x1), float(x2)),
                        phi_star=u.value(float(x1), float(x2)))


def phi_star(q: float, u: UtilityFunction | None = None) -> float:
    """Optimal utility value over the region for channel probability q."""
    return optimal_point(q, u).phi_star


def numeric_beta(u: UtilityFunction, q_lo: float = 0.25, q_hi: float = 0.75,
                 grid_step: float = 1e-3) -> float:
    """Minimum central-difference slope of the solved q -> r map on [q_lo, q_hi].

    Must come out strictly positive for any utility passing the solver
    assumptions; a nonpositive value is reported as an assumption violation.
    """
    if not 0.0 <= q_lo < q_hi <= 1.0:
        raise ValueError("need 0 <= q_lo < q_hi <= 1")
    check_solver_assumptions(u)
    qs = np.arange(q_lo, q_hi + grid_step / 2, grid_step)
    rs = np.array([solve_general_r(float(q), u, check=False) for q in qs])
    slopes = (rs[2:] - rs[:-2]) / (qs[2:] - qs[:-2])
    beta = float(slopes.min())
    if beta <= 0.0:
        raise ValueError(f"q -> r map slope {beta} is not positive: assumption violation")
    return beta
