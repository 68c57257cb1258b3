"""Channel model, decision sets and utility catalog for the 2-user system.

The channel is a seeded i.i.d. Bernoulli(q) state sequence.  When the state
is 0 the controller is forced to the rate vector (1, 0); when the state is 1
it picks any point on the tradeoff curve {(r, 1 - r^2) : r in [0, 1]}.  The
log(1+x) utility used throughout is entrywise nondecreasing and strongly
concave on [0, 1]^2 with parameter 1/4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

# Tolerances used for algebraic identities and optimizer outputs everywhere
# in the package (64-bit floats leave ample headroom at these levels).
ALGEBRAIC_TOL = 1e-12
OPT_TOL = 1e-9


def derive_seed(master_seed: int, *path: int) -> int:
    """Fold (master seed, index path) into one 64-bit stream seed.

    Built on numpy's SeedSequence so that replication substreams derived
    from the same master seed are statistically independent and
    reproducible.  The path length is folded in as well: SeedSequence
    ignores trailing zero entropy words, so (7,) and (7, 0) would
    otherwise collide.
    """
    words = [int(master_seed), len(path), *[int(p) for p in path]]
    return int(np.random.SeedSequence(words).generate_state(2, np.uint64)[0])


class RatePoint(NamedTuple):
    """A per-slot or time-averaged transmission rate pair in [0, 1]^2."""

    x1: float
    x2: float


@dataclass(frozen=True)
class ChannelTrace:
    """A realized Bernoulli(q) state sequence with its generating parameters."""

    q: float
    horizon: int
    seed: int
    states: np.ndarray  # shape (horizon,), uint8 values in {0, 1}

    def __post_init__(self) -> None:
        self.states.setflags(write=False)

    def to_rows(self):
        """Yield (t, s) pairs, the CSV dump schema for traces."""
        for t in range(self.horizon):
            yield t, int(self.states[t])


def generate_trace(q: float, horizon: int, seed: int) -> ChannelTrace:
    """Draw an i.i.d. Bernoulli(q) state sequence of the given length.

    Deterministic given (q, horizon, seed): the same inputs always
    reproduce the identical sequence bit for bit.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    rng = np.random.default_rng(seed)
    states = (rng.random(horizon) < q).astype(np.uint8)
    return ChannelTrace(q=float(q), horizon=int(horizon), seed=int(seed), states=states)


def decision_set_point(s: int, r: float) -> RatePoint:
    """Feasible rate vector for channel state s and curve parameter r.

    State 0 forces (1, 0) and ignores r; state 1 returns (r, 1 - r^2).
    """
    if s not in (0, 1):
        raise ValueError(f"channel state must be 0 or 1, got {s}")
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"curve parameter must lie in [0, 1], got {r}")
    if s == 0:
        return RatePoint(1.0, 0.0)
    return RatePoint(float(r), 1.0 - float(r) * float(r))


def shannon_fdm_point(theta1: float, bandwidth: float, snr: float) -> RatePoint:
    """Rate pair for a frequency-division split of an AWGN channel.

    User 1 gets a fraction theta1 of the band, user 2 the rest; each channel
    carries theta_i * B * ln(1 + snr / theta_i) nats.  The theta_i -> 0 limit
    of a term is 0 (removable singularity), so the endpoints are exact.
    """
    if not 0.0 <= theta1 <= 1.0:
        raise ValueError(f"theta1 must lie in [0, 1], got {theta1}")
    if bandwidth <= 0.0 or snr <= 0.0:
        raise ValueError("bandwidth and snr must be positive")
    theta2 = 1.0 - theta1

    def rate(theta: float) -> float:
        if theta == 0.0:
            return 0.0
        return theta * bandwidth * math.log(1.0 + snr / theta)

    return RatePoint(rate(theta1), rate(theta2))


# ---------------------------------------------------------------------------
# Utility catalog
# ---------------------------------------------------------------------------

Scalar = Callable[[float], float]


@dataclass(frozen=True)
class UtilityFunction:
    """A concave utility of the two time-averaged rates.

    Separable kinds carry per-user value/derivative/second-derivative
    evaluators; non-smooth kinds (min) only carry the joint value.
    """

    kind: str
    f1: Optional[Scalar] = None
    d1: Optional[Scalar] = None
    dd1: Optional[Scalar] = None
    f2: Optional[Scalar] = None
    d2: Optional[Scalar] = None
    dd2: Optional[Scalar] = None
    value2d: Optional[Callable[[float, float], float]] = None
    label: str = ""

    @property
    def separable(self) -> bool:
        return self.f1 is not None and self.f2 is not None

    @property
    def differentiable(self) -> bool:
        return self.d1 is not None and self.d2 is not None

    def value(self, x1: float, x2: float) -> float:
        if self.value2d is not None:
            return self.value2d(x1, x2)
        return self.f1(x1) + self.f2(x2)

    def grad(self, x1: float, x2: float) -> tuple[float, float]:
        if not self.differentiable:
            raise ValueError(f"utility kind {self.kind!r} has no derivative contract")
        return self.d1(x1), self.d2(x2)


def log1p_utility() -> UtilityFunction:
    """phi(x1, x2) = log(1 + x1) + log(1 + x2), natural log."""
    return UtilityFunction(
        kind="log1p",
        f1=math.log1p, d1=lambda x: 1.0 / (1.0 + x), dd1=lambda x: -1.0 / (1.0 + x) ** 2,
        f2=math.log1p, d2=lambda x: 1.0 / (1.0 + x), dd2=lambda x: -1.0 / (1.0 + x) ** 2,
        label="log1p",
    )


def scaled_log_utility(c: float) -> UtilityFunction:
    """phi(x1, x2) = log(1 + c x1) + log(1 + c x2) for c > 0."""
    if c <= 0.0:
        raise ValueError(f"scale must be positive, got {c}")
    return UtilityFunction(
        kind="scaled-log",
        f1=lambda x: math.log1p(c * x), d1=lambda x: c / (1.0 + c * x),
        dd1=lambda x: -(c * c) / (1.0 + c * x) ** 2,
        f2=lambda x: math.log1p(c * x), d2=lambda x: c / (1.0 + c * x),
        dd2=lambda x: -(c * c) / (1.0 + c * x) ** 2,
        label=f"scaled-log({c})",
    )


def linear_utility(a1: float, a2: float) -> UtilityFunction:
    """phi(x1, x2) = a1 x1 + a2 x2 with nonnegative weights."""
    if a1 < 0.0 or a2 < 0.0:
        raise ValueError("linear weights must be nonnegative")
    return UtilityFunction(
        kind="linear",
        f1=lambda x: a1 * x, d1=lambda x: a1, dd1=lambda x: 0.0,
        f2=lambda x: a2 * x, d2=lambda x: a2, dd2=lambda x: 0.0,
        label=f"linear({a1},{a2})",
    )


def min_utility() -> UtilityFunction:
    """phi(x1, x2) = min(x1, x2); concave but not smooth."""
    return UtilityFunction(kind="min", value2d=lambda x1, x2: min(x1, x2), label="min")


def separable_utility(f1: Scalar, d1: Scalar, dd1: Scalar,
                      f2: Scalar, d2: Scalar, dd2: Scalar,
                      label: str = "custom") -> UtilityFunction:
    """Wrap user-supplied per-component evaluators as a separable utility."""
    return UtilityFunction(kind="separable-custom",
                           f1=f1, d1=d1, dd1=dd1, f2=f2, d2=d2, dd2=dd2, label=label)


def utility_value(u: UtilityFunction, p: Sequence[float]) -> float:
    """Evaluate the utility at a point of [0, 1]^2."""
    x1, x2 = float(p[0]), float(p[1])
    return u.value(x1, x2)


def solver_assumptions_ok(u: UtilityFunction, grid_step: float = 1e-3) -> bool:
    """Non-throwing variant of check_solver_assumptions."""
    try:
        check_solver_assumptions(u, grid_step)
    except ValueError:
        return False
    return True


def check_solver_assumptions(u: UtilityFunction, grid_step: float = 1e-3) -> None:
    """Validate the conditions under which the split equation has a unique root.

    Requires, on a grid of [0, 1]: phi_i' > 0 (strictly increasing),
    phi_i'' < 0 (strictly concave), and the endpoint slope condition
    phi_1'(1) < 2 phi_2'(0) which puts the root in the open interval.
    Raises ValueError naming the first violated condition.
    """
    if not u.separable or not u.differentiable or u.dd1 is None or u.dd2 is None:
        raise ValueError(f"utility kind {u.kind!r} is not a separable twice-differentiable utility")
    grid = np.arange(0.0, 1.0 + grid_step / 2, grid_step)
    for name, d, dd in (("phi1", u.d1, u.dd1), ("phi2", u.d2, u.dd2)):
        for x in grid:
            if d(float(x)) <= 0.0:
                raise ValueError(f"{name}'({x:.4f}) <= 0: utility is not strictly increasing")
            if dd(float(x)) >= 0.0:
                raise ValueError(f"{name}''({x:.4f}) >= 0: utility is not strictly concave")
    if not u.d1(1.0) < 2.0 * u.d2(0.0):
        raise ValueError("endpoint slope condition phi1'(1) < 2 phi2'(0) fails")


# ---------------------------------------------------------------------------
# Single-run bookkeeping
# ---------------------------------------------------------------------------

@dataclass
class RunRecord:
    """Decisions, running average and estimator inputs of one policy run."""

    trace: ChannelTrace
    decisions: np.ndarray        # shape (T, 2)
    running_average: RatePoint   # arithmetic mean of decisions
    z_series: np.ndarray         # counterfactual r before each slot, shape (T,)
    theta_series: Optional[np.ndarray] = field(default=None)  # filled by the converse harness


def validate_run_record(rec: RunRecord, tol: float = ALGEBRAIC_TOL) -> None:
    """Check feasibility of every decision and the running-average identity."""
    states = rec.trace.states
    dec = rec.decisions
    if dec.shape != (rec.trace.horizon, 2):
        raise ValueError("decision array shape does not match the trace horizon")
    off = states == 0
    if off.any():
        bad = (dec[off, 0] != 1.0) | (dec[off, 1] != 0.0)
        if bad.any():
            raise ValueError("a state-0 slot has a decision other than (1, 0)")
    on = ~off
    if on.any():
        resid = np.abs(dec[on, 1] - (1.0 - dec[on, 0] ** 2))
        if resid.max() > tol:
            raise ValueError(f"state-1 decision off the tradeoff curve by {resid.max():.3e}")
    mean = dec.mean(axis=0)
    if abs(mean[0] - rec.running_average.x1) > tol or abs(mean[1] - rec.running_average.x2) > tol:
        raise ValueError("running average does not equal the mean of decisions")
