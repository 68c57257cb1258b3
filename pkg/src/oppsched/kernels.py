"""Backend selection for the batch simulation kernel.

The compiled extension is preferred when it imported cleanly; the numpy
fallback is always available.  ``OPPSCHED_BACKEND=numpy|cython`` overrides
the choice (``cython`` raises if the extension is missing).  Both backends
implement the same ``run_batch`` contract and agree to roundoff; the
benchmark under benchmarks/ compares their throughput.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_np
from ._kernels_np import CONSTANT_R, PLUGIN, FRANK_WOLFE
from . import optimal

try:
    from . import _speedups
    HAVE_SPEEDUPS = True
except ImportError:  # extension not built on this install
    _speedups = None
    HAVE_SPEEDUPS = False


def _select_backend() -> str:
    env = os.environ.get("OPPSCHED_BACKEND", "").strip().lower()
    if env in ("", "auto"):
        return "cython" if HAVE_SPEEDUPS else "numpy"
    if env == "cython":
        if not HAVE_SPEEDUPS:
            raise ImportError("OPPSCHED_BACKEND=cython but the compiled extension is unavailable")
        return "cython"
    if env == "numpy":
        return "numpy"
    raise ValueError(f"unknown OPPSCHED_BACKEND value {env!r}")


BACKEND = _select_backend()


def kernel_spec(policy_spec: str) -> tuple[int, float, float]:
    """Map a policy spec string to kernel parameters (code, r_const, eta).

    The kernel implements the log(1+x) utility system: the greedy constant
    is the one-slot maximizer, the genie constant is the optimal parameter
    for its q, and the Frank-Wolfe gradient is the log(1+x) gradient.
    """
    s = policy_spec.strip()
    if s == "greedy":
        return CONSTANT_R, optimal.R_AT_Q1, 0.0
    if s.startswith("genie:"):
        q = float(s.split(":", 1)[1])
        if not 0.0 < q <= 1.0:
            raise ValueError(f"genie requires q in (0, 1], got {q}")
        return CONSTANT_R, float(optimal.optimal_r(q)), 0.0
    if s == "plugin":
        return PLUGIN, 0.0, 0.0
    if s == "fw-vanishing":
        return FRANK_WOLFE, 0.0, 0.0
    if s.startswith("fw-constant:"):
        eta = float(s.split(":", 1)[1])
        if not 0.0 < eta < 1.0:
            raise ValueError(f"constant stepsize must lie in (0, 1), got {eta}")
        return FRANK_WOLFE, 0.0, eta
    raise ValueError(f"unknown policy spec {policy_spec!r}")


def run_batch(policy_code: int, r_const: float, eta: float,
              states: np.ndarray, q: float, horizons,
              backend: str | None = None):
    """Run the batch kernel on a (R, T) state matrix; see the fallback docstring."""
    horizons = np.asarray(horizons, dtype=np.int64)
    if horizons.ndim != 1 or len(horizons) == 0:
        raise ValueError("need at least one horizon")
    if np.any(np.diff(horizons) <= 0):
        raise ValueError("horizons must be strictly increasing")
    if horizons[0] < 1 or horizons[-1] != states.shape[1]:
        raise ValueError("horizons must lie in [1, T] with the last equal to T")
    states = np.ascontiguousarray(states, dtype=np.uint8)
    which = backend if backend is not None else BACKEND
    if which == "cython":
        if not HAVE_SPEEDUPS:
            raise ImportError("compiled backend requested but unavailable")
        nh, R = len(horizons), states.shape[0]
        out_x1 = np.empty((nh, R))
        out_x2 = np.empty((nh, R))
        out_th = np.empty((nh, R))
        _speedups.run_batch(policy_code, r_const, eta, states, q, horizons,
                            optimal.R_AT_Q0, optimal.R_AT_Q1, out_x1, out_x2, out_th)
        return out_x1, out_x2, out_th
    if which == "numpy":
        return _kernels_np.run_batch(policy_code, r_const, eta, states, q, horizons,
                                     optimal.R_AT_Q0, optimal.R_AT_Q1)
    raise ValueError(f"unknown backend {which!r}")
