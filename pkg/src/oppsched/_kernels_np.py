"""Pure-numpy batch simulation kernel (fallback for the compiled extension).

Vectorizes across replications: per slot, one set of vector operations
updates every replication's policy state.  The arithmetic mirrors the
compiled kernel expression by expression so the two backends agree to
floating-point roundoff.  Policies here evaluate the log(1+x) utility
system; the general-utility paths live in the pure-Python policy objects.
"""

from __future__ import annotations

import numpy as np

CONSTANT_R = 0
PLUGIN = 1
FRANK_WOLFE = 2


def _implied_q(zc: np.ndarray) -> np.ndarray:
    # rational inverse of the q -> r map (exact algebraic inverse)
    return (4.0 * zc - 1.0) / ((1.0 + 2.0 * zc) - 3.0 * (zc * zc))


def run_batch(policy_code: int, r_const: float, eta: float,
              states: np.ndarray, q: float, horizons: np.ndarray,
              z_lo: float, z_hi: float):
    """Simulate one policy over a batch of traces with horizon checkpoints.

    states: (R, T) uint8 state matrix, one row per replication.
    horizons: strictly increasing slot counts, the last equal to T.
    Returns (xbar1, xbar2, theta_sq) arrays of shape (n_horizons, R):
    per-replication time-averaged rates and the sum of (theta[t] - q)^2
    over t = 1 .. T-1 at each checkpoint.
    """
    R, T = states.shape
    nh = len(horizons)
    out_x1 = np.empty((nh, R))
    out_x2 = np.empty((nh, R))
    out_th = np.empty((nh, R))

    if policy_code == CONSTANT_R:
        # decisions depend only on the per-slot state; sums collapse to the
        # count of state-1 slots at each checkpoint
        zc = min(max(r_const, z_lo), z_hi)
        th = (4.0 * zc - 1.0) / ((1.0 + 2.0 * zc) - 3.0 * (zc * zc))
        d2 = (th - q) ** 2
        for h, Th in enumerate(horizons):
            ones = states[:, :Th].sum(axis=1, dtype=np.int64).astype(float)
            out_x1[h] = ((Th - ones) + ones * r_const) / Th
            out_x2[h] = (ones * (1.0 - r_const * r_const)) / Th
            out_th[h] = (Th - 1) * d2
        return out_x1, out_x2, out_th

    states_t = np.ascontiguousarray(states.T)  # (T, R): contiguous per-slot rows
    sum1 = np.zeros(R)
    sum2 = np.zeros(R)
    ths = np.zeros(R)
    cnt = np.zeros(R)
    xb1 = np.full(R, 0.5)
    xb2 = np.full(R, 0.5)
    hidx = 0

    for t in range(T):
        if policy_code == PLUGIN:
            if t == 0:
                qc = np.full(R, 0.5)
            else:
                qc = cnt / float(t)
                np.clip(qc, 1e-9, 1.0, out=qc)
            z = (qc + 1.0) / ((2.0 - qc) + np.sqrt((4.0 * qc * qc - qc) + 4.0))
        else:  # FRANK_WOLFE
            g1 = 1.0 / (1.0 + xb1)
            g2 = 1.0 / (1.0 + xb2)
            z = g1 / (2.0 * g2)
            np.clip(z, 0.0, 1.0, out=z)
        if t >= 1:
            zc = np.clip(z, z_lo, z_hi)
            d = _implied_q(zc) - q
            ths += d * d
        on = states_t[t] != 0
        x1 = np.where(on, z, 1.0)
        x2 = np.where(on, 1.0 - z * z, 0.0)
        sum1 += x1
        sum2 += x2
        if policy_code == PLUGIN:
            cnt += on
        else:
            eta_t = eta if eta > 0.0 else 1.0 / (t + 1.0)
            xb1 = (1.0 - eta_t) * xb1 + eta_t * x1
            xb2 = (1.0 - eta_t) * xb2 + eta_t * x2
        if hidx < nh and t + 1 == horizons[hidx]:
            tt = float(t + 1)
            out_x1[hidx] = sum1 / tt
            out_x2[hidx] = sum2 / tt
            out_th[hidx] = ths
            hidx += 1

    return out_x1, out_x2, out_th
