#!/usr/bin/env python3
"""Throughput comparison of the compiled and pure-numpy simulation backends.

Runs the batch kernel on identical seeded workloads for every policy and
prints slot throughput per backend plus the speedup.  The workload matches
the shape of the converse experiments (many replications, long horizon).
"""

import argparse
import time

import numpy as np

from oppsched import kernels, system


def batch_states(q, reps, horizon, master_seed):
    states = np.empty((reps, horizon), dtype=np.uint8)
    for rep in range(reps):
        states[rep] = system.generate_trace(q, horizon, system.derive_seed(master_seed, rep)).states
    return states


def time_backend(backend, spec, states, q, horizons, repeats=3):
    args = kernels.kernel_spec(spec)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        kernels.run_batch(*args, states=states, q=q, horizons=horizons, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--reps", type=int, default=256)
    parser.add_argument("--horizon", type=int, default=100_000)
    parser.add_argument("--q", type=float, default=0.5)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    backends = ["numpy"]
    if kernels.HAVE_SPEEDUPS:
        backends.insert(0, "cython")
    else:
        print("compiled extension unavailable; timing the fallback only")

    print(f"workload: reps={args.reps} horizon={args.horizon} q={args.q} "
          f"(~{args.reps * args.horizon / 1e6:.0f}M slot-steps)")
    states = batch_states(args.q, args.reps, args.horizon, args.seed)
    horizons = [args.horizon]

    specs = ["greedy", "genie:0.5", "plugin", "fw-vanishing", "fw-constant:0.05"]
    header = f"{'policy':<18}" + "".join(f"{b:>14}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    total = {b: 0.0 for b in backends}
    for spec in specs:
        times = {b: time_backend(b, spec, states, args.q, horizons) for b in backends}
        row = f"{spec:<18}"
        for b in backends:
            total[b] += times[b]
            rate = args.reps * args.horizon / times[b] / 1e6
            row += f"{rate:>11.1f} M/s"
        if len(backends) == 2:
            row += f"{times['numpy'] / times['cython']:>9.1f}x"
        print(row)
    if len(backends) == 2:
        print(f"{'total':<18}{total['cython']:>11.2f} s {total['numpy']:>12.2f} s"
              f"{total['numpy'] / total['cython']:>9.1f}x")


if __name__ == "__main__":
    main()
