"""Backend parity and kernel-versus-policy-object agreement."""

import numpy as np
import pytest

from oppsched import converse, kernels, policies, system

SPECS = ["greedy", "plugin", "fw-vanishing", "fw-constant:0.05", "genie:0.5"]

needs_speedups = pytest.mark.skipif(not kernels.HAVE_SPEEDUPS,
                                    reason="compiled extension not built")


def batch_states(q, reps, horizon, master_seed):
    states = np.empty((reps, horizon), dtype=np.uint8)
    for rep in range(reps):
        states[rep] = system.generate_trace(q, horizon, system.derive_seed(master_seed, rep)).states
    return states


@needs_speedups
@pytest.mark.parametrize("spec", SPECS)
def test_backends_agree(spec):
    q = 0.5
    states = batch_states(q, 40, 3000, master_seed=101)
    horizons = [10, 300, 3000]
    a = kernels.run_batch(*kernels.kernel_spec(spec), states=states, q=q,
                          horizons=horizons, backend="cython")
    b = kernels.run_batch(*kernels.kernel_spec(spec), states=states, q=q,
                          horizons=horizons, backend="numpy")
    for x, y in zip(a, b):
        np.testing.assert_allclose(x, y, rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("spec", SPECS)
def test_kernel_matches_policy_objects(spec):
    # dual route: the batch kernel against the slot-by-slot policy objects
    q = 0.5
    T = 1500
    states = batch_states(q, 8, T, master_seed=55)
    x1, x2, th = kernels.run_batch(*kernels.kernel_spec(spec), states=states, q=q,
                                   horizons=[T])
    for rep in range(8):
        trace = system.ChannelTrace(q=q, horizon=T, seed=0, states=states[rep].copy())
        rec = policies.run_policy(spec, trace)
        converse.fill_theta_series(rec)
        assert x1[0, rep] == pytest.approx(rec.running_average.x1, abs=1e-11)
        assert x2[0, rep] == pytest.approx(rec.running_average.x2, abs=1e-11)
        th_sum = float(((rec.theta_series[1:] - q) ** 2).sum())
        assert th[0, rep] == pytest.approx(th_sum, abs=1e-9)


def test_horizon_checkpoints_are_prefixes(test_backend=None):
    # checkpoint rows equal fresh runs truncated at each horizon
    q = 0.3
    states = batch_states(q, 10, 2000, master_seed=77)
    spec = kernels.kernel_spec("plugin")
    full = kernels.run_batch(*spec, states=states, q=q, horizons=[500, 2000])
    only = kernels.run_batch(*spec, states=states[:, :500], q=q, horizons=[500])
    for got, ref in zip(full, only):
        np.testing.assert_allclose(got[0], ref[0], rtol=0, atol=1e-12)


def test_kernel_spec_parsing():
    code, r, eta = kernels.kernel_spec("greedy")
    assert code == kernels.CONSTANT_R and eta == 0.0
    code, r, eta = kernels.kernel_spec("genie:0.5")
    assert code == kernels.CONSTANT_R and r == pytest.approx(0.41421356, abs=1e-8)
    assert kernels.kernel_spec("plugin")[0] == kernels.PLUGIN
    assert kernels.kernel_spec("fw-vanishing") == (kernels.FRANK_WOLFE, 0.0, 0.0)
    assert kernels.kernel_spec("fw-constant:0.07")[2] == 0.07
    with pytest.raises(ValueError):
        kernels.kernel_spec("unknown")
    with pytest.raises(ValueError):
        kernels.kernel_spec("fw-constant:1.5")
    with pytest.raises(ValueError):
        kernels.kernel_spec("genie:0")


def test_run_batch_validates_horizons():
    states = batch_states(0.5, 3, 100, master_seed=1)
    spec = kernels.kernel_spec("greedy")
    with pytest.raises(ValueError):
        kernels.run_batch(*spec, states=states, q=0.5, horizons=[100, 50])
    with pytest.raises(ValueError):
        kernels.run_batch(*spec, states=states, q=0.5, horizons=[50])
    with pytest.raises(ValueError):
        kernels.run_batch(*spec, states=states, q=0.5, horizons=[])


def test_constant_r_closed_form_in_fallback():
    # the fallback's count shortcut equals the generic slot loop
    q = 0.7
    states = batch_states(q, 6, 400, master_seed=5)
    spec = kernels.kernel_spec("genie:0.7")
    x1, x2, th = kernels.run_batch(*spec, states=states, q=q, horizons=[400],
                                   backend="numpy")
    ones = states.sum(axis=1)
    r = spec[1]
    np.testing.assert_allclose(x1[0], ((400 - ones) + ones * r) / 400, atol=1e-12)
    np.testing.assert_allclose(x2[0], ones * (1 - r * r) / 400, atol=1e-12)
    # genie theta equals q exactly: zero contribution
    np.testing.assert_allclose(th[0], 0.0, atol=1e-20)
