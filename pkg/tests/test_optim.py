import numpy as np
import pytest

from prodige import AdamHyper, SparseAdam, default_hyperparameters
from prodige.config import RunConfig, apply_updates, dump_run_config, parse_flat_config


class DenseAdamOracle:
    """Straightforward per-step Adam over the full vector.

    Untouched parameters receive zero gradients: their moments decay every
    step but no update is applied to them (lazy application semantics).
    """

    def __init__(self, n, hyper):
        self.h = hyper
        self.m = np.zeros(n)
        self.v = np.zeros(n)
        self.t = 0

    def step(self, params, grads, touched_mask):
        h = self.h
        self.t += 1
        self.m = self.m * h.beta1 + (1.0 - h.beta1) * grads
        self.v = self.v * h.beta2 + (1.0 - h.beta2) * grads * grads
        m_hat = self.m / (1.0 - h.beta1 ** self.t)
        v_hat = self.v / (1.0 - h.beta2 ** self.t)
        update = h.lr * m_hat / (np.sqrt(v_hat) + h.eps)
        params[touched_mask] -= update[touched_mask]


def test_dense_updates_match_reference_bit_for_bit():
    rng = np.random.default_rng(0)
    n = 50
    hyper = AdamHyper()
    lazy = SparseAdam(n, hyper)
    oracle = DenseAdamOracle(n, hyper)
    p_lazy = rng.normal(size=n)
    p_ref = p_lazy.copy()
    all_ids = np.arange(n)
    for _ in range(100):
        g = rng.normal(size=n)
        lazy.step(p_lazy, all_ids, g)
        oracle.step(p_ref, g, np.ones(n, bool))
        assert np.array_equal(lazy.m, oracle.m)
        assert np.array_equal(lazy.v, oracle.v)
    assert np.array_equal(p_lazy, p_ref)


def test_lazy_moments_match_zero_padded_dense():
    rng = np.random.default_rng(1)
    n = 40
    hyper = AdamHyper()
    lazy = SparseAdam(n, hyper)
    oracle = DenseAdamOracle(n, hyper)
    p_lazy = rng.normal(size=n)
    p_ref = p_lazy.copy()
    for _ in range(200):
        mask = rng.random(n) < 0.3
        ids = np.flatnonzero(mask)
        g = np.zeros(n)
        g[ids] = rng.normal(size=ids.size)
        lazy.step(p_lazy, ids, g[ids])
        oracle.step(p_ref, g, mask)
    m_eff, v_eff = lazy.effective_moments()
    assert np.allclose(m_eff, oracle.m, rtol=0, atol=1e-12)
    assert np.allclose(v_eff, oracle.v, rtol=0, atol=1e-12)
    assert np.allclose(p_lazy, p_ref, rtol=0, atol=1e-12)


def test_param_untouched_then_touched_matches_dense():
    hyper = AdamHyper()
    lazy = SparseAdam(2, hyper)
    oracle = DenseAdamOracle(2, hyper)
    p_lazy = np.array([1.0, -1.0])
    p_ref = p_lazy.copy()
    # touch param 0 once, leave param 1 idle for k steps, then touch both
    seq = [(np.array([0]), np.array([0.7]))] * 1
    seq += [(np.array([0]), np.array([0.2]))] * 7
    seq += [(np.array([0, 1]), np.array([0.1, -0.4]))]
    for ids, g in seq:
        dense_g = np.zeros(2)
        dense_g[ids] = g
        mask = np.zeros(2, bool)
        mask[ids] = True
        lazy.step(p_lazy, ids, g)
        oracle.step(p_ref, dense_g, mask)
    assert np.allclose(lazy.m, oracle.m, atol=1e-12, rtol=0)
    assert np.allclose(lazy.v, oracle.v, atol=1e-12, rtol=0)
    assert np.allclose(p_lazy, p_ref, atol=1e-12, rtol=0)


def test_zero_gradient_on_fresh_param_leaves_it_unchanged():
    opt = SparseAdam(3, AdamHyper())
    params = np.array([1.0, 2.0, 3.0])
    opt.step(params, np.array([1]), np.array([0.0]))
    assert params[1] == 2.0
    assert opt.m[1] == 0.0 and opt.v[1] == 0.0


def test_update_magnitude_bounded():
    # |step| <= lr / (1 - beta1) for any gradient sequence
    rng = np.random.default_rng(2)
    hyper = AdamHyper(lr=0.05)
    opt = SparseAdam(8, hyper)
    params = rng.normal(size=8)
    bound = hyper.lr / (1.0 - hyper.beta1)
    ids = np.arange(8)
    for step in range(300):
        prev = params.copy()
        g = rng.normal(size=8) * (10.0 ** rng.integers(-6, 6))
        if step % 17 == 0:
            g[:4] = 0.0
        opt.step(params, ids, g)
        assert np.all(np.abs(params - prev) <= bound + 1e-12)


def test_clamp_applied_after_update():
    opt = SparseAdam(1, AdamHyper(lr=5.0), clamp=(-1.0, 1.0))
    params = np.array([0.9])
    for _ in range(10):
        opt.step(params, np.array([0]), np.array([-3.0]))
    assert params[0] == 1.0


def test_rejects_non_finite_gradient_with_param_id():
    opt = SparseAdam(5, AdamHyper())
    params = np.zeros(5)
    with pytest.raises(ValueError, match="parameter 3"):
        opt.step(params, np.array([1, 3]), np.array([0.5, np.nan]))
    # the step was rejected outright
    assert opt.global_step == 0
    assert np.all(params == 0.0)


def test_default_hyperparameters():
    h = default_hyperparameters()
    assert (h.lr, h.beta1, h.beta2, h.eps) == (1e-2, 0.9, 0.999, 1e-8)


def test_hyperparameters_round_trip_through_config():
    config = RunConfig(lr=0.005, beta1=0.85, beta2=0.99, eps=1e-9)
    parsed = apply_updates(RunConfig(), parse_flat_config(dump_run_config(config)))
    hyper = parsed.to_train_config().hyper
    assert hyper == AdamHyper(0.005, 0.85, 0.99, 1e-9)


def test_invalid_hyperparameters_rejected():
    with pytest.raises(ValueError):
        AdamHyper(lr=0.0).validate()
    with pytest.raises(ValueError):
        AdamHyper(beta2=1.0).validate()
    with pytest.raises(ValueError):
        AdamHyper(beta1=-0.1).validate()
