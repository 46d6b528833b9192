import math

import numpy as np
import pytest

from prodige import (FinalGraph, StochasticGraph, edge_prob, edge_weight, finalize,
                     inverse_edge_weight, param_count, saturation_fraction)


def test_edge_weight_at_zero():
    assert edge_weight(0.0) == pytest.approx(math.log(2.0), abs=1e-15)


def test_edge_weight_large_positive_asymptote():
    assert abs(edge_weight(50.0) - 50.0) < 1e-12


def test_edge_weight_large_negative_asymptote():
    w = edge_weight(-50.0)
    assert w > 0.0
    assert w == pytest.approx(math.exp(-50.0), rel=1e-9)


def test_edge_weight_positive_everywhere():
    thetas = np.linspace(-100, 100, 4001)
    assert np.all(edge_weight(thetas) > 0.0)


def test_inverse_edge_weight_at_ln2():
    assert inverse_edge_weight(math.log(2.0)) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("w", [0.01, 1.0, 100.0])
def test_inverse_edge_weight_round_trip(w):
    assert edge_weight(inverse_edge_weight(w)) == pytest.approx(w, rel=1e-9)


def test_inverse_edge_weight_tiny():
    x = inverse_edge_weight(1e-9)
    assert np.isfinite(x)
    assert x < -10


def test_inverse_edge_weight_rejects_nonpositive():
    with pytest.raises(ValueError):
        inverse_edge_weight(0.0)
    with pytest.raises(ValueError):
        inverse_edge_weight(-1.0)


def test_edge_prob_at_zero():
    assert edge_prob(0.0) == 0.5


@pytest.mark.parametrize("x", [-5.0, 1.3, 20.0])
def test_edge_prob_symmetry(x):
    assert edge_prob(x) + edge_prob(-x) == pytest.approx(1.0, abs=1e-15)


def test_edge_prob_saturation():
    # float64 sigmoid saturates to exactly 1.0 around x ~ 37; in-graph
    # pre-activations are clamped to [-15, 15] so stored probabilities
    # stay strictly inside (0, 1).
    assert edge_prob(40.0) == pytest.approx(1.0, abs=1e-12)
    assert 0.0 < edge_prob(15.0) < 1.0
    assert 0.0 < edge_prob(-15.0) < 1.0


def _triangle(theta_b=0.0):
    return StochasticGraph(3, [[0, 1], [1, 2], [0, 2]],
                           theta_w=np.zeros(3), theta_b=np.full(3, theta_b), d_max=10.0)


def test_sample_edge_saturated_high():
    g = _triangle(theta_b=40.0)  # clamped to +15 at construction
    hits = sum(g.sample_edge(0, seed) for seed in range(10_000))
    assert hits / 10_000 > 0.999


def test_sample_edge_balanced():
    g = _triangle(theta_b=0.0)
    hits = sum(g.sample_edge(1, seed) for seed in range(10_000))
    assert abs(hits / 10_000 - 0.5) < 0.02


def test_sample_edge_deterministic_for_seed():
    g = _triangle()
    draws_a = [g.sample_edge(0, s) for s in range(200)]
    draws_b = [g.sample_edge(0, s) for s in range(200)]
    assert draws_a == draws_b


def test_construction_rejects_self_loop():
    with pytest.raises(ValueError, match="self-loop"):
        StochasticGraph(3, [[0, 0]], [0.0], [0.0], 1.0)


def test_construction_rejects_duplicate_pair():
    with pytest.raises(ValueError, match="duplicate"):
        StochasticGraph(3, [[0, 1], [1, 0]], [0.0, 0.0], [0.0, 0.0], 1.0)


def test_construction_rejects_out_of_range():
    with pytest.raises(ValueError):
        StochasticGraph(3, [[0, 3]], [0.0], [0.0], 1.0)


def test_adjacency_symmetric_lookup():
    g = _triangle()
    for a, b in [(0, 1), (1, 2), (0, 2)]:
        assert g.edge_id(a, b) == g.edge_id(b, a)
    nbrs, eids = g.neighbors(1)
    assert sorted(nbrs.tolist()) == [0, 2]
    assert set(eids.tolist()) == {g.edge_id(0, 1), g.edge_id(1, 2)}


def test_finalize_drops_low_probabilities():
    g = _triangle(theta_b=-3.0)
    assert finalize(g).n_edges == 0


def test_finalize_boundary_inclusive():
    g = _triangle(theta_b=0.0)  # probability exactly 0.5
    assert finalize(g).n_edges == 3


def test_finalize_mixed():
    g = StochasticGraph(3, [[0, 1], [1, 2], [0, 2]],
                        theta_w=np.zeros(3), theta_b=np.array([-2.0, 0.0, 2.0]), d_max=10.0)
    f = finalize(g)
    assert f.n_edges == 2
    assert {tuple(e) for e in f.edges.tolist()} == {(1, 2), (0, 2)}


def test_finalize_idempotent_in_effect():
    g = StochasticGraph(4, [[0, 1], [1, 2], [2, 3]],
                        theta_w=np.array([0.3, -0.2, 1.0]),
                        theta_b=np.array([4.0, -4.0, 1.0]), d_max=10.0)
    f1 = finalize(g)
    # re-thresholding the surviving edges (all at certainty) changes nothing
    g2 = StochasticGraph(4, f1.edges, inverse_edge_weight(f1.weights.astype(np.float64)),
                         np.full(f1.n_edges, 15.0), f1.d_max)
    f2 = finalize(g2)
    assert np.array_equal(f1.edges, f2.edges)
    assert np.allclose(f1.weights, f2.weights, rtol=1e-6)


def test_param_count_matches_reference_size():
    chain = np.stack([np.arange(9_999), np.arange(9_999) + 1], axis=1)
    skip = np.stack([np.arange(4_601), np.arange(4_601) + 2], axis=1)
    edges = np.concatenate([chain, skip])  # 14,600 distinct pairs
    f = FinalGraph(10_000, edges, np.ones(14_600, dtype=np.float32), d_max=100.0)
    assert param_count(f) == 39_200


def test_param_count_no_edges():
    f = FinalGraph(5, np.empty((0, 2), np.int32), np.empty(0, np.float32), 1.0)
    assert param_count(f) == 5


def test_param_count_complete_four():
    g = StochasticGraph.from_candidates(4, [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]])
    assert param_count(g) == 16


def test_theta_b_clamped_at_construction():
    g = _triangle(theta_b=40.0)
    assert np.all(g.theta_b == 15.0)
    assert np.all(g.probs() < 1.0)


def test_saturation_fraction():
    g = StochasticGraph(3, [[0, 1], [1, 2], [0, 2]],
                        theta_w=np.zeros(3), theta_b=np.array([0.0, 15.0, -15.0]), d_max=10.0)
    assert saturation_fraction(g, eps=0.01) == pytest.approx(1.0 / 3.0)
