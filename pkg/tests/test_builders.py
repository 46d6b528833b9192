import numpy as np
import pytest

from prodige import (InteractionMatrix, StochasticGraph, VectorDataset,
                     add_anchor_vertices, build_cf_graph, build_knn_random,
                     deterministic_dijkstra, generate_erdos_renyi,
                     make_clustered_interactions)


def edge_set(edges):
    return {(int(a), int(b)) for a, b in edges}


def floyd_warshall(n, edges, weights, d_max):
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0.0)
    for eid, (a, b) in enumerate(edges):
        d[a, b] = min(d[a, b], weights[eid])
        d[b, a] = min(d[b, a], weights[eid])
    for k in range(n):
        d = np.minimum(d, d[:, k:k + 1] + d[k:k + 1, :])
    d[np.isinf(d)] = d_max
    return d


def test_knn_line_graph():
    data = VectorDataset(np.array([[0.0], [1.0], [2.0], [3.0]]))
    edges = build_knn_random(data, k=1, r=0)
    assert edge_set(edges) == {(0, 1), (1, 2), (2, 3)}


def test_knn_rejects_empty_budget():
    data = VectorDataset(np.random.default_rng(0).normal(size=(5, 2)))
    with pytest.raises(ValueError):
        build_knn_random(data, k=0, r=0)


def test_knn_rejects_k_too_large():
    data = VectorDataset(np.random.default_rng(0).normal(size=(5, 2)))
    with pytest.raises(ValueError):
        build_knn_random(data, k=5, r=0)


def test_knn_matches_exhaustive_neighbors():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(40, 4))
    data = VectorDataset(x)
    k = 5
    edges = build_knn_random(data, k=k, r=0)
    got = edge_set(edges)
    for i in range(40):
        d = np.sqrt(((x - x[i]) ** 2).sum(axis=1))
        d[i] = np.inf
        for j in np.argsort(d, kind="stable")[:k]:
            assert (min(i, int(j)), max(i, int(j))) in got


def test_knn_random_no_self_loops_or_duplicates():
    rng = np.random.default_rng(4)
    data = VectorDataset(rng.normal(size=(60, 3)))
    edges = build_knn_random(data, k=4, r=4, seed=7)
    assert np.all(edges[:, 0] < edges[:, 1])
    assert len(edge_set(edges)) == edges.shape[0]
    assert edges.shape[0] <= 60 * 8


def test_edge_count_linear_in_n():
    rng = np.random.default_rng(5)
    for n in (50, 100, 200):
        data = VectorDataset(rng.normal(size=(n, 3)))
        edges = build_knn_random(data, k=4, r=4, seed=1)
        assert edges.shape[0] <= n * 8


def test_compression_default_budget():
    # default candidate construction: 64 slots per vertex, half nearest
    rng = np.random.default_rng(6)
    data = VectorDataset(rng.normal(size=(80, 5)))
    edges = build_knn_random(data, k=32, r=32, seed=0)
    assert edges.shape[0] <= 80 * 64
    deg = np.zeros(80, int)
    np.add.at(deg, edges[:, 0], 1)
    np.add.at(deg, edges[:, 1], 1)
    assert deg.min() >= 32  # every vertex keeps at least its kNN links


def test_cf_graph_normal_identity():
    F = InteractionMatrix(2, 2, [np.array([0]), np.array([1])])
    edges, n_vertices = build_cf_graph(F, "normal", k_sim=1)
    assert n_vertices == 4
    got = edge_set(edges)
    assert (0, 2) in got  # user 0 - item 0
    assert (1, 3) in got  # user 1 - item 1
    assert (0, 1) in got  # one user-user edge
    assert (2, 3) in got  # one item-item edge
    assert len(got) == 4


def test_cf_graph_bipartite_has_no_same_side_edges():
    F = make_clustered_interactions(30, 20, n_clusters=4, seed=1)
    edges, n_vertices = build_cf_graph(F, "bipartite", seed=2)
    assert n_vertices == 50
    assert np.all(edges[:, 0] < 30)
    assert np.all(edges[:, 1] >= 30)
    # training positives are all present, topped up to ~30 per item
    for u, items in enumerate(F.positives):
        for i in items:
            assert (u, 30 + int(i)) in edge_set(edges)
    assert edges.shape[0] == min(30 * 20, 30 * 20)


def test_cf_graph_random_variant():
    F = make_clustered_interactions(20, 15, n_clusters=3, seed=3)
    edges, n_vertices = build_cf_graph(F, "random", seed=4)
    assert n_vertices == 35
    assert len(edge_set(edges)) == edges.shape[0]
    assert np.all(edges[:, 0] != edges[:, 1])
    assert edges.shape[0] <= 35 * 50


def test_cf_graph_normal_contains_every_training_positive():
    F = make_clustered_interactions(25, 18, n_clusters=3, seed=5)
    edges, _ = build_cf_graph(F, "normal", k_sim=4, seed=6)
    got = edge_set(edges)
    for u, items in enumerate(F.positives):
        for i in items:
            assert (u, 25 + int(i)) in got


def test_cf_graph_rejects_empty():
    F = InteractionMatrix(2, 2, [np.array([], dtype=int), np.array([], dtype=int)])
    with pytest.raises(ValueError):
        build_cf_graph(F, "normal")


def test_cosine_similarity_extremes():
    a = np.array([1.0, 1.0, 0.0])
    b = np.array([2.0, 2.0, 0.0])
    c = np.array([0.0, 0.0, 3.0])
    norm = lambda v: v / np.linalg.norm(v)
    assert norm(a) @ norm(b) == pytest.approx(1.0)
    assert norm(a) @ norm(c) == pytest.approx(0.0)


def test_erdos_renyi_connected_many_seeds():
    from prodige._kernels import _count_components
    from prodige.graph import _build_csr

    for seed in range(100):
        g, _ = generate_erdos_renyi(int(10 + seed % 16), p=0.25, seed=seed)
        indptr, adj_v, _ = _build_csr(g.n_vertices, g.edges.astype(np.int64))
        assert _count_components(indptr, adj_v, g.n_vertices) == 1


def test_erdos_renyi_distance_matrix_properties():
    g, dist = generate_erdos_renyi(14, p=0.25, seed=11)
    assert np.array_equal(dist, dist.T)
    assert np.all(np.diag(dist) == 0.0)
    assert np.all(dist[~np.eye(14, dtype=bool)] > 0.0)


def test_erdos_renyi_matches_floyd_warshall():
    for seed in (0, 1, 2):
        g, dist = generate_erdos_renyi(12, p=0.25, seed=seed)
        ref = floyd_warshall(12, g.edges, g.weights.astype(np.float64), g.d_max)
        assert np.array_equal(dist, ref)


def test_erdos_renyi_weights_in_unit_interval():
    g, _ = generate_erdos_renyi(20, p=0.25, seed=21)
    assert np.all(g.weights > 0.0)
    assert np.all(g.weights <= 1.0)


def _base_graph(n=10, seed=0):
    rng = np.random.default_rng(seed)
    edges = [(i, i + 1) for i in range(n - 1)]
    return StochasticGraph.from_candidates(n, np.asarray(edges), rng.uniform(0.5, 1.5, n - 1))


def test_anchors_fully_linked():
    g = _base_graph(8)
    g2 = add_anchor_vertices(g, n_anchors=1, links_per_anchor=8, seed=0)
    assert g2.n_vertices == 9
    nbrs, _ = g2.neighbors(8)
    assert sorted(nbrs.tolist()) == list(range(8))


def test_anchor_ids_are_last():
    g = _base_graph(10)
    g2 = add_anchor_vertices(g, n_anchors=3, links_per_anchor=4, seed=1)
    assert g2.n_vertices == 13
    anchor_edges = g2.edges[g2.edges.max(axis=1) >= 10]
    # every anchor got links, none to another anchor
    assert np.all(anchor_edges.min(axis=1) < 10)
    for a in (10, 11, 12):
        assert (anchor_edges.max(axis=1) == a).sum() == 4


def test_no_anchor_anchor_edges():
    g = _base_graph(6)
    g2 = add_anchor_vertices(g, n_anchors=4, links_per_anchor=6, seed=2)
    anchors = set(range(6, 10))
    for a, b in g2.edges:
        assert not (int(a) in anchors and int(b) in anchors)


def test_synthetic_interactions_shape():
    F = make_clustered_interactions(50, 30, n_clusters=5, seed=9)
    assert F.n_users == 50 and F.n_items == 30
    assert all(a.size >= 1 for a in F.positives)
    assert F.last_item is not None
    for u in range(50):
        assert F.last_item[u] in F.positives[u]
