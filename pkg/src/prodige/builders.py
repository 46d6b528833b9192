"""Candidate edge set construction and benchmark graph generators."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .graph import FinalGraph, StochasticGraph, _build_csr, inverse_edge_prob, inverse_edge_weight


@dataclass
class VectorDataset:
    """Dense vectors with a pairwise distance, Euclidean by default."""

    vectors: np.ndarray
    metric: str = "euclidean"

    def __post_init__(self):
        self.vectors = np.ascontiguousarray(np.asarray(self.vectors, dtype=np.float64))
        if self.vectors.ndim != 2 or self.vectors.shape[1] < 1:
            raise ValueError("vectors must be a nonempty 2-d array")
        if not np.isfinite(self.vectors).all():
            raise ValueError("vectors must be finite")
        if self.metric != "euclidean":
            raise ValueError(f"unsupported metric {self.metric!r}")

    @property
    def n_items(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def pair_distances(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        diff = self.vectors[rows] - self.vectors[cols]
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))

    def distances_from(self, row: int) -> np.ndarray:
        diff = self.vectors - self.vectors[row]
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))


@dataclass
class InteractionMatrix:
    """Sparse binary user-item relevance: per-user sorted arrays of item ids.

    ``last_item`` optionally remembers each user's most recent interaction
    (or -1), which the leave-one-out split prefers as the held-out item.
    """

    n_users: int
    n_items: int
    positives: list[np.ndarray]
    last_item: np.ndarray | None = None

    def __post_init__(self):
        if self.n_users < 1 or self.n_items < 1:
            raise ValueError("interaction matrix must have users and items")
        if len(self.positives) != self.n_users:
            raise ValueError("need one positives array per user")
        cleaned = []
        for u, items in enumerate(self.positives):
            arr = np.unique(np.asarray(items, dtype=np.int64))
            if arr.size and (arr[0] < 0 or arr[-1] >= self.n_items):
                raise ValueError(f"item id out of range for user {u}")
            cleaned.append(arr)
        self.positives = cleaned
        if self.last_item is not None:
            self.last_item = np.asarray(self.last_item, dtype=np.int64)

    @property
    def n_interactions(self) -> int:
        return int(sum(a.size for a in self.positives))

    @property
    def density(self) -> float:
        return self.n_interactions / (self.n_users * self.n_items)

    def to_dense(self) -> np.ndarray:
        f = np.zeros((self.n_users, self.n_items), dtype=np.float64)
        for u, items in enumerate(self.positives):
            f[u, items] = 1.0
        return f


def _dedup_edges(pairs: np.ndarray, n_vertices: int) -> np.ndarray:
    """Normalize to (min, max), drop self-loops and duplicates, sort."""
    if pairs.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    a = np.minimum(pairs[:, 0], pairs[:, 1])
    b = np.maximum(pairs[:, 0], pairs[:, 1])
    keep = a != b
    a, b = a[keep], b[keep]
    keys = np.unique(a * np.int64(n_vertices) + b)
    return np.stack([keys // n_vertices, keys % n_vertices], axis=1)


def _random_non_self(rng: np.random.Generator, n: int, sources: np.ndarray) -> np.ndarray:
    # (i + 1 + U[0, n-2]) mod n is uniform over the n-1 non-self vertices
    return (sources + 1 + rng.integers(0, n - 1, size=sources.shape)) % n


def build_knn_random(data: VectorDataset, k: int, r: int, seed: int = 0,
                     chunk: int = 256) -> np.ndarray:
    """k nearest neighbors per vertex plus r uniform random edges per vertex.

    Exact brute-force neighbor search; distance ties break toward the
    smaller vertex id.  Duplicate pairs collapse, so the edge count is at
    most n * (k + r).
    """
    n = data.n_items
    if k >= n:
        raise ValueError("k must be smaller than the number of items")
    if k < 0 or r < 0 or k + r < 1:
        raise ValueError("need k + r >= 1 candidate edges per vertex")
    pieces = []
    if k > 0:
        x = data.vectors
        sq = np.einsum("ij,ij->i", x, x)
        for lo in range(0, n, chunk):
            hi = min(lo + chunk, n)
            d2 = sq[lo:hi, None] + sq[None, :] - 2.0 * (x[lo:hi] @ x.T)
            np.maximum(d2, 0.0, out=d2)
            for i in range(lo, hi):
                row = d2[i - lo]
                row[i] = np.inf
                nn = np.lexsort((np.arange(n), row))[:k]
                pieces.append(np.stack([np.full(k, i, dtype=np.int64), nn], axis=1))
    if r > 0:
        rng = np.random.default_rng(_kernels.derive_seed(seed, 0x6B6E6E))
        src = np.repeat(np.arange(n, dtype=np.int64), r)
        dst = _random_non_self(rng, n, src)
        pieces.append(np.stack([src, dst], axis=1))
    return _dedup_edges(np.concatenate(pieces, axis=0), n)


def _cosine_knn_pairs(mat: np.ndarray, k: int, offset: int) -> np.ndarray:
    """k most cosine-similar rows for each row; zero rows match nothing."""
    norms = np.sqrt(np.einsum("ij,ij->i", mat, mat))
    safe = np.where(norms == 0.0, 1.0, norms)
    unit = mat / safe[:, None]
    sim = unit @ unit.T
    sim[norms == 0.0, :] = 0.0
    sim[:, norms == 0.0] = 0.0
    n = mat.shape[0]
    out = np.empty((n * k, 2), dtype=np.int64)
    for i in range(n):
        row = sim[i].copy()
        row[i] = -np.inf
        nn = np.lexsort((np.arange(n), -row))[:k]
        out[i * k:(i + 1) * k, 0] = offset + i
        out[i * k:(i + 1) * k, 1] = offset + nn
    return out


def build_cf_graph(F: InteractionMatrix, variant: str = "normal", k_sim: int = 16,
                   seed: int = 0) -> tuple[np.ndarray, int]:
    """Candidate edges over user vertices [0, m) and item vertices [m, m+n).

    normal     training user-item edges plus k_sim most-similar users per
               user and k_sim most-similar items per item (cosine over the
               interaction matrix rows/columns);
    bipartite  user-item edges only: training positives topped up with
               uniform unobserved pairs to about 30 edges per item;
    random     50 uniform edges per vertex, endpoints of any type.

    Returns (edges, n_vertices).
    """
    if F.n_interactions == 0:
        raise ValueError("interaction matrix has no positives")
    nu, ni = F.n_users, F.n_items
    n_vertices = nu + ni
    ui = np.concatenate([
        np.stack([np.full(items.size, u, dtype=np.int64), nu + items], axis=1)
        for u, items in enumerate(F.positives) if items.size
    ])
    if variant == "normal":
        dense = F.to_dense()
        uu = _cosine_knn_pairs(dense, min(k_sim, nu - 1), 0) if nu > 1 and k_sim > 0 else np.empty((0, 2), np.int64)
        ii = _cosine_knn_pairs(dense.T, min(k_sim, ni - 1), nu) if ni > 1 and k_sim > 0 else np.empty((0, 2), np.int64)
        return _dedup_edges(np.concatenate([ui, uu, ii], axis=0), n_vertices), n_vertices
    if variant == "bipartite":
        rng = np.random.default_rng(_kernels.derive_seed(seed, 0xB1BA))
        have = {(int(a), int(b)) for a, b in ui}
        want = min(30 * ni, nu * ni)
        need = want - len(have)
        pool = nu * ni - len(have)
        extra: list[tuple[int, int]] = []
        if need >= pool // 2:
            unobserved = [(u, nu + i) for u in range(nu) for i in range(ni)
                          if (u, nu + i) not in have]
            picked = rng.choice(len(unobserved), size=max(need, 0), replace=False)
            extra = [unobserved[j] for j in picked]
        else:
            while len(have) < want:
                u = int(rng.integers(0, nu))
                i = nu + int(rng.integers(0, ni))
                if (u, i) not in have:
                    have.add((u, i))
                    extra.append((u, i))
        pairs = np.concatenate([ui, np.asarray(extra, dtype=np.int64).reshape(-1, 2)], axis=0)
        return _dedup_edges(pairs, n_vertices), n_vertices
    if variant == "random":
        rng = np.random.default_rng(_kernels.derive_seed(seed, 0x52BD))
        src = np.repeat(np.arange(n_vertices, dtype=np.int64), 50)
        dst = _random_non_self(rng, n_vertices, src)
        return _dedup_edges(np.stack([src, dst], axis=1), n_vertices), n_vertices
    raise ValueError(f"unknown variant {variant!r}")


def generate_erdos_renyi(n: int, p: float = 0.25, seed: int = 0,
                         max_attempts: int = 1000) -> tuple[FinalGraph, np.ndarray]:
    """Connected random graph with U(0, 1) weights plus its exact metric.

    Rejection-samples the edge set until connected (RuntimeError after
    ``max_attempts``).  Returns the graph and the all-pairs shortest-path
    matrix computed by per-source Dijkstra in double precision.
    """
    if n < 2:
        raise ValueError("need at least two vertices")
    rng = np.random.default_rng(_kernels.derive_seed(seed, 0xE2D0))
    iu, ju = np.triu_indices(n, k=1)
    for _ in range(max_attempts):
        keep = rng.random(iu.size) < p
        edges = np.stack([iu[keep], ju[keep]], axis=1).astype(np.int64)
        if edges.shape[0] < n - 1:
            continue
        indptr, adj_v, _ = _build_csr(n, edges)
        if _kernels._count_components(indptr, adj_v, n) == 1:
            weights = rng.uniform(0.0, 1.0, edges.shape[0]).astype(np.float32)
            # U(0,1) can in principle produce 0.0; nudge into the open interval
            weights[weights == 0.0] = np.float32(1e-7)
            g = FinalGraph(n, edges.astype(np.int32), weights,
                           d_max=2.0 * n * max(float(weights.max()), 1.0))
            from .dijkstra import deterministic_dijkstra
            dist = np.stack([deterministic_dijkstra(g, s) for s in range(n)])
            return g, dist
        continue
    raise RuntimeError(f"no connected graph in {max_attempts} attempts (n={n}, p={p})")


def add_anchor_vertices(graph: StochasticGraph, n_anchors: int, links_per_anchor: int,
                        seed: int = 0) -> StochasticGraph:
    """Append anchor vertices wired to uniformly chosen data vertices.

    Anchors get the last ``n_anchors`` vertex ids, carry no data payload,
    and never connect to each other.  New edges start at weight 1 with the
    standard initial presence probability.
    """
    if n_anchors < 1:
        raise ValueError("need at least one anchor")
    n_old = graph.n_vertices
    if links_per_anchor < 1 or links_per_anchor > n_old:
        raise ValueError("links_per_anchor must be in [1, n_vertices]")
    rng = np.random.default_rng(_kernels.derive_seed(seed, 0xA2C4))
    new_edges = []
    for a in range(n_anchors):
        targets = rng.choice(n_old, size=links_per_anchor, replace=False)
        anchor = n_old + a
        new_edges.append(np.stack([targets.astype(np.int64),
                                   np.full(links_per_anchor, anchor, dtype=np.int64)], axis=1))
    extra = _dedup_edges(np.concatenate(new_edges, axis=0), n_old + n_anchors)
    edges = np.concatenate([graph.edges, extra], axis=0)
    theta_w = np.concatenate([graph.theta_w, inverse_edge_weight(np.ones(extra.shape[0]))])
    theta_b = np.concatenate([graph.theta_b, np.full(extra.shape[0], float(inverse_edge_prob(0.9)))])
    n_new = n_old + n_anchors
    d_max = max(graph.d_max, 2.0 * n_new * max(1.0, float(np.max(np.logaddexp(0.0, theta_w)))))
    return StochasticGraph(n_new, edges, theta_w, theta_b, d_max)


def make_clustered_interactions(n_users: int, n_items: int, n_clusters: int = 20,
                                mean_positives: int = 18, in_cluster: float = 0.8,
                                seed: int = 0) -> InteractionMatrix:
    """Synthetic implicit feedback with block structure, for benchmarks.

    Users and items are assigned to clusters; each interaction picks an
    in-cluster item with probability ``in_cluster``, otherwise a uniform
    one.  The last generated interaction per user is recorded for
    leave-one-out evaluation.
    """
    rng = np.random.default_rng(_kernels.derive_seed(seed, 0xCF01))
    item_cluster = rng.integers(0, n_clusters, size=n_items)
    cluster_items = [np.flatnonzero(item_cluster == c) for c in range(n_clusters)]
    user_cluster = rng.integers(0, n_clusters, size=n_users)
    positives: list[np.ndarray] = []
    last = np.full(n_users, -1, dtype=np.int64)
    for u in range(n_users):
        count = 3 + rng.poisson(mean_positives)
        pool = cluster_items[user_cluster[u]]
        seen: list[int] = []
        got: set[int] = set()
        for _ in range(count):
            if pool.size and rng.random() < in_cluster:
                item = int(pool[rng.integers(0, pool.size)])
            else:
                item = int(rng.integers(0, n_items))
            if item not in got:
                got.add(item)
                seen.append(item)
        positives.append(np.asarray(seen, dtype=np.int64))
        last[u] = seen[-1]
    return InteractionMatrix(n_users, n_items, positives, last_item=last)
