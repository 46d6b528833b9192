"""Learnable graph model: candidate edges with weight and presence parameters.

A ``StochasticGraph`` owns two parameter vectors indexed by edge id: the
weight pre-activation (weight = softplus) and the presence pre-activation
(probability = sigmoid).  ``finalize`` thresholds the probabilities at 0.5
and produces a deterministic ``FinalGraph``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import _kernels

# Presence pre-activations live in [-LIMIT, LIMIT] so that probabilities stay
# strictly inside (0, 1) and log-derivative terms stay finite.
THETA_B_LIMIT = 15.0


def edge_weight(theta_w):
    """softplus(x) = ln(1 + e^x), overflow-safe on both tails."""
    return np.logaddexp(0.0, theta_w)


def inverse_edge_weight(w):
    """Pre-activation x with softplus(x) = w; rejects w <= 0."""
    w = np.asarray(w, dtype=np.float64)
    if np.any(w <= 0.0):
        raise ValueError("edge weights must be positive")
    small = np.minimum(w, 30.0)
    return np.where(w > 30.0, w + np.log1p(-np.exp(-small)), np.log(np.expm1(small)))


def edge_prob(theta_b):
    """Numerically stable logistic sigmoid.

    Saturates to exactly 1.0 (0.0) in float64 for |x| > ~37; pre-activations
    stored in a graph are clamped to +/-THETA_B_LIMIT, which keeps stored
    probabilities strictly inside (0, 1).
    """
    t = np.asarray(theta_b, dtype=np.float64)
    z = np.exp(-np.abs(t))
    return np.where(t >= 0.0, 1.0 / (1.0 + z), z / (1.0 + z))


def inverse_edge_prob(p):
    """logit(p) for p in (0, 1)."""
    p = np.asarray(p, dtype=np.float64)
    if np.any((p <= 0.0) | (p >= 1.0)):
        raise ValueError("probabilities must lie strictly inside (0, 1)")
    return np.log(p) - np.log1p(-p)


def edge_prob_grad(theta_b):
    """d sigmoid / d theta = sigmoid * (1 - sigmoid)."""
    p = edge_prob(theta_b)
    return p * (1.0 - p)


def _build_csr(n_vertices: int, edges: np.ndarray):
    m = edges.shape[0]
    deg = np.zeros(n_vertices, dtype=np.int64)
    if m:
        np.add.at(deg, edges[:, 0], 1)
        np.add.at(deg, edges[:, 1], 1)
    indptr = np.zeros(n_vertices + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    adj_v = np.empty(2 * m, dtype=np.int64)
    adj_e = np.empty(2 * m, dtype=np.int64)
    cursor = indptr[:-1].copy()
    for eid in range(m):
        a, b = edges[eid, 0], edges[eid, 1]
        adj_v[cursor[a]] = b
        adj_e[cursor[a]] = eid
        cursor[a] += 1
        adj_v[cursor[b]] = a
        adj_e[cursor[b]] = eid
        cursor[b] += 1
    return indptr, adj_v, adj_e


def _validate_edges(n_vertices: int, edges: np.ndarray) -> np.ndarray:
    edges = np.ascontiguousarray(np.asarray(edges, dtype=np.int64).reshape(-1, 2))
    if edges.size:
        if edges.min() < 0 or edges.max() >= n_vertices:
            raise ValueError("edge endpoint out of range")
        if np.any(edges[:, 0] == edges[:, 1]):
            raise ValueError("self-loops are not allowed")
        keys = np.minimum(edges[:, 0], edges[:, 1]) * n_vertices + np.maximum(edges[:, 0], edges[:, 1])
        if np.unique(keys).size != edges.shape[0]:
            raise ValueError("duplicate undirected edge")
    return edges


class StochasticGraph:
    """Candidate edge set plus per-edge weight/presence parameters.

    The structure (vertex count, edge list, adjacency) is immutable after
    construction; only ``theta_w`` and ``theta_b`` change during training,
    and writes to them require exclusive access.  Read-only path queries
    may run concurrently against a parameter snapshot.
    """

    def __init__(self, n_vertices, edges, theta_w, theta_b, d_max):
        if n_vertices <= 0:
            raise ValueError("graph needs at least one vertex")
        self.n_vertices = int(n_vertices)
        self.edges = _validate_edges(self.n_vertices, edges)
        self.theta_w = np.ascontiguousarray(np.asarray(theta_w, dtype=np.float64))
        self.theta_b = np.clip(np.asarray(theta_b, dtype=np.float64), -THETA_B_LIMIT, THETA_B_LIMIT)
        if self.theta_w.shape != (self.n_edges,) or self.theta_b.shape != (self.n_edges,):
            raise ValueError("parameter vectors must have one entry per edge")
        if not (np.isfinite(self.theta_w).all() and np.isfinite(self.theta_b).all()):
            raise ValueError("parameters must be finite")
        if d_max <= 0:
            raise ValueError("d_max must be positive")
        self.d_max = float(d_max)
        self.indptr, self.adj_v, self.adj_e = _build_csr(self.n_vertices, self.edges)
        self._pair_to_edge: dict[tuple[int, int], int] | None = None

    @classmethod
    def from_candidates(cls, n_vertices, edges, init_weights=1.0, init_prob=0.9,
                        d_max=None, d_max_factor=2.0):
        """Build a graph from candidate edges with standard initialization.

        ``init_weights`` may be a scalar or a per-edge array of target edge
        weights (e.g. distances between endpoints); presence probabilities
        start at ``init_prob`` so early searches see a mostly-connected
        graph.  ``d_max`` defaults to d_max_factor * n_vertices * max
        initial weight, which strictly exceeds any realizable path length.
        """
        edges = _validate_edges(int(n_vertices), edges)
        w0 = np.broadcast_to(np.asarray(init_weights, dtype=np.float64), (edges.shape[0],)).copy()
        theta_w = inverse_edge_weight(w0) if edges.shape[0] else np.empty(0)
        theta_b = np.full(edges.shape[0], float(inverse_edge_prob(init_prob)))
        if d_max is None:
            top = float(w0.max()) if w0.size else 1.0
            d_max = d_max_factor * n_vertices * max(top, 1e-12)
        return cls(n_vertices, edges, theta_w, theta_b, d_max)

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    def weights(self) -> np.ndarray:
        return edge_weight(self.theta_w)

    def probs(self) -> np.ndarray:
        return edge_prob(self.theta_b)

    def edge_id(self, a: int, b: int) -> int:
        """Edge id of the undirected pair {a, b}; symmetric by construction."""
        if self._pair_to_edge is None:
            self._pair_to_edge = {
                (min(int(x), int(y)), max(int(x), int(y))): eid
                for eid, (x, y) in enumerate(self.edges)
            }
        key = (min(a, b), max(a, b))
        if key not in self._pair_to_edge:
            raise KeyError(f"no candidate edge between {a} and {b}")
        return self._pair_to_edge[key]

    def neighbors(self, v: int):
        """(neighbor vertex ids, incident edge ids) views for vertex v."""
        lo, hi = self.indptr[v], self.indptr[v + 1]
        return self.adj_v[lo:hi], self.adj_e[lo:hi]

    def sample_edge(self, edge_id: int, seed: int) -> bool:
        """Draw the edge's Bernoulli for the run identified by ``seed``.

        The outcome is a pure function of (seed, edge_id), so repeated calls
        with the same seed reproduce the same draw.
        """
        if not 0 <= edge_id < self.n_edges:
            raise ValueError(f"edge id {edge_id} out of range")
        return bool(_kernels.edge_uniform(np.uint64(seed & 0xFFFFFFFFFFFFFFFF), edge_id)
                    < edge_prob(self.theta_b[edge_id]))

    def clamp_theta_b(self) -> None:
        np.clip(self.theta_b, -THETA_B_LIMIT, THETA_B_LIMIT, out=self.theta_b)


@dataclass
class FinalGraph:
    """Deterministic graph: edges kept at presence probability >= 0.5.

    Weights are stored as float32 (the on-disk precision); distance
    computations promote to float64.
    """

    n_vertices: int
    edges: np.ndarray    # (m, 2) int32, smaller endpoint first, lexicographic
    weights: np.ndarray  # (m,) float32, > 0
    d_max: float
    _csr: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int32).reshape(-1, 2)
        weights = np.asarray(self.weights, dtype=np.float32)
        if weights.shape != (edges.shape[0],):
            raise ValueError("need exactly one weight per edge")
        if edges.size and np.any(weights <= 0):
            raise ValueError("final edge weights must be positive")
        if edges.size:
            a, b, order = _canonical_edge_order(edges)
            edges = np.ascontiguousarray(np.stack([a, b], axis=1).astype(np.int32))
            weights = np.ascontiguousarray(weights[order])
        self.edges = edges
        self.weights = weights
        self.d_max = float(np.float32(self.d_max))
        _validate_edges(self.n_vertices, self.edges)

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    def csr(self):
        if self._csr is None:
            indptr, adj_v, adj_e = _build_csr(self.n_vertices, self.edges.astype(np.int64))
            self._csr = (indptr, adj_v, adj_e, self.weights.astype(np.float64))
        return self._csr

    def degrees(self) -> np.ndarray:
        indptr = self.csr()[0]
        return np.diff(indptr)


def _canonical_edge_order(edges: np.ndarray):
    a = np.minimum(edges[:, 0], edges[:, 1])
    b = np.maximum(edges[:, 0], edges[:, 1])
    order = np.lexsort((b, a))
    return a[order], b[order], order


def finalize(graph: StochasticGraph) -> FinalGraph:
    """Threshold presence probabilities at 0.5 (inclusive) and freeze weights."""
    keep = graph.theta_b >= 0.0  # sigmoid(theta) >= 0.5 iff theta >= 0
    return FinalGraph(graph.n_vertices, graph.edges[keep].astype(np.int32),
                      edge_weight(graph.theta_w[keep]).astype(np.float32), graph.d_max)


def param_count(graph: Union[StochasticGraph, FinalGraph]) -> int:
    """Stored numbers: one per vertex (adjacency index) plus two per edge."""
    return graph.n_vertices + 2 * graph.n_edges


def saturate_probabilities(graph: StochasticGraph) -> StochasticGraph:
    """Push every presence pre-activation to its clamp boundary by sign.

    Converged models are nearly deterministic anyway; this jumps to that
    endpoint so that subsequent weight training sees a fixed edge set.
    Thresholding semantics match finalize (theta_b >= 0 keeps the edge).
    """
    theta_b = np.where(graph.theta_b >= 0.0, THETA_B_LIMIT, -THETA_B_LIMIT)
    return StochasticGraph(graph.n_vertices, graph.edges, graph.theta_w.copy(),
                           theta_b, graph.d_max)


def saturation_fraction(graph: StochasticGraph, eps: float = 0.01) -> float:
    """Fraction of presence probabilities still inside [eps, 1 - eps].

    Diagnostic for how deterministic the trained graph is before
    thresholding; no particular eps is asserted anywhere.
    """
    if graph.n_edges == 0:
        return 0.0
    p = graph.probs()
    return float(np.mean((p >= eps) & (p <= 1.0 - eps)))
