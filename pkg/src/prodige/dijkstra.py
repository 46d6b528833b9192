"""Shortest-path searches over stochastic and finalized graphs.

The stochastic search draws edge Bernoullis lazily while it runs and
records every draw in the returned trace, which is what the gradient
estimators consume.  Searches are pure functions of (parameters, seed) and
may run concurrently against a read-only parameter snapshot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .graph import FinalGraph, StochasticGraph, _build_csr


@dataclass
class PathTrace:
    """Result of one stochastic Dijkstra run.

    ``distances`` holds d_max for every vertex the search did not settle
    (unreachable under the sampled edges, or beyond an early stop).
    ``sampled_eids``/``sampled_outcomes`` list each edge whose Bernoulli was
    drawn during the run, exactly once per edge.
    """

    source: int
    distances: np.ndarray        # (n,) float64
    parent_edge: np.ndarray      # (n,) int64, -1 = none
    parent_vertex: np.ndarray    # (n,) int64, -1 = none
    settled: np.ndarray          # (n,) bool
    sampled_eids: np.ndarray     # (k,) int64
    sampled_outcomes: np.ndarray  # (k,) bool
    d_max: float

    @property
    def sampled_states(self) -> dict[int, bool]:
        return {int(e): bool(o) for e, o in zip(self.sampled_eids, self.sampled_outcomes)}


@dataclass
class ShortestPath:
    edge_ids: list[int]
    total: float


def _target_mask(n: int, targets) -> tuple[np.ndarray, int]:
    mask = np.zeros(n, dtype=np.uint8)
    if targets is None:
        mask[:] = 1
        return mask, n
    t = np.asarray(list(targets) if not isinstance(targets, np.ndarray) else targets, dtype=np.int64)
    if t.size == 0:
        raise ValueError("targets must be nonempty")
    if t.min() < 0 or t.max() >= n:
        raise ValueError("target vertex id out of range")
    mask[t] = 1
    return mask, int(mask.sum())


def _check_source(n: int, source: int) -> int:
    if not 0 <= source < n:
        raise ValueError(f"source vertex {source} out of range")
    return int(source)


def stochastic_dijkstra(graph: StochasticGraph, source: int, targets=None, seed: int = 0,
                        weights: np.ndarray | None = None,
                        probs: np.ndarray | None = None) -> PathTrace:
    """Run Dijkstra from ``source``, sampling edge existence on the fly.

    Each candidate edge incident to a settled vertex is drawn at most once
    per run; the search stops early once every target is settled.
    ``targets=None`` means all vertices.  ``weights``/``probs`` can carry
    precomputed activation arrays when many runs share one parameter
    snapshot.
    """
    n = graph.n_vertices
    source = _check_source(n, source)
    mask, n_targets = _target_mask(n, targets)
    if weights is None:
        weights = graph.weights()
    if probs is None:
        probs = graph.probs()
    dist, parent_e, parent_v, settled, edge_state = _kernels._sssp_stochastic(
        graph.indptr, graph.adj_v, graph.adj_e, weights, probs,
        np.uint64(seed & 0xFFFFFFFFFFFFFFFF), source, mask, n_targets)
    settled = settled.astype(bool)
    dist[~settled] = graph.d_max
    drawn = np.flatnonzero(edge_state >= 0)
    return PathTrace(source, dist, parent_e, parent_v, settled,
                     drawn, edge_state[drawn] == 1, graph.d_max)


def deterministic_dijkstra(graph: FinalGraph, source: int, targets=None) -> np.ndarray:
    """Distances from ``source`` on a finalized graph (d_max if unreached).

    Returns the full per-vertex distance array; entries for vertices that
    were not settled (unreachable, or past an early stop when ``targets``
    is given) are d_max.
    """
    n = graph.n_vertices
    source = _check_source(n, source)
    mask, n_targets = _target_mask(n, targets)
    indptr, adj_v, adj_e, w64 = graph.csr()
    dist, _, _, settled = _kernels._sssp_deterministic(indptr, adj_v, adj_e, w64,
                                                       source, mask, n_targets)
    dist[settled == 0] = graph.d_max
    return dist


def presample_outcomes(graph: StochasticGraph, seed: int) -> np.ndarray:
    """Draw every candidate edge up front with the run RNG.

    A lazy search with the same seed sees exactly these outcomes for the
    edges it happens to touch.
    """
    s = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    p = graph.probs()
    u = np.array([_kernels.edge_uniform(s, e) for e in range(graph.n_edges)])
    return u < p


def subgraph_distances(graph: StochasticGraph, outcomes: np.ndarray, source: int,
                       targets=None, weights: np.ndarray | None = None) -> np.ndarray:
    """Deterministic Dijkstra on the subgraph of present edges.

    Runs in float64 straight from the pre-activations, so it can serve as
    a reference for gradient checks at fixed edge outcomes.
    """
    n = graph.n_vertices
    source = _check_source(n, source)
    mask, n_targets = _target_mask(n, targets)
    if weights is None:
        weights = graph.weights()
    present = np.flatnonzero(np.asarray(outcomes, dtype=bool))
    indptr, adj_v, adj_e = _build_csr(n, graph.edges[present])
    dist, _, _, settled = _kernels._sssp_deterministic(
        indptr, adj_v, adj_e, weights[present], source, mask, n_targets)
    dist[settled == 0] = graph.d_max
    return dist


def recover_path(trace: PathTrace, target: int) -> ShortestPath | None:
    """Walk parent pointers back to the source; None if the target was unreached."""
    n = trace.distances.shape[0]
    if not 0 <= target < n:
        raise ValueError(f"target vertex {target} out of range")
    if target == trace.source:
        return ShortestPath([], 0.0)
    if not trace.settled[target] or trace.parent_edge[target] == -1:
        return None
    edge_ids: list[int] = []
    v = target
    while v != trace.source:
        edge_ids.append(int(trace.parent_edge[v]))
        v = int(trace.parent_vertex[v])
    edge_ids.reverse()
    return ShortestPath(edge_ids, float(trace.distances[target]))
