"""Numba kernels: hash-based edge sampling and CSR Dijkstra searches.

All kernels are single-threaded and allocation-light so that results are
bit-reproducible for a fixed seed regardless of thread configuration.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_MIX1 = np.uint64(0x9E3779B97F4A7C15)
_MIX2 = np.uint64(0xBF58476D1CE4E5B9)
_MIX3 = np.uint64(0x94D049BB133111EB)
_EDGE_SALT = np.uint64(0xD6E8FEB86659FD93)
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


@njit(cache=True)
def splitmix64(x):
    z = np.uint64(x) + _MIX1
    z = (z ^ (z >> np.uint64(30))) * _MIX2
    z = (z ^ (z >> np.uint64(27))) * _MIX3
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def edge_uniform(seed, edge_id):
    """Uniform in [0, 1) determined solely by (seed, edge_id)."""
    h = splitmix64(np.uint64(seed) ^ (np.uint64(edge_id) * _EDGE_SALT))
    return (h >> np.uint64(11)) * _INV_2_53


def derive_seed(seed: int, salt: int) -> int:
    """Derive an independent child seed; stable across platforms."""
    return int(splitmix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) ^ splitmix64(np.uint64(salt & 0xFFFFFFFFFFFFFFFF))))


@njit(cache=True)
def _sssp_stochastic(indptr, adj_v, adj_e, weights, probs, seed, source, target_mask, n_targets):
    """Dijkstra that draws each candidate edge's Bernoulli lazily.

    An edge is drawn the first time one of its endpoints is settled; the
    outcome is recorded in ``edge_state`` (-1 undrawn, 0 absent, 1 present)
    and reused if the edge is touched again from the other side.  Ties in
    the priority queue break toward the smaller vertex id.  Stops once all
    flagged targets are settled (their incident edges are still drawn).
    """
    n = indptr.shape[0] - 1
    m = weights.shape[0]
    dist = np.full(n, np.inf, np.float64)
    parent_e = np.full(n, -1, np.int64)
    parent_v = np.full(n, -1, np.int64)
    settled = np.zeros(n, np.uint8)
    edge_state = np.full(m, -1, np.int8)

    cap = 2 * m + 16
    heap_d = np.empty(cap, np.float64)
    heap_v = np.empty(cap, np.int64)
    size = 1
    heap_d[0] = 0.0
    heap_v[0] = source
    dist[source] = 0.0
    remaining = n_targets

    while size > 0:
        top_d = heap_d[0]
        top_v = heap_v[0]
        size -= 1
        heap_d[0] = heap_d[size]
        heap_v[0] = heap_v[size]
        i = 0
        while True:
            l = 2 * i + 1
            if l >= size:
                break
            c = l
            r = l + 1
            if r < size and (heap_d[r] < heap_d[l] or (heap_d[r] == heap_d[l] and heap_v[r] < heap_v[l])):
                c = r
            if heap_d[c] < heap_d[i] or (heap_d[c] == heap_d[i] and heap_v[c] < heap_v[i]):
                heap_d[i], heap_d[c] = heap_d[c], heap_d[i]
                heap_v[i], heap_v[c] = heap_v[c], heap_v[i]
                i = c
            else:
                break

        if settled[top_v] == 1:
            continue
        settled[top_v] = 1

        for k in range(indptr[top_v], indptr[top_v + 1]):
            eid = adj_e[k]
            st = edge_state[eid]
            if st == -1:
                if edge_uniform(seed, eid) < probs[eid]:
                    st = 1
                else:
                    st = 0
                edge_state[eid] = st
            if st == 0:
                continue
            v = adj_v[k]
            if settled[v] == 1:
                continue
            nd = top_d + weights[eid]
            if nd < dist[v]:
                dist[v] = nd
                parent_e[v] = eid
                parent_v[v] = top_v
                heap_d[size] = nd
                heap_v[size] = v
                j = size
                size += 1
                while j > 0:
                    p = (j - 1) >> 1
                    if heap_d[j] < heap_d[p] or (heap_d[j] == heap_d[p] and heap_v[j] < heap_v[p]):
                        heap_d[j], heap_d[p] = heap_d[p], heap_d[j]
                        heap_v[j], heap_v[p] = heap_v[p], heap_v[j]
                        j = p
                    else:
                        break

        if target_mask[top_v] == 1:
            remaining -= 1
            if remaining == 0:
                break

    return dist, parent_e, parent_v, settled, edge_state


@njit(cache=True)
def _sssp_deterministic(indptr, adj_v, adj_e, weights, source, target_mask, n_targets):
    """Plain CSR Dijkstra with the same tie-breaking and early stop."""
    n = indptr.shape[0] - 1
    m = weights.shape[0]
    dist = np.full(n, np.inf, np.float64)
    parent_e = np.full(n, -1, np.int64)
    parent_v = np.full(n, -1, np.int64)
    settled = np.zeros(n, np.uint8)

    cap = 2 * m + 16
    heap_d = np.empty(cap, np.float64)
    heap_v = np.empty(cap, np.int64)
    size = 1
    heap_d[0] = 0.0
    heap_v[0] = source
    dist[source] = 0.0
    remaining = n_targets

    while size > 0:
        top_d = heap_d[0]
        top_v = heap_v[0]
        size -= 1
        heap_d[0] = heap_d[size]
        heap_v[0] = heap_v[size]
        i = 0
        while True:
            l = 2 * i + 1
            if l >= size:
                break
            c = l
            r = l + 1
            if r < size and (heap_d[r] < heap_d[l] or (heap_d[r] == heap_d[l] and heap_v[r] < heap_v[l])):
                c = r
            if heap_d[c] < heap_d[i] or (heap_d[c] == heap_d[i] and heap_v[c] < heap_v[i]):
                heap_d[i], heap_d[c] = heap_d[c], heap_d[i]
                heap_v[i], heap_v[c] = heap_v[c], heap_v[i]
                i = c
            else:
                break

        if settled[top_v] == 1:
            continue
        settled[top_v] = 1

        for k in range(indptr[top_v], indptr[top_v + 1]):
            v = adj_v[k]
            if settled[v] == 1:
                continue
            eid = adj_e[k]
            nd = top_d + weights[eid]
            if nd < dist[v]:
                dist[v] = nd
                parent_e[v] = eid
                parent_v[v] = top_v
                heap_d[size] = nd
                heap_v[size] = v
                j = size
                size += 1
                while j > 0:
                    p = (j - 1) >> 1
                    if heap_d[j] < heap_d[p] or (heap_d[j] == heap_d[p] and heap_v[j] < heap_v[p]):
                        heap_d[j], heap_d[p] = heap_d[p], heap_d[j]
                        heap_v[j], heap_v[p] = heap_v[p], heap_v[j]
                        j = p
                    else:
                        break

        if target_mask[top_v] == 1:
            remaining -= 1
            if remaining == 0:
                break

    return dist, parent_e, parent_v, settled


@njit(cache=True)
def _accumulate_path_grads(parent_e, parent_v, edge_coef, source, targets, coefs, out, touched):
    """For each target, add coefs[t] * edge_coef[e] to out[e] along its path.

    Targets whose parent chain is absent (unreached) contribute nothing.
    """
    for t in range(targets.shape[0]):
        v = targets[t]
        c = coefs[t]
        if v == source or c == 0.0:
            continue
        if parent_e[v] == -1:
            continue
        while v != source:
            e = parent_e[v]
            out[e] += c * edge_coef[e]
            touched[e] = True
            v = parent_v[v]


@njit(cache=True)
def _count_components(indptr, adj_v, n):
    """Number of connected components via iterative DFS over CSR adjacency."""
    seen = np.zeros(n, np.uint8)
    stack = np.empty(n, np.int64)
    comps = 0
    for s in range(n):
        if seen[s] == 1:
            continue
        comps += 1
        seen[s] = 1
        top = 0
        stack[0] = s
        top = 1
        while top > 0:
            top -= 1
            u = stack[top]
            for k in range(indptr[u], indptr[u + 1]):
                v = adj_v[k]
                if seen[v] == 0:
                    seen[v] = 1
                    stack[top] = v
                    top += 1
    return comps
