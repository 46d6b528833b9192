"""Gradient estimators for the two parameter families.

Weight gradients are pathwise: the distance between a pair is the sum of
edge weights along the recovered shortest path, so dL/d(theta_w) follows
by the chain rule through softplus.  Presence gradients use the
score-function (log-derivative) estimator restricted to the edges the
search actually drew; a moving-average baseline can be subtracted from the
loss to reduce variance without changing the expectation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from . import _kernels
from .dijkstra import PathTrace, stochastic_dijkstra
from .graph import StochasticGraph, edge_prob, edge_prob_grad


class SparseGradient:
    """Per-edge gradient accumulator for one optimizer step.

    Contributions are merged by plain addition, so merge order only affects
    results at the level of floating-point associativity.
    """

    def __init__(self, n_edges: int):
        self.w = np.zeros(n_edges, dtype=np.float64)
        self.b = np.zeros(n_edges, dtype=np.float64)
        self.w_touched = np.zeros(n_edges, dtype=bool)
        self.b_touched = np.zeros(n_edges, dtype=bool)
        self.n_samples = 0

    def add_w(self, eids: np.ndarray, vals) -> None:
        self.w[eids] += vals
        self.w_touched[eids] = True

    def add_b(self, eids: np.ndarray, vals) -> None:
        self.b[eids] += vals
        self.b_touched[eids] = True

    def scale(self, s: float) -> None:
        self.w[self.w_touched] *= s
        self.b[self.b_touched] *= s

    def merge(self, other: "SparseGradient") -> None:
        self.w[other.w_touched] += other.w[other.w_touched]
        self.b[other.b_touched] += other.b[other.b_touched]
        self.w_touched |= other.w_touched
        self.b_touched |= other.b_touched
        self.n_samples += other.n_samples

    def w_sparse(self):
        ids = np.flatnonzero(self.w_touched)
        return ids, self.w[ids]

    def b_sparse(self):
        ids = np.flatnonzero(self.b_touched)
        return ids, self.b[ids]

    def w_items(self) -> dict[int, float]:
        ids, vals = self.w_sparse()
        return {int(i): float(v) for i, v in zip(ids, vals)}

    def b_items(self) -> dict[int, float]:
        ids, vals = self.b_sparse()
        return {int(i): float(v) for i, v in zip(ids, vals)}


@dataclass
class LossValue:
    """Scalar loss plus d(loss)/d(distance) for every queried pair."""

    value: float
    per_distance_grads: dict[tuple[int, int], float] = field(default_factory=dict)


class LossBaseline:
    """Bias-corrected exponential moving average of recent loss values."""

    def __init__(self, decay: float = 0.99):
        if not 0.0 <= decay < 1.0:
            raise ValueError("decay must be in [0, 1)")
        self.decay = decay
        self._acc = 0.0
        self._count = 0

    @property
    def value(self) -> float:
        if self._count == 0:
            return 0.0
        return self._acc / (1.0 - self.decay ** self._count)

    def update(self, loss: float) -> None:
        self._acc = self.decay * self._acc + (1.0 - self.decay) * loss
        self._count += 1


def weight_gradients(graph: StochasticGraph, traces: Mapping[int, PathTrace],
                     loss: LossValue, out: SparseGradient) -> None:
    """Accumulate pathwise d(loss)/d(theta_w) for every queried pair.

    For a pair at finite distance, every edge on its recovered path gets
    dL/dd * sigmoid(theta_w); pairs at d_max contribute nothing (the
    disconnected branch is a constant).
    """
    dsoft = edge_prob(graph.theta_w)  # d softplus(x)/dx = sigmoid(x)
    by_source: dict[int, tuple[list[int], list[float]]] = {}
    for (s, t), g in loss.per_distance_grads.items():
        trace = traces[s]
        if t == s or not trace.settled[t] or trace.distances[t] >= trace.d_max:
            continue
        tgt, cof = by_source.setdefault(s, ([], []))
        tgt.append(t)
        cof.append(g)
    for s, (tgt, cof) in by_source.items():
        trace = traces[s]
        _kernels._accumulate_path_grads(
            trace.parent_edge, trace.parent_vertex, dsoft, trace.source,
            np.asarray(tgt, dtype=np.int64), np.asarray(cof, dtype=np.float64),
            out.w, out.w_touched)


def prob_gradients(trace: PathTrace, loss_value: float, baseline: float,
                   graph: StochasticGraph, out: SparseGradient) -> None:
    """Score-function contribution of one trace to the presence gradients.

    Adds (loss - baseline) * d log p(outcome) / d theta_b for each edge the
    run drew: (1 - sigma) for a present edge, (-sigma) for an absent one.
    Edges the search never touched receive nothing.
    """
    if trace.sampled_eids.size == 0:
        return
    coeff = loss_value - baseline
    if coeff == 0.0:
        return
    sig = edge_prob(graph.theta_b[trace.sampled_eids])
    out.add_b(trace.sampled_eids, coeff * (trace.sampled_outcomes.astype(np.float64) - sig))


def regularizer(graph: StochasticGraph, lam: float,
                out: SparseGradient | None = None) -> float:
    """Mean presence probability scaled by lam; exact gradient, no sampling.

    Returns lam * mean(sigmoid(theta_b)) and, when ``out`` is given, adds
    lam/|E| * sigmoid'(theta_b) to every edge's presence gradient.
    """
    if lam < 0:
        raise ValueError("regularization coefficient must be >= 0")
    m = graph.n_edges
    if lam == 0.0 or m == 0:
        return 0.0
    value = lam * float(np.mean(edge_prob(graph.theta_b)))
    if out is not None:
        out.add_b(np.arange(m), (lam / m) * edge_prob_grad(graph.theta_b))
    return value


class DistanceOracle:
    """Stochastic distance queries for one Monte-Carlo sample.

    Every ``distances`` call runs one lazy Dijkstra and records the trace;
    a loss closure must query each source at most once per sample so that
    (source, target) keys identify distances unambiguously.
    """

    def __init__(self, graph: StochasticGraph, seed: int,
                 weights: np.ndarray | None = None, probs: np.ndarray | None = None):
        self.graph = graph
        self.seed = seed
        self._weights = graph.weights() if weights is None else weights
        self._probs = graph.probs() if probs is None else probs
        self.traces: dict[int, PathTrace] = {}

    def distances(self, source: int, targets) -> np.ndarray:
        if source in self.traces:
            raise ValueError(f"source {source} already queried in this sample")
        trace = stochastic_dijkstra(self.graph, source, targets,
                                    seed=_kernels.derive_seed(self.seed, source),
                                    weights=self._weights, probs=self._probs)
        self.traces[source] = trace
        t = np.asarray(list(targets), dtype=np.int64)
        return trace.distances[t]


def estimate_objective(graph: StochasticGraph, loss_fn: Callable[[DistanceOracle], LossValue],
                       lam: float = 0.0, n_samples: int = 1, seed: int = 0,
                       baseline: LossBaseline | None = None):
    """Monte-Carlo estimate of the regularized objective and its gradient.

    Averages pathwise and score-function contributions over ``n_samples``
    independent sampled searches, then adds the exact regularizer term
    once.  Returns (SparseGradient, objective estimate).
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    weights = graph.weights()
    probs = graph.probs()
    out = SparseGradient(graph.n_edges)
    total = 0.0
    for k in range(n_samples):
        oracle = DistanceOracle(graph, _kernels.derive_seed(seed, k), weights, probs)
        lv = loss_fn(oracle)
        if not np.isfinite(lv.value):
            raise FloatingPointError("loss value is not finite")
        weight_gradients(graph, oracle.traces, lv, out)
        base = baseline.value if baseline is not None else 0.0
        for trace in oracle.traces.values():
            prob_gradients(trace, lv.value, base, graph, out)
        if baseline is not None:
            baseline.update(lv.value)
        total += lv.value
    out.scale(1.0 / n_samples)
    out.n_samples = n_samples
    reg = regularizer(graph, lam, out)
    return out, total / n_samples + reg
