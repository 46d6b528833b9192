"""Task objectives and training loops.

Covers distance-preserving compression, implicit-feedback ranking with
HitRatio@k, anchor-distance feature extraction, the graph-reconstruction
harness, and a parameter-matched Euclidean embedding baseline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ._kernels import _accumulate_path_grads, derive_seed
from .builders import InteractionMatrix, VectorDataset, build_knn_random
from .dijkstra import deterministic_dijkstra, stochastic_dijkstra
from .estimators import (DistanceOracle, LossBaseline, LossValue, SparseGradient,
                         prob_gradients, regularizer)
from .graph import (FinalGraph, StochasticGraph, edge_prob, finalize, param_count,
                    saturation_fraction)
from .optim import AdamHyper, SparseAdam


class TrainingDiverged(RuntimeError):
    def __init__(self, step: int, value: float):
        super().__init__(f"training diverged at step {step} (loss={value!r})")
        self.step = step
        self.value = value


@dataclass
class LambdaSchedule:
    """Linear ramp from start to end over the first ``steps`` steps."""

    start: float
    end: float
    steps: int

    def value(self, step: int) -> float:
        if self.steps <= 0 or step >= self.steps:
            return self.end
        return self.start + (self.end - self.start) * (step / self.steps)


@dataclass
class TrainConfig:
    lambda_: float = 0.0
    lambda_schedule: LambdaSchedule | None = None
    batch_pairs: int = 1024
    n_negatives: int = 16
    batch_users: int = 64
    epochs: int = 10
    steps_per_epoch: int = 100
    seed: int = 0
    hyper: AdamHyper = field(default_factory=AdamHyper)
    lr_b: float | None = None
    baseline: bool = True
    baseline_decay: float = 0.99
    init_prob: float = 0.9
    d_max: float | None = None
    d_max_factor: float = 2.0

    def __post_init__(self):
        if self.lambda_ < 0:
            raise ValueError("lambda must be >= 0")
        for name in ("batch_pairs", "n_negatives", "batch_users", "epochs", "steps_per_epoch"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        self.hyper.validate()
        if self.lr_b is not None and self.lr_b <= 0:
            raise ValueError("lr_b must be positive")
        if not 0.0 < self.init_prob < 1.0:
            raise ValueError("init_prob must lie in (0, 1)")
        if self.d_max is not None and self.d_max <= 0:
            raise ValueError("d_max must be positive")

    @property
    def total_steps(self) -> int:
        return self.epochs * self.steps_per_epoch

    def resolved_schedule(self) -> LambdaSchedule:
        if self.lambda_schedule is not None:
            return self.lambda_schedule
        return LambdaSchedule(0.0, self.lambda_, max(self.total_steps // 3, 1))

    def hyper_b(self) -> AdamHyper:
        if self.lr_b is None:
            return self.hyper
        return AdamHyper(self.lr_b, self.hyper.beta1, self.hyper.beta2, self.hyper.eps)


@dataclass
class EvalReport:
    objective: float
    retained_edges: int
    param_count: int
    params_per_instance: float
    mse: float | None = None
    hit_ratio: dict[int, float] | None = None
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "objective": self.objective,
            "retained_edges": self.retained_edges,
            "param_count": self.param_count,
            "params_per_instance": self.params_per_instance,
        }
        if self.mse is not None:
            d["mse"] = self.mse
        if self.hit_ratio is not None:
            d.update({f"hr@{k}": v for k, v in sorted(self.hit_ratio.items())})
        d.update(self.extras)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# ---------------------------------------------------------------------------
# distance targets


class EuclideanTargets:
    """Pairwise Euclidean distances of a vector dataset."""

    def __init__(self, data: VectorDataset):
        self.data = data
        self.n = data.n_items

    def pairwise(self, rows, cols) -> np.ndarray:
        return self.data.pair_distances(np.asarray(rows), np.asarray(cols))

    def row(self, i: int) -> np.ndarray:
        return self.data.distances_from(i)


class MatrixTargets:
    """Precomputed target distance matrix (e.g. a graph metric)."""

    def __init__(self, matrix: np.ndarray):
        m = np.asarray(matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("target matrix must be square")
        if not np.isfinite(m).all() or (m < 0).any():
            raise ValueError("target distances must be finite and non-negative")
        self.matrix = m
        self.n = m.shape[0]

    def pairwise(self, rows, cols) -> np.ndarray:
        return self.matrix[np.asarray(rows), np.asarray(cols)]

    def row(self, i: int) -> np.ndarray:
        return self.matrix[i]


def complete_candidates(n: int) -> np.ndarray:
    iu, ju = np.triu_indices(n, k=1)
    return np.stack([iu, ju], axis=1).astype(np.int64)


# ---------------------------------------------------------------------------
# compression


def compression_loss(oracle: DistanceOracle, targets, pairs) -> LossValue:
    """Mean squared gap between target and graph distances over a pair batch.

    Each pair contributes (target - d)^2 / batch and a distance gradient of
    2 (d - target) / batch; pairs resting on the disconnection constant get
    a zero gradient entry.
    """
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    batch = pairs.shape[0]
    value = 0.0
    grads: dict[tuple[int, int], float] = {}
    order = np.argsort(pairs[:, 0], kind="stable")
    sp = pairs[order]
    tv = targets.pairwise(sp[:, 0], sp[:, 1])
    lo = 0
    while lo < batch:
        hi = lo
        s = sp[lo, 0]
        while hi < batch and sp[hi, 0] == s:
            hi += 1
        tgts = sp[lo:hi, 1]
        d = oracle.distances(int(s), tgts)
        err = d - tv[lo:hi]
        value += float(np.dot(err, err)) / batch
        at_cap = d >= oracle.graph.d_max
        g = 2.0 * err / batch
        g[at_cap] = 0.0
        for t, gi in zip(tgts, g):
            key = (int(s), int(t))
            grads[key] = grads.get(key, 0.0) + float(gi)
        lo = hi
    return LossValue(value, grads)


def evaluate_compression_mse(final: FinalGraph, targets) -> float:
    """Full-dataset mean of (target - d)^2 over all ordered pairs."""
    n = targets.n
    total = 0.0
    for s in range(n):
        d = deterministic_dijkstra(final, s)
        err = d - targets.row(s)
        total += float(np.dot(err, err))
    return total / (n * n)


@dataclass
class CompressionResult:
    graph: StochasticGraph
    final: FinalGraph
    report: EvalReport
    history: list[dict]
    final_epoch_path_edges: np.ndarray


def _ordered_pair_batch(rng: np.random.Generator, n: int, batch: int) -> np.ndarray:
    src = rng.integers(0, n, size=batch)
    dst = (src + 1 + rng.integers(0, n - 1, size=batch)) % n
    return np.stack([src, dst], axis=1).astype(np.int64)


def _all_ordered_pairs(n: int) -> np.ndarray:
    src = np.repeat(np.arange(n, dtype=np.int64), n - 1)
    dst = np.concatenate([np.concatenate([np.arange(s), np.arange(s + 1, n)]) for s in range(n)])
    return np.stack([src, dst.astype(np.int64)], axis=1)


def train_compression(targets, config: TrainConfig, candidates: np.ndarray | None = None,
                      graph: StochasticGraph | None = None) -> CompressionResult:
    """Fit a stochastic graph to pairwise target distances.

    Every step samples a batch of ordered pairs (or enumerates all of them
    when they fit in one batch), runs one lazily-sampled search per distinct
    source, and takes one sparse Adam step per parameter family.  Edge
    weights start at the target distance between their endpoints, so the
    early model is close to a memorizing solution and the sparsity penalty
    prunes from there.
    """
    n = targets.n
    if graph is None:
        if candidates is None:
            candidates = (build_knn_random(targets.data, min(32, n - 1), 32, config.seed)
                          if isinstance(targets, EuclideanTargets) else complete_candidates(n))
        init_w = np.clip(targets.pairwise(candidates[:, 0], candidates[:, 1]), 1e-3, None)
        graph = StochasticGraph.from_candidates(n, candidates, init_w, config.init_prob,
                                                d_max=config.d_max, d_max_factor=config.d_max_factor)
    m = graph.n_edges
    adam_w = SparseAdam(m, config.hyper)
    adam_b = SparseAdam(m, config.hyper_b(), clamp=(-15.0, 15.0))
    baseline = LossBaseline(config.baseline_decay) if config.baseline else None
    sched = config.resolved_schedule()
    rng = np.random.default_rng(derive_seed(config.seed, 0x7C0))
    full = _all_ordered_pairs(n) if n * (n - 1) <= config.batch_pairs else None

    history: list[dict] = []
    path_mask = np.zeros(m, dtype=bool)
    step = 0
    lam = 0.0
    for epoch in range(config.epochs):
        epoch_loss = 0.0
        for _ in range(config.steps_per_epoch):
            lam = sched.value(step)
            pairs = full if full is not None else _ordered_pair_batch(rng, n, config.batch_pairs)
            batch = pairs.shape[0]
            weights = graph.weights()
            probs = graph.probs()
            dsoft = edge_prob(graph.theta_w)
            grad = SparseGradient(m)
            order = np.argsort(pairs[:, 0], kind="stable")
            sp = pairs[order]
            tv = targets.pairwise(sp[:, 0], sp[:, 1])
            step_seed = derive_seed(config.seed, step)
            batch_loss = 0.0
            lo = 0
            while lo < batch:
                hi = lo
                s = int(sp[lo, 0])
                while hi < batch and sp[hi, 0] == s:
                    hi += 1
                tgts = sp[lo:hi, 1]
                trace = stochastic_dijkstra(graph, s, tgts, seed=derive_seed(step_seed, s),
                                            weights=weights, probs=probs)
                d = trace.distances[tgts]
                err = d - tv[lo:hi]
                trace_loss = float(np.dot(err, err)) / batch
                coefs = 2.0 * err / batch
                coefs[d >= graph.d_max] = 0.0
                _accumulate_path_grads(trace.parent_edge, trace.parent_vertex, dsoft,
                                       s, tgts, coefs, grad.w, grad.w_touched)
                base = baseline.value * (hi - lo) / batch if baseline is not None else 0.0
                sig = probs[trace.sampled_eids]
                grad.add_b(trace.sampled_eids,
                           (trace_loss - base) * (trace.sampled_outcomes.astype(np.float64) - sig))
                batch_loss += trace_loss
                lo = hi
            if not np.isfinite(batch_loss):
                raise TrainingDiverged(step, batch_loss)
            regularizer(graph, lam, grad)
            try:
                adam_w.step(graph.theta_w, *grad.w_sparse())
                adam_b.step(graph.theta_b, *grad.b_sparse())
            except ValueError as exc:
                raise TrainingDiverged(step, batch_loss) from exc
            if baseline is not None:
                baseline.update(batch_loss)
            if epoch == config.epochs - 1:
                path_mask |= grad.w_touched
            epoch_loss += batch_loss
            step += 1
        history.append({
            "epoch": epoch,
            "loss": epoch_loss / config.steps_per_epoch,
            "lambda": lam,
            "edges_above_half": int(np.count_nonzero(graph.theta_b >= 0.0)),
            "saturation": saturation_fraction(graph),
        })

    final = finalize(graph)
    mse = evaluate_compression_mse(final, targets)
    pc = param_count(final)
    report = EvalReport(
        objective=history[-1]["loss"] + regularizer(graph, lam),
        retained_edges=final.n_edges,
        param_count=pc,
        params_per_instance=pc / n,
        mse=mse,
        extras={"task": "compression", "candidate_edges": m,
                "saturation": saturation_fraction(graph)},
    )
    return CompressionResult(graph, final, report, history, path_mask)


# ---------------------------------------------------------------------------
# collaborative filtering


def cf_softmax(d_pos: float, d_neg: np.ndarray):
    """Softmax cross-entropy over negated distances, log-sum-exp stabilized.

    Returns (loss, dloss/dd_pos, dloss/dd_neg).
    """
    z = -np.concatenate([[d_pos], np.asarray(d_neg, dtype=np.float64)])
    zmax = z.max()
    e = np.exp(z - zmax)
    s = e / e.sum()
    loss = float(np.log(e.sum()) + zmax - z[0])
    return loss, float(1.0 - s[0]), -s[1:]


def cf_loss(oracle: DistanceOracle, user: int, positive: int, negatives) -> LossValue:
    """Ranking loss pushing the positive item closer to the user than negatives.

    ``positive``/``negatives`` are vertex ids; negatives may repeat (each
    occurrence is a separate softmax slot backed by one distance query).
    """
    negatives = np.asarray(list(negatives), dtype=np.int64)
    items = np.concatenate([[positive], negatives])
    d = oracle.distances(user, items)
    loss, g_pos, g_neg = cf_softmax(d[0], d[1:])
    grads: dict[tuple[int, int], float] = {}
    for item, g in zip(items, np.concatenate([[g_pos], g_neg])):
        key = (int(user), int(item))
        grads[key] = grads.get(key, 0.0) + float(g)
    return LossValue(loss, grads)


def hit_ratio(graph: FinalGraph, user: int, held_out_item: int, candidate_items,
              k: int) -> int:
    """1 if the held-out item ranks in the top k by ascending distance.

    Candidates are vertex ids and must contain the held-out item; distance
    ties break toward the smaller id.
    """
    cand = np.asarray(list(candidate_items), dtype=np.int64)
    if held_out_item not in cand:
        raise ValueError("held-out item must be among the candidates")
    d = deterministic_dijkstra(graph, user, cand)[cand]
    top = cand[np.lexsort((cand, d))][:k]
    return int(held_out_item in top)


def leave_one_out_split(F: InteractionMatrix, seed: int = 0):
    """Hold out one positive per user (the recorded last interaction when
    available, otherwise a seeded uniform choice); users with fewer than two
    positives keep all of them and are not evaluated."""
    rng = np.random.default_rng(derive_seed(seed, 0x100))
    holdout = np.full(F.n_users, -1, dtype=np.int64)
    train: list[np.ndarray] = []
    for u, items in enumerate(F.positives):
        if items.size < 2:
            train.append(items)
            continue
        if F.last_item is not None and F.last_item[u] in items:
            held = int(F.last_item[u])
        else:
            held = int(items[rng.integers(0, items.size)])
        holdout[u] = held
        train.append(items[items != held])
    return InteractionMatrix(F.n_users, F.n_items, train), holdout


def evaluate_hit_ratio(final: FinalGraph, train_F: InteractionMatrix, holdout: np.ndarray,
                       ks=(5, 10), n_candidates: int = 100, seed: int = 0) -> dict[int, float]:
    """HitRatio@k over held-out items against sampled unobserved candidates."""
    nu, ni = train_F.n_users, train_F.n_items
    hits = {k: 0 for k in ks}
    evaluated = 0
    for u in range(nu):
        if holdout[u] < 0:
            continue
        rng = np.random.default_rng(derive_seed(seed, 0xE0A0 + u))
        banned = set(int(i) for i in train_F.positives[u])
        banned.add(int(holdout[u]))
        pool = np.asarray([i for i in range(ni) if i not in banned], dtype=np.int64)
        n_neg = min(n_candidates - 1, pool.size)
        negs = rng.choice(pool, size=n_neg, replace=False)
        cand = nu + np.concatenate([[holdout[u]], negs])
        d = deterministic_dijkstra(final, u, cand)[cand]
        ranked = cand[np.lexsort((cand, d))]
        target = nu + holdout[u]
        for k in ks:
            hits[k] += int(target in ranked[:k])
        evaluated += 1
    if evaluated == 0:
        raise ValueError("no users eligible for evaluation")
    return {k: hits[k] / evaluated for k in ks}


@dataclass
class CFResult:
    graph: StochasticGraph
    final: FinalGraph
    report: EvalReport
    history: list[dict]
    holdout: np.ndarray
    skipped_users: int


def train_cf(F: InteractionMatrix, variant: str, config: TrainConfig,
             k_sim: int = 16, eval_candidates: int = 100) -> CFResult:
    """Train the ranking objective on an interaction matrix and report HR@k.

    Performs the leave-one-out split, builds the requested candidate graph
    over user+item vertices, and optimizes with uniformly sampled positives
    and negatives (one lazily-sampled search per user per step).  Users
    without training positives are skipped and counted in the result.
    """
    from .builders import build_cf_graph

    train_F, holdout = leave_one_out_split(F, config.seed)
    eligible = np.asarray([u for u in range(F.n_users) if train_F.positives[u].size > 0],
                          dtype=np.int64)
    skipped = F.n_users - eligible.size
    edges, n_vert = build_cf_graph(train_F, variant, k_sim, config.seed)
    d_max = config.d_max if config.d_max is not None else config.d_max_factor * n_vert
    graph = StochasticGraph.from_candidates(n_vert, edges, 1.0, config.init_prob, d_max=d_max)
    m = graph.n_edges
    nu, ni = F.n_users, F.n_items
    adam_w = SparseAdam(m, config.hyper)
    adam_b = SparseAdam(m, config.hyper_b(), clamp=(-15.0, 15.0))
    baseline = LossBaseline(config.baseline_decay) if config.baseline else None
    sched = config.resolved_schedule()
    rng = np.random.default_rng(derive_seed(config.seed, 0xCF7))

    history: list[dict] = []
    step = 0
    lam = 0.0
    for epoch in range(config.epochs):
        epoch_loss = 0.0
        for _ in range(config.steps_per_epoch):
            lam = sched.value(step)
            users = rng.choice(eligible, size=min(config.batch_users, eligible.size),
                               replace=False)
            weights = graph.weights()
            probs = graph.probs()
            dsoft = edge_prob(graph.theta_w)
            grad = SparseGradient(m)
            step_seed = derive_seed(config.seed, step)
            batch_loss = 0.0
            u_count = users.size
            for u in users:
                tp = train_F.positives[u]
                pos = int(tp[rng.integers(0, tp.size)])
                negs = rng.integers(0, ni, size=config.n_negatives)
                item_vertices = nu + np.concatenate([[pos], negs]).astype(np.int64)
                trace = stochastic_dijkstra(graph, int(u), np.unique(item_vertices),
                                            seed=derive_seed(step_seed, int(u)),
                                            weights=weights, probs=probs)
                d = trace.distances[item_vertices]
                loss_u, g_pos, g_neg = cf_softmax(d[0], d[1:])
                coefs = np.concatenate([[g_pos], g_neg]) / u_count
                _accumulate_path_grads(trace.parent_edge, trace.parent_vertex, dsoft,
                                       int(u), item_vertices, coefs, grad.w, grad.w_touched)
                base = baseline.value if baseline is not None else 0.0
                sig = probs[trace.sampled_eids]
                grad.add_b(trace.sampled_eids,
                           ((loss_u - base) / u_count)
                           * (trace.sampled_outcomes.astype(np.float64) - sig))
                batch_loss += loss_u / u_count
            if not np.isfinite(batch_loss):
                raise TrainingDiverged(step, batch_loss)
            regularizer(graph, lam, grad)
            try:
                adam_w.step(graph.theta_w, *grad.w_sparse())
                adam_b.step(graph.theta_b, *grad.b_sparse())
            except ValueError as exc:
                raise TrainingDiverged(step, batch_loss) from exc
            if baseline is not None:
                baseline.update(batch_loss)
            epoch_loss += batch_loss
            step += 1
        history.append({
            "epoch": epoch,
            "loss": epoch_loss / config.steps_per_epoch,
            "lambda": lam,
            "edges_above_half": int(np.count_nonzero(graph.theta_b >= 0.0)),
        })

    final = finalize(graph)
    hr = evaluate_hit_ratio(final, train_F, holdout, n_candidates=eval_candidates,
                            seed=config.seed)
    pc = param_count(final)
    report = EvalReport(
        objective=history[-1]["loss"],
        retained_edges=final.n_edges,
        param_count=pc,
        params_per_instance=pc / (nu + ni),
        hit_ratio=hr,
        extras={"task": "cf", "variant": variant, "skipped_users": skipped,
                "candidate_edges": m},
    )
    return CFResult(graph, final, report, history, holdout, skipped)


# ---------------------------------------------------------------------------
# anchors


def anchor_embedding(final: FinalGraph, v: int, anchors) -> np.ndarray:
    """Distances from vertex v to each anchor, via one multi-target search."""
    anchors = np.asarray(list(anchors), dtype=np.int64)
    return deterministic_dijkstra(final, v, anchors)[anchors]


def anchor_embeddings(final: FinalGraph, anchors) -> np.ndarray:
    """Anchor-distance features for every non-anchor vertex, one row each."""
    anchors = np.asarray(list(anchors), dtype=np.int64)
    others = np.setdiff1d(np.arange(final.n_vertices), anchors)
    return np.stack([anchor_embedding(final, int(v), anchors) for v in others])


# ---------------------------------------------------------------------------
# reconstruction harness


@dataclass
class ReconstructionResult:
    compression: CompressionResult
    max_error: float
    mean_error: float
    edge_metrics: dict | None


def shortest_path_relevant_edges(truth: FinalGraph) -> np.ndarray:
    """Mask of edges whose removal changes some pairwise distance.

    With continuous weights (no exact ties) these are exactly the edges
    that lie on a uniquely shortest path for at least one vertex pair.
    """
    n = truth.n_vertices
    base = np.stack([deterministic_dijkstra(truth, s) for s in range(n)])
    mask = np.zeros(truth.n_edges, dtype=bool)
    for e in range(truth.n_edges):
        keep = np.ones(truth.n_edges, dtype=bool)
        keep[e] = False
        sub = FinalGraph(n, truth.edges[keep], truth.weights[keep], truth.d_max)
        for s in range(n):
            if np.any(deterministic_dijkstra(sub, s) > base[s] + 1e-12):
                mask[e] = True
                break
    return mask


def _edge_key_set(edges: np.ndarray) -> set[tuple[int, int]]:
    return {(min(int(a), int(b)), max(int(a), int(b))) for a, b in edges}


def reconstruct_graph(truth_distances: np.ndarray, config: TrainConfig,
                      truth_graph: FinalGraph | None = None) -> ReconstructionResult:
    """Fit a complete-candidate graph to a known shortest-path matrix.

    Reports the max/mean absolute pairwise distance error of the finalized
    graph and, when the generating graph is supplied, precision/recall/F1
    of the retained edges against its shortest-path-relevant edges.
    """
    targets = MatrixTargets(truth_distances)
    result = train_compression(targets, config, candidates=complete_candidates(targets.n))
    n = targets.n
    dist = np.stack([deterministic_dijkstra(result.final, s) for s in range(n)])
    err = np.abs(dist - targets.matrix)
    edge_metrics = None
    if truth_graph is not None:
        relevant = _edge_key_set(truth_graph.edges[shortest_path_relevant_edges(truth_graph)])
        got = _edge_key_set(result.final.edges)
        tp = len(relevant & got)
        precision = tp / len(got) if got else 1.0
        recall = tp / len(relevant) if relevant else 1.0
        f1 = (2 * precision * recall / (precision + recall)) if precision + recall else 0.0
        edge_metrics = {"precision": precision, "recall": recall, "f1": f1,
                        "relevant_edges": len(relevant), "retained_edges": len(got)}
    return ReconstructionResult(result, float(err.max()), float(err.mean()), edge_metrics)


def default_reconstruction_config(seed: int = 0) -> TrainConfig:
    """Settings for fitting a complete candidate graph to a small known metric."""
    return TrainConfig(
        lambda_=0.05,
        epochs=8,
        steps_per_epoch=250,
        batch_pairs=1024,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Euclidean baseline


@dataclass
class EuclideanBaselineResult:
    embedding: np.ndarray
    mse: float
    history: list[dict]


def _classical_mds_init(targets, dim: int) -> np.ndarray:
    """Classical scaling of the target matrix: top eigenvectors of -J D^2 J / 2."""
    n = targets.n
    d2 = np.stack([targets.row(i) ** 2 for i in range(n)])
    j = np.eye(n) - np.full((n, n), 1.0 / n)
    b = -0.5 * j @ d2 @ j
    vals, vecs = np.linalg.eigh(b)
    idx = np.argsort(vals)[::-1][:dim]
    comp = vecs[:, idx] * np.sqrt(np.clip(vals[idx], 0.0, None))
    if comp.shape[1] < dim:
        comp = np.pad(comp, ((0, 0), (0, dim - comp.shape[1])))
    return comp


def train_euclidean_baseline(targets, dim: int, config: TrainConfig,
                             init="mds") -> EuclideanBaselineResult:
    """Parameter-matched comparator: n x dim vectors fit to the same targets.

    Optimizes the same mean-squared distance gap with the same Adam
    hyperparameters.  ``init`` is "mds" (classical scaling), "random", or an
    explicit (n, dim) array.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    n = targets.n
    rng = np.random.default_rng(derive_seed(config.seed, 0xBA5E))
    if isinstance(init, str):
        if init == "mds":
            emb = _classical_mds_init(targets, dim)
        elif init == "random":
            emb = rng.normal(scale=1.0, size=(n, dim))
        else:
            raise ValueError(f"unknown init {init!r}")
    else:
        emb = np.array(init, dtype=np.float64)
        if emb.shape != (n, dim):
            raise ValueError("init array must be (n, dim)")
    emb = np.ascontiguousarray(emb)
    flat = emb.reshape(-1)  # view: Adam updates write through to emb
    adam = SparseAdam(flat.size, config.hyper)
    all_ids = np.arange(flat.size)
    full = _all_ordered_pairs(n) if n * (n - 1) <= config.batch_pairs else None
    history: list[dict] = []
    step = 0
    for epoch in range(config.epochs):
        epoch_loss = 0.0
        for _ in range(config.steps_per_epoch):
            pairs = full if full is not None else _ordered_pair_batch(rng, n, config.batch_pairs)
            batch = pairs.shape[0]
            diff = emb[pairs[:, 0]] - emb[pairs[:, 1]]
            dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
            tv = targets.pairwise(pairs[:, 0], pairs[:, 1])
            err = dist - tv
            loss = float(np.dot(err, err)) / batch
            if not np.isfinite(loss):
                raise TrainingDiverged(step, loss)
            unit = np.where(dist[:, None] > 0, diff / np.maximum(dist, 1e-300)[:, None], 0.0)
            g_rows = (2.0 * err / batch)[:, None] * unit
            g = np.zeros_like(emb)
            np.add.at(g, pairs[:, 0], g_rows)
            np.add.at(g, pairs[:, 1], -g_rows)
            adam.step(flat, all_ids, g.reshape(-1))
            epoch_loss += loss
            step += 1
        history.append({"epoch": epoch, "loss": epoch_loss / config.steps_per_epoch})
    mse = 0.0
    for s in range(n):
        d = np.sqrt(np.einsum("ij,ij->i", emb - emb[s], emb - emb[s]))
        err = d - targets.row(s)
        mse += float(np.dot(err, err))
    return EuclideanBaselineResult(emb, mse / (n * n), history)
