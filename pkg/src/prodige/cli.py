"""Command-line entry points.

Every subcommand validates its configuration up front, runs the matching
pipeline, and emits one JSON object per line on stdout.  Runs are
deterministic for a fixed --seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from ._kernels import derive_seed
from .builders import VectorDataset, build_cf_graph, build_knn_random, generate_erdos_renyi
from .config import RunConfig, apply_updates, load_run_config
from .graph import FinalGraph, StochasticGraph, finalize, param_count
from .graph_io import degree_stats, load_graph, load_interactions, load_vectors, save_graph
from .tasks import (EuclideanTargets, anchor_embeddings, default_reconstruction_config,
                    evaluate_compression_mse, evaluate_hit_ratio, leave_one_out_split,
                    reconstruct_graph, train_cf, train_compression, train_euclidean_baseline)


def _emit(record: dict) -> None:
    print(json.dumps(record, sort_keys=True))


def _apply_threads_cap() -> None:
    raw = os.environ.get("PRODIGE_THREADS")
    if raw is None:
        return
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"PRODIGE_THREADS must be an integer, got {raw!r}") from None
    if cap < 1:
        raise ValueError("PRODIGE_THREADS must be >= 1")
    import numba

    numba.set_num_threads(min(cap, numba.config.NUMBA_NUM_THREADS))


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value configuration file")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", help="output directory")


_FLAG_KEYS = [
    ("--lambda", "lambda", float), ("--k", "k", int), ("--r", "r", int),
    ("--k-sim", "k_sim", int), ("--epochs", "epochs", int),
    ("--steps-per-epoch", "steps_per_epoch", int),
    ("--batch-pairs", "batch_pairs", int), ("--negatives", "negatives", int),
    ("--batch-users", "batch_users", int), ("--lr", "lr", float),
    ("--lr-b", "lr_b", float), ("--dim", "dim", int),
    ("--anchors", "anchors", int), ("--links-per-anchor", "links_per_anchor", int),
    ("--d-max", "d_max", float), ("--d-max-factor", "d_max_factor", float),
    ("--runs", "runs", int), ("--n-min", "n_min", int), ("--n-max", "n_max", int),
    ("--p", "p", float), ("--eval-candidates", "eval_candidates", int),
]


def _add_tuning_flags(parser: argparse.ArgumentParser) -> None:
    for flag, key, typ in _FLAG_KEYS:
        parser.add_argument(flag, dest=f"cfg_{key}", type=typ, default=None)
    parser.add_argument("--variant", dest="cfg_variant",
                        choices=["normal", "bipartite", "random"], default=None)


def _build_config(args: argparse.Namespace) -> RunConfig:
    config = load_run_config(args.config) if args.config else RunConfig()
    updates: dict[str, str] = {}
    for _, key, _typ in _FLAG_KEYS + [(None, "variant", str)]:
        value = getattr(args, f"cfg_{key}", None)
        if value is not None:
            updates[key] = str(value)
    apply_updates(config, updates)
    if args.seed is not None:
        config.seed = args.seed
    if args.out is not None:
        config.out = args.out
    return config


def _load_vector_dataset(args: argparse.Namespace) -> VectorDataset:
    if not args.vectors:
        raise ValueError("--vectors is required")
    return load_vectors(args.vectors, fmt=args.format, n=args.n, dim=args.dim_in)


def _vector_io_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--vectors", help="vector dataset path")
    parser.add_argument("--format", choices=["csv", "raw-f32"], default="csv")
    parser.add_argument("--n", type=int, help="row count for raw-f32")
    parser.add_argument("--dim-in", type=int, help="column count for raw-f32")


def _out_dir(config: RunConfig) -> Path | None:
    if config.out is None:
        return None
    path = Path(config.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _cmd_build_graph(args) -> int:
    config = _build_config(args)
    if args.vectors:
        data = _load_vector_dataset(args)
        edges = build_knn_random(data, config.k, config.r, config.seed)
        n_vertices = data.n_items
        source = "vectors"
    elif args.interactions:
        loaded = load_interactions(args.interactions)
        edges, n_vertices = build_cf_graph(loaded.matrix, config.variant, config.k_sim,
                                           config.seed)
        source = f"interactions/{config.variant}"
    else:
        raise ValueError("need --vectors or --interactions")
    out = _out_dir(config)
    if out is not None:
        with open(out / "edges.txt", "w") as fh:
            for a, b in edges:
                fh.write(f"{a} {b}\n")
    _emit({"command": "build-graph", "source": source, "n_vertices": n_vertices,
           "candidate_edges": int(edges.shape[0])})
    return 0


def _cmd_train_compress(args) -> int:
    config = _build_config(args)
    data = _load_vector_dataset(args)
    targets = EuclideanTargets(data)
    edges = build_knn_random(data, config.k, config.r, config.seed)
    tc = config.to_train_config()
    graph = None
    if config.anchors > 0:
        from .builders import add_anchor_vertices

        init_w = np.clip(targets.pairwise(edges[:, 0], edges[:, 1]), 1e-3, None)
        base = StochasticGraph.from_candidates(data.n_items, edges, init_w, tc.init_prob,
                                               d_max=tc.d_max, d_max_factor=tc.d_max_factor)
        graph = add_anchor_vertices(base, config.anchors, config.links_per_anchor,
                                    derive_seed(config.seed, 0xA11C))
    result = train_compression(targets, tc, candidates=edges, graph=graph)
    for row in result.history:
        _emit({"command": "train-compress", **row})
    _emit({"command": "train-compress", "final": True, **result.report.to_dict()})
    out = _out_dir(config)
    if out is not None:
        save_graph(result.final, out / "graph.prdg")
        with open(out / "report.jsonl", "w") as fh:
            for row in result.history:
                fh.write(json.dumps(row, sort_keys=True) + "\n")
            fh.write(result.report.to_json() + "\n")
    return 0


def _cmd_train_cf(args) -> int:
    config = _build_config(args)
    if not args.interactions:
        raise ValueError("--interactions is required")
    loaded = load_interactions(args.interactions)
    result = train_cf(loaded.matrix, config.variant, config.to_train_config(),
                      k_sim=config.k_sim, eval_candidates=config.eval_candidates)
    for row in result.history:
        _emit({"command": "train-cf", **row})
    _emit({"command": "train-cf", "final": True, **result.report.to_dict()})
    out = _out_dir(config)
    if out is not None:
        save_graph(result.final, out / "graph.prdg")
        np.savetxt(out / "holdout.txt", result.holdout, fmt="%d")
        with open(out / "mapping.json", "w") as fh:
            json.dump({"users": loaded.user_ids.tolist(), "items": loaded.item_ids.tolist()}, fh)
    return 0


def _cmd_reconstruct_bench(args) -> int:
    config = _build_config(args)
    if config.n_min < 2 or config.n_max < config.n_min:
        raise ValueError("need 2 <= n_min <= n_max")
    rng = np.random.default_rng(derive_seed(config.seed, 0xBE9C))
    below_1e2 = 0
    below_1e3 = 0
    for run in range(config.runs):
        n = int(rng.integers(config.n_min, config.n_max + 1))
        truth, dist = generate_erdos_renyi(n, config.p, seed=derive_seed(config.seed, run))
        tc = default_reconstruction_config(seed=derive_seed(config.seed, 7000 + run))
        result = reconstruct_graph(dist, tc, truth_graph=truth)
        below_1e2 += result.max_error < 1e-2
        below_1e3 += result.max_error < 1e-3
        record = {"command": "reconstruct-bench", "run": run, "n": n,
                  "max_error": result.max_error, "mean_error": result.mean_error}
        if result.edge_metrics:
            record["edge_f1"] = result.edge_metrics["f1"]
        _emit(record)
    _emit({"command": "reconstruct-bench", "summary": True, "runs": config.runs,
           "below_1e-2": below_1e2, "below_1e-3": below_1e3})
    return 0


def _cmd_eval(args) -> int:
    config = _build_config(args)
    if not args.graph:
        raise ValueError("--graph is required")
    graph = load_graph(args.graph)
    if args.vectors:
        data = _load_vector_dataset(args)
        mse = evaluate_compression_mse(graph, EuclideanTargets(data))
        _emit({"command": "eval", "mse": mse, "retained_edges": graph.n_edges,
               "param_count": param_count(graph)})
    elif args.interactions:
        loaded = load_interactions(args.interactions)
        train_F, holdout = leave_one_out_split(loaded.matrix, config.seed)
        hr = evaluate_hit_ratio(graph, train_F, holdout,
                                n_candidates=config.eval_candidates, seed=config.seed)
        _emit({"command": "eval", **{f"hr@{k}": v for k, v in sorted(hr.items())},
               "retained_edges": graph.n_edges, "param_count": param_count(graph)})
    else:
        raise ValueError("need --vectors or --interactions")
    return 0


def _cmd_embed_anchors(args) -> int:
    config = _build_config(args)
    if not args.graph:
        raise ValueError("--graph is required")
    if config.anchors < 1:
        raise ValueError("--anchors must be >= 1")
    graph = load_graph(args.graph)
    if config.anchors >= graph.n_vertices:
        raise ValueError("more anchors than vertices")
    anchors = np.arange(graph.n_vertices - config.anchors, graph.n_vertices)
    emb = anchor_embeddings(graph, anchors)
    out = _out_dir(config)
    target = (out / "anchors.csv") if out is not None else Path("anchors.csv")
    np.savetxt(target, emb, delimiter=",")
    _emit({"command": "embed-anchors", "rows": int(emb.shape[0]),
           "anchors": config.anchors, "out": str(target)})
    return 0


def _cmd_stats(args) -> int:
    if not args.graph:
        raise ValueError("--graph is required")
    graph = load_graph(args.graph)
    stats = degree_stats(graph)
    _emit({"command": "stats", "n_vertices": graph.n_vertices,
           "n_edges": graph.n_edges, "param_count": param_count(graph),
           **stats.to_dict()})
    return 0


def _cmd_baseline_euclid(args) -> int:
    config = _build_config(args)
    data = _load_vector_dataset(args)
    result = train_euclidean_baseline(EuclideanTargets(data), config.dim,
                                      config.to_train_config())
    _emit({"command": "baseline-euclid", "mse": result.mse, "dim": config.dim,
           "param_count": data.n_items * config.dim,
           "params_per_instance": float(config.dim)})
    return 0


_COMMANDS = {
    "build-graph": _cmd_build_graph,
    "train-compress": _cmd_train_compress,
    "train-cf": _cmd_train_cf,
    "reconstruct-bench": _cmd_reconstruct_bench,
    "eval": _cmd_eval,
    "embed-anchors": _cmd_embed_anchors,
    "stats": _cmd_stats,
    "baseline-euclid": _cmd_baseline_euclid,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prodige",
                                     description="learnable sparse graph representations")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in _COMMANDS:
        p = sub.add_parser(name)
        _add_common(p)
        _add_tuning_flags(p)
        if name in ("build-graph", "train-compress", "eval", "baseline-euclid"):
            _vector_io_flags(p)
        if name in ("build-graph", "train-cf", "eval"):
            p.add_argument("--interactions", help="interactions file path")
        if name in ("eval", "embed-anchors", "stats"):
            p.add_argument("--graph", help="serialized graph path")
    return parser


def cli_main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_threads_cap()
        return _COMMANDS[args.command](args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())
