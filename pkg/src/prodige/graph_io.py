"""Dataset ingestion, binary graph serialization, and diagnostics.

Graph file layout (little-endian):

    header   magic "PRDG", format version u32, n_vertices u32,
             n_edges u32, d_max f32                          (20 bytes)
    index    per-source offsets, n_vertices + 1 u32 values
    body     one (target i32, weight f32) record per edge, sorted by
             source vertex; each undirected edge is stored once under
             its smaller endpoint

The index is the vertex-proportional component of the stored size; the
body holds exactly two numbers per edge.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .builders import InteractionMatrix, VectorDataset
from .graph import FinalGraph

MAGIC = b"PRDG"
FORMAT_VERSION = 1

_HEADER = np.dtype([("magic", "S4"), ("version", "<u4"), ("n_vertices", "<u4"),
                    ("n_edges", "<u4"), ("d_max", "<f4")])
_RECORD = np.dtype([("target", "<i4"), ("weight", "<f4")])


class GraphFormatError(ValueError):
    pass


def save_graph(graph: FinalGraph, path) -> None:
    path = Path(path)
    n, m = graph.n_vertices, graph.n_edges
    header = np.zeros(1, dtype=_HEADER)
    header["magic"] = MAGIC
    header["version"] = FORMAT_VERSION
    header["n_vertices"] = n
    header["n_edges"] = m
    header["d_max"] = np.float32(graph.d_max)
    # FinalGraph keeps edges (smaller endpoint, larger endpoint) in
    # lexicographic order, which is exactly the on-disk body order.
    sources = graph.edges[:, 0].astype(np.int64)
    offsets = np.zeros(n + 1, dtype=np.uint32)
    np.add.at(offsets[1:], sources, 1)
    np.cumsum(offsets, out=offsets)
    body = np.empty(m, dtype=_RECORD)
    body["target"] = graph.edges[:, 1]
    body["weight"] = graph.weights
    with open(path, "wb") as fh:
        fh.write(header.tobytes())
        fh.write(offsets.tobytes())
        fh.write(body.tobytes())


def load_graph(path) -> FinalGraph:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.itemsize:
        raise GraphFormatError(f"{path}: truncated header")
    header = np.frombuffer(raw[:_HEADER.itemsize], dtype=_HEADER)[0]
    if bytes(header["magic"]) != MAGIC:
        raise GraphFormatError(f"{path}: bad magic {bytes(header['magic'])!r}")
    if int(header["version"]) != FORMAT_VERSION:
        raise GraphFormatError(f"{path}: unsupported format version {int(header['version'])}")
    n = int(header["n_vertices"])
    m = int(header["n_edges"])
    expected = _HEADER.itemsize + 4 * (n + 1) + _RECORD.itemsize * m
    if len(raw) != expected:
        raise GraphFormatError(f"{path}: expected {expected} bytes, found {len(raw)}")
    offsets = np.frombuffer(raw, dtype="<u4", count=n + 1, offset=_HEADER.itemsize)
    if offsets[0] != 0 or offsets[-1] != m or np.any(np.diff(offsets.astype(np.int64)) < 0):
        raise GraphFormatError(f"{path}: corrupt offsets index")
    body = np.frombuffer(raw, dtype=_RECORD, count=m, offset=_HEADER.itemsize + 4 * (n + 1))
    sources = np.repeat(np.arange(n, dtype=np.int64), np.diff(offsets.astype(np.int64)))
    edges = np.stack([sources, body["target"].astype(np.int64)], axis=1).astype(np.int32)
    return FinalGraph(n, edges, body["weight"].copy(), float(header["d_max"]))


def load_vectors(path, fmt: str = "csv", n: int | None = None,
                 dim: int | None = None) -> VectorDataset:
    """Read a vector dataset from CSV rows or a raw little-endian f32 blob.

    The raw format carries no shape, so ``n`` and ``dim`` are required for
    it.  Rows of inconsistent width or non-finite entries are rejected.
    """
    path = Path(path)
    if fmt == "csv":
        rows: list[list[float]] = []
        with open(path, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row:
                    continue
                try:
                    values = [float(x) for x in row]
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: bad number ({exc})") from None
                if rows and len(values) != len(rows[0]):
                    raise ValueError(f"{path}:{lineno}: expected {len(rows[0])} columns, "
                                     f"found {len(values)}")
                rows.append(values)
        if not rows:
            raise ValueError(f"{path}: no data rows")
        arr = np.asarray(rows, dtype=np.float64)
    elif fmt == "raw-f32":
        if n is None or dim is None:
            raise ValueError("raw-f32 requires explicit n and dim")
        raw = np.fromfile(path, dtype="<f4")
        if raw.size != n * dim:
            raise ValueError(f"{path}: expected {n * dim} float32 values, found {raw.size}")
        arr = raw.reshape(n, dim).astype(np.float64)
    else:
        raise ValueError(f"unknown vector format {fmt!r}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{path}: non-finite values")
    return VectorDataset(arr)


def save_vectors(data: VectorDataset, path, fmt: str = "csv") -> None:
    path = Path(path)
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for row in data.vectors:
                writer.writerow([repr(float(x)) for x in row])
    elif fmt == "raw-f32":
        data.vectors.astype("<f4").tofile(path)
    else:
        raise ValueError(f"unknown vector format {fmt!r}")


@dataclass
class InteractionsFile:
    matrix: InteractionMatrix
    user_ids: np.ndarray  # dense index -> original id
    item_ids: np.ndarray


def load_interactions(path) -> InteractionsFile:
    """Read "user_id item_id" lines into a dense interaction matrix.

    Original ids are remapped to dense 0-based ranges (sorted order); the
    mapping arrays ride along in the result.  Duplicate pairs collapse; the
    last line per user is remembered for leave-one-out evaluation.
    """
    path = Path(path)
    pairs: list[tuple[int, int]] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'user_id item_id'")
            try:
                pairs.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: ids must be integers") from None
    if not pairs:
        raise ValueError(f"{path}: no interactions")
    arr = np.asarray(pairs, dtype=np.int64)
    user_ids, u_dense = np.unique(arr[:, 0], return_inverse=True)
    item_ids, i_dense = np.unique(arr[:, 1], return_inverse=True)
    positives: list[list[int]] = [[] for _ in range(user_ids.size)]
    last = np.full(user_ids.size, -1, dtype=np.int64)
    for u, i in zip(u_dense, i_dense):
        positives[u].append(int(i))
        last[u] = int(i)
    matrix = InteractionMatrix(user_ids.size, item_ids.size,
                               [np.asarray(p) for p in positives], last_item=last)
    return InteractionsFile(matrix, user_ids, item_ids)


@dataclass
class DegreeStats:
    histogram: dict[int, int]
    max_degree: int
    mean_degree: float

    def to_dict(self) -> dict:
        return {"histogram": {str(k): v for k, v in sorted(self.histogram.items())},
                "max_degree": self.max_degree, "mean_degree": self.mean_degree}


def degree_stats(graph: FinalGraph) -> DegreeStats:
    """Vertex degree histogram plus max/mean, plot-ready."""
    deg = graph.degrees()
    values, counts = np.unique(deg, return_counts=True)
    return DegreeStats({int(v): int(c) for v, c in zip(values, counts)},
                       int(deg.max()) if deg.size else 0,
                       float(deg.mean()) if deg.size else 0.0)
