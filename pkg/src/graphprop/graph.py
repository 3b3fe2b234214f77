"""Sparse graphs, normalized propagation operators, negative-graph sampling,
and the neutral on-disk dataset format.

The dataset format (UTF-8, LF, whitespace-separated, 0-indexed):

- ``graph.txt``    — line 1: ``n m``; then m lines ``u v`` (undirected, each
  pair once in either order; duplicates collapsed; self-loops rejected).
- ``features.txt`` — line 1: ``n d nnz``; then nnz lines ``i j value`` (COO).
- ``labels.txt``   — line 1: ``n c``; then n lines ``i label``, label in
  [0, c) or -1 for unlabeled.
- ``splits.txt``   — three lines: ``train: i1 i2 ...``, ``val: ...``,
  ``test: ...`` (disjoint, all indices labeled).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from . import kernels
from .rng import Pcg32


class DataFormatError(ValueError):
    """Malformed dataset file; message carries file and line number."""


class SamplingError(RuntimeError):
    """Negative-edge rejection sampling could not reach the target."""


# ---------------------------------------------------------------------------
# Core sparse containers
# ---------------------------------------------------------------------------


@dataclass
class CsrMatrix:
    """Minimal CSR container (int64 structure, float64 values)."""

    shape: tuple[int, int]
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray

    @classmethod
    def from_scipy(cls, mat) -> "CsrMatrix":
        mat = mat.tocsr()
        mat.sort_indices()
        return cls(
            shape=mat.shape,
            indptr=mat.indptr.astype(np.int64),
            indices=mat.indices.astype(np.int64),
            data=mat.data.astype(np.float64),
        )

    def to_scipy(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.data, self.indices, self.indptr), shape=self.shape)

    def to_dense(self) -> np.ndarray:
        return self.to_scipy().toarray()

    @property
    def nnz(self) -> int:
        return int(self.indices.shape[0])


def spmm(csr: CsrMatrix, dense: np.ndarray) -> np.ndarray:
    """Sparse @ dense in O(nnz * d), deterministic accumulation order."""
    dense = np.ascontiguousarray(dense, dtype=np.float64)
    if dense.ndim != 2:
        raise ValueError(f"dense operand must be 2-D, got shape {dense.shape}")
    if csr.shape[1] != dense.shape[0]:
        raise ValueError(f"spmm dimension mismatch: {csr.shape} x {dense.shape}")
    return kernels.spmm_csr(csr.indptr, csr.indices, csr.data, dense)


@dataclass
class SparseGraph:
    """Symmetric 0/1 adjacency in CSR form; no stored self-loops."""

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    degrees: np.ndarray

    @classmethod
    def from_edges(cls, n: int, edges) -> "SparseGraph":
        """Build from an iterable of undirected (u, v) pairs.

        Duplicates and direction-swapped repeats collapse to one edge;
        self-loops are rejected.
        """
        pairs = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if pairs.size:
            if pairs.min() < 0 or pairs.max() >= n:
                raise ValueError("edge endpoint out of range")
            if np.any(pairs[:, 0] == pairs[:, 1]):
                raise ValueError("self-loop in edge list")
        u = np.concatenate([pairs[:, 0], pairs[:, 1]])
        v = np.concatenate([pairs[:, 1], pairs[:, 0]])
        mat = sp.coo_matrix(
            (np.ones(u.shape[0], dtype=np.float64), (u, v)), shape=(n, n)
        ).tocsr()
        mat.sum_duplicates()
        mat.sort_indices()
        indptr = mat.indptr.astype(np.int64)
        indices = mat.indices.astype(np.int64)
        degrees = np.diff(indptr).astype(np.int64)
        return cls(n=n, indptr=indptr, indices=indices, degrees=degrees)

    @property
    def num_edges(self) -> int:
        """Number of undirected edges."""
        return int(self.indices.shape[0]) // 2

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    @cached_property
    def edge_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """(u, v) arrays with u < v, one entry per undirected edge."""
        rows = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))
        cols = self.indices
        keep = rows < cols
        return rows[keep], cols[keep]

    @cached_property
    def edge_keys(self) -> np.ndarray:
        """Sorted canonical keys (min*n + max) of the undirected edges."""
        u, v = self.edge_pairs
        return np.sort(u.astype(np.uint64) * np.uint64(self.n) + v.astype(np.uint64))

    def components(self) -> np.ndarray:
        """Connected-component id per node (BFS order)."""
        comp = np.full(self.n, -1, dtype=np.int64)
        cid = 0
        for start in range(self.n):
            if comp[start] >= 0:
                continue
            stack = [start]
            comp[start] = cid
            while stack:
                node = stack.pop()
                for nb in self.neighbors(node):
                    if comp[nb] < 0:
                        comp[nb] = cid
                        stack.append(int(nb))
            cid += 1
        return comp


# ---------------------------------------------------------------------------
# Propagation operators
# ---------------------------------------------------------------------------


@dataclass
class PropagationOperator:
    """Symmetric normalized self-loop operator: entry (i, j) of the CSR is
    A~_ij / sqrt((D_ii+1)(D_jj+1)) with A~ = A + I. Keeps a reference to the
    source graph (loss evaluation needs raw degrees and edge lists)."""

    csr: CsrMatrix
    graph: SparseGraph

    @property
    def n(self) -> int:
        return self.csr.shape[0]


def build_propagation_operator(g: SparseGraph) -> PropagationOperator:
    inv_sqrt = 1.0 / np.sqrt(g.degrees.astype(np.float64) + 1.0)
    rows = np.repeat(np.arange(g.n, dtype=np.int64), np.diff(g.indptr))
    rows = np.concatenate([rows, np.arange(g.n, dtype=np.int64)])
    cols = np.concatenate([g.indices, np.arange(g.n, dtype=np.int64)])
    vals = inv_sqrt[rows] * inv_sqrt[cols]
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(g.n, g.n)).tocsr()
    mat.sort_indices()
    return PropagationOperator(csr=CsrMatrix.from_scipy(mat), graph=g)


@dataclass
class NegativeGraph:
    """A sampled complement subgraph and its renormalized inverse operator.

    ``igc_csr`` holds !D~^(-1/2) !A~ !D~^(-1/2) where !A~ = 2I - !A and
    !D~ = 2I + !D (row sums of |!A~|): diagonal 2/(2 + !D_ii), off-diagonal
    -1/sqrt((2 + !D_ii)(2 + !D_jj)) at sampled pairs.
    """

    graph: SparseGraph
    igc_csr: CsrMatrix

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def neg_degrees(self) -> np.ndarray:
        return self.graph.degrees

    @property
    def neg_csr(self) -> CsrMatrix:
        g = self.graph
        return CsrMatrix(
            shape=(g.n, g.n),
            indptr=g.indptr,
            indices=g.indices,
            data=np.ones(g.indices.shape[0], dtype=np.float64),
        )


def _build_igc_csr(neg: SparseGraph) -> CsrMatrix:
    inv_sqrt = 1.0 / np.sqrt(neg.degrees.astype(np.float64) + 2.0)
    rows = np.repeat(np.arange(neg.n, dtype=np.int64), np.diff(neg.indptr))
    off_vals = -inv_sqrt[rows] * inv_sqrt[neg.indices]
    # 2/(2+d) directly (not 2*inv_sqrt**2): untouched nodes get exactly 1.0,
    # making the identity/unit-radius properties hold to the last bit
    diag_vals = 2.0 / (neg.degrees.astype(np.float64) + 2.0)
    all_rows = np.concatenate([rows, np.arange(neg.n, dtype=np.int64)])
    all_cols = np.concatenate([neg.indices, np.arange(neg.n, dtype=np.int64)])
    all_vals = np.concatenate([off_vals, diag_vals])
    mat = sp.coo_matrix((all_vals, (all_rows, all_cols)), shape=(neg.n, neg.n)).tocsr()
    mat.sort_indices()
    return CsrMatrix.from_scipy(mat)


def negative_graph_from_edges(n: int, edges) -> NegativeGraph:
    """Assemble a NegativeGraph from explicit non-edge pairs (testing and
    hand-constructed instances)."""
    neg = SparseGraph.from_edges(n, edges)
    return NegativeGraph(graph=neg, igc_csr=_build_igc_csr(neg))


def sample_negative_graph(g: SparseGraph, target_edges: int, rng: Pcg32) -> NegativeGraph:
    """Uniformly sample ``target_edges`` distinct unlinked pairs by rejection.

    Candidate pairs come from a child generator stream (the caller's ``rng``
    advances by exactly one 64-bit draw regardless of how many candidates the
    sampler consumes, keeping run streams aligned across kernel backends).
    """
    if target_edges < 0:
        raise ValueError("target_edges must be >= 0")
    free = g.n * (g.n - 1) // 2 - g.num_edges
    if target_edges > free:
        raise SamplingError(
            f"target of {target_edges} negative edges infeasible: only {free} "
            f"unlinked pairs exist on {g.n} nodes"
        )
    child = rng.spawn()
    keys, status = kernels.sample_negative(
        g.n, g.edge_keys, target_edges, child.state, child.inc
    )
    if status != 0:
        raise SamplingError(
            f"negative sampling stalled: acceptance rate below 1e-4 over a "
            f"{kernels.SAMPLE_WINDOW}-candidate window with {keys.shape[0]} of "
            f"{target_edges} edges accepted; use a smaller target"
        )
    u = (keys // np.uint64(g.n)).astype(np.int64)
    v = (keys % np.uint64(g.n)).astype(np.int64)
    neg = SparseGraph.from_edges(g.n, np.stack([u, v], axis=1))
    return NegativeGraph(graph=neg, igc_csr=_build_igc_csr(neg))


# ---------------------------------------------------------------------------
# Dataset container and neutral-format loader
# ---------------------------------------------------------------------------


@dataclass
class Dataset:
    """A graph plus row-normalized features, labels, and index splits."""

    graph: SparseGraph
    features: CsrMatrix
    labels: np.ndarray
    num_classes: int
    train_idx: np.ndarray
    val_idx: np.ndarray
    test_idx: np.ndarray
    name: str = "dataset"
    _dense_features: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    def features_dense(self) -> np.ndarray:
        if self._dense_features is None:
            self._dense_features = self.features.to_dense()
        return self._dense_features


def _read_tokens(path: str):
    """Yield (line_number, tokens) for non-empty lines."""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            tokens = line.split()
            if tokens:
                yield lineno, tokens


def _fail(path: str, lineno: int, message: str):
    raise DataFormatError(f"{os.path.basename(path)}:{lineno}: {message}")


def _parse_int(path: str, lineno: int, token: str, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        _fail(path, lineno, f"expected integer {what}, got {token!r}")


def _load_graph_file(path: str) -> SparseGraph:
    lines = _read_tokens(path)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise DataFormatError(f"{os.path.basename(path)}:1: empty file")
    if len(header) != 2:
        _fail(path, lineno, f"header must be 'n m', got {' '.join(header)!r}")
    n = _parse_int(path, lineno, header[0], "node count")
    m = _parse_int(path, lineno, header[1], "edge count")
    if n <= 0:
        _fail(path, lineno, f"node count must be positive, got {n}")
    edges = np.empty((m, 2), dtype=np.int64)
    count = 0
    for lineno, tokens in lines:
        if count >= m:
            _fail(path, lineno, f"more than the declared {m} edges")
        if len(tokens) != 2:
            _fail(path, lineno, f"expected 'u v', got {' '.join(tokens)!r}")
        u = _parse_int(path, lineno, tokens[0], "endpoint")
        v = _parse_int(path, lineno, tokens[1], "endpoint")
        if not (0 <= u < n and 0 <= v < n):
            _fail(path, lineno, f"endpoint out of range [0, {n}): {u} {v}")
        if u == v:
            _fail(path, lineno, f"self-loop rejected: {u} {v}")
        edges[count] = (u, v)
        count += 1
    if count != m:
        _fail(path, 0, f"declared {m} edges but found {count}")
    return SparseGraph.from_edges(n, edges)


def _load_features_file(path: str, n: int) -> CsrMatrix:
    lines = _read_tokens(path)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise DataFormatError(f"{os.path.basename(path)}:1: empty file")
    if len(header) != 3:
        _fail(path, lineno, f"header must be 'n d nnz', got {' '.join(header)!r}")
    fn = _parse_int(path, lineno, header[0], "node count")
    d = _parse_int(path, lineno, header[1], "feature dim")
    nnz = _parse_int(path, lineno, header[2], "entry count")
    if fn != n:
        _fail(path, lineno, f"node count {fn} disagrees with graph.txt ({n})")
    if d <= 0:
        _fail(path, lineno, f"feature dim must be positive, got {d}")
    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz, dtype=np.float64)
    count = 0
    for lineno, tokens in lines:
        if count >= nnz:
            _fail(path, lineno, f"more than the declared {nnz} entries")
        if len(tokens) != 3:
            _fail(path, lineno, f"expected 'i j value', got {' '.join(tokens)!r}")
        i = _parse_int(path, lineno, tokens[0], "row")
        j = _parse_int(path, lineno, tokens[1], "column")
        try:
            value = float(tokens[2])
        except ValueError:
            _fail(path, lineno, f"expected real value, got {tokens[2]!r}")
        if not (0 <= i < n):
            _fail(path, lineno, f"row out of range [0, {n}): {i}")
        if not (0 <= j < d):
            _fail(path, lineno, f"column out of range [0, {d}): {j}")
        if not np.isfinite(value):
            _fail(path, lineno, f"non-finite feature value {tokens[2]!r}")
        rows[count], cols[count], vals[count] = i, j, value
        count += 1
    if count != nnz:
        _fail(path, 0, f"declared {nnz} entries but found {count}")
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    dup = (rows[1:] == rows[:-1]) & (cols[1:] == cols[:-1])
    if np.any(dup):
        k = int(np.nonzero(dup)[0][0])
        _fail(path, 0, f"duplicate feature entry at ({rows[k]}, {cols[k]})")
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(n, d)).tocsr()
    # Row L1 normalization: x_i <- x_i / sum_j |x_ij| (zero rows stay zero).
    row_sums = np.asarray(np.abs(mat).sum(axis=1)).ravel()
    scale = np.zeros_like(row_sums)
    nz = row_sums > 0
    scale[nz] = 1.0 / row_sums[nz]
    mat = sp.diags(scale) @ mat
    return CsrMatrix.from_scipy(mat)


def _load_labels_file(path: str, n: int) -> tuple[np.ndarray, int]:
    lines = _read_tokens(path)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise DataFormatError(f"{os.path.basename(path)}:1: empty file")
    if len(header) != 2:
        _fail(path, lineno, f"header must be 'n c', got {' '.join(header)!r}")
    ln = _parse_int(path, lineno, header[0], "node count")
    c = _parse_int(path, lineno, header[1], "class count")
    if ln != n:
        _fail(path, lineno, f"node count {ln} disagrees with graph.txt ({n})")
    if c <= 0:
        _fail(path, lineno, f"class count must be positive, got {c}")
    labels = np.full(n, -2, dtype=np.int64)
    for lineno, tokens in lines:
        if len(tokens) != 2:
            _fail(path, lineno, f"expected 'i label', got {' '.join(tokens)!r}")
        i = _parse_int(path, lineno, tokens[0], "node id")
        lab = _parse_int(path, lineno, tokens[1], "label")
        if not (0 <= i < n):
            _fail(path, lineno, f"node id out of range [0, {n}): {i}")
        if labels[i] != -2:
            _fail(path, lineno, f"duplicate label line for node {i}")
        if lab != -1 and not (0 <= lab < c):
            _fail(path, lineno, f"label out of range [0, {c}) or -1: {lab}")
        labels[i] = lab
    missing = np.nonzero(labels == -2)[0]
    if missing.size:
        _fail(path, 0, f"no label line for node {int(missing[0])}")
    return labels, c


def _load_splits_file(path: str, n: int, labels: np.ndarray) -> dict[str, np.ndarray]:
    wanted = ["train", "val", "test"]
    found: dict[str, tuple[int, np.ndarray]] = {}
    for lineno, tokens in _read_tokens(path):
        key = tokens[0].rstrip(":")
        if tokens[0][-1] != ":" or key not in wanted:
            _fail(path, lineno, f"expected 'train:', 'val:' or 'test:' prefix, got {tokens[0]!r}")
        if key in found:
            _fail(path, lineno, f"duplicate {key} line")
        idx = np.array([_parse_int(path, lineno, t, "index") for t in tokens[1:]], dtype=np.int64)
        found[key] = (lineno, idx)
    for key in wanted:
        if key not in found:
            _fail(path, 0, f"missing {key}: line")
    splits: dict[str, np.ndarray] = {}
    seen: dict[int, str] = {}
    for key in wanted:
        lineno, idx = found[key]
        if idx.size and (idx.min() < 0 or idx.max() >= n):
            _fail(path, lineno, f"{key} index out of range [0, {n})")
        if np.unique(idx).size != idx.size:
            _fail(path, lineno, f"duplicate index within {key} split")
        for i in idx.tolist():
            if i in seen:
                _fail(path, lineno, f"index {i} appears in both {seen[i]} and {key}")
            seen[i] = key
        unlabeled = idx[labels[idx] == -1] if idx.size else idx
        if unlabeled.size:
            _fail(path, lineno, f"{key} index {int(unlabeled[0])} has no label (-1)")
        splits[key] = idx
    return splits


def resolve_dataset_path(name_or_path: str) -> str:
    """Locate a dataset directory.

    Tried in order: the argument itself as a directory, then
    ``$GRAPHPROP_DATA/<name>``, then ``./data/<name>``, then the datasets
    bundled with the package. Raises DataFormatError when nothing matches.
    """
    if os.path.isdir(name_or_path):
        return name_or_path
    tried = [name_or_path]
    env_root = os.environ.get("GRAPHPROP_DATA")
    candidates = []
    if env_root:
        candidates.append(os.path.join(env_root, name_or_path))
    candidates.append(os.path.join("data", name_or_path))
    candidates.append(os.path.join(os.path.dirname(__file__), "data", name_or_path))
    for cand in candidates:
        if os.path.isdir(cand):
            return cand
        tried.append(cand)
    raise DataFormatError(
        f"dataset {name_or_path!r} not found; tried: " + ", ".join(tried)
    )


def load_dataset(path: str) -> Dataset:
    """Load a dataset directory in the neutral text format."""
    if not os.path.isdir(path):
        raise DataFormatError(f"dataset directory not found: {path}")
    for fname in ("graph.txt", "features.txt", "labels.txt", "splits.txt"):
        if not os.path.isfile(os.path.join(path, fname)):
            raise DataFormatError(f"missing {fname} in {path}")
    g = _load_graph_file(os.path.join(path, "graph.txt"))
    features = _load_features_file(os.path.join(path, "features.txt"), g.n)
    labels, c = _load_labels_file(os.path.join(path, "labels.txt"), g.n)
    splits = _load_splits_file(os.path.join(path, "splits.txt"), g.n, labels)
    return Dataset(
        graph=g,
        features=features,
        labels=labels,
        num_classes=c,
        train_idx=splits["train"],
        val_idx=splits["val"],
        test_idx=splits["test"],
        name=os.path.basename(os.path.normpath(path)),
    )
