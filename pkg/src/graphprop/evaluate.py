"""Experiment protocols: graph reconstruction from structure-only
embeddings, spectral verification of the inverse-convolution filter, depth
studies, and the degree-law convergence check on the bundled karate graph."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .classify import AdamState, LabelData, train_logreg
from .graph import (
    CsrMatrix,
    Dataset,
    NegativeGraph,
    SparseGraph,
    build_propagation_operator,
    spmm,
)
from .methods import (
    MethodConfig,
    propagate_chain,
    run_ggc,
    run_ggcm,
    run_ogc,
    run_s2gc,
)
from .numerics import symmetric_eigen
from .rng import Pcg32, splitmix64

RECONSTRUCT_MAX_NODES = 25000
_DISTANCE_BLOCK = 256


@dataclass(frozen=True)
class ReconstructionReport:
    """Per-node neighbor-retrieval precision and its mean."""

    method: str
    k: int
    per_node_precision: np.ndarray
    mean_accuracy: float


@dataclass(frozen=True)
class SpectralReport:
    """Spectrum-side view of the inverse convolution on one negative graph.

    ``lambdas`` are frequencies of the renormalized eigenmodes measured on
    the negative graph's normalized Laplacian (Rayleigh quotients, so the
    pairing is exact on regular graphs); ``exact_response`` is the operator's
    eigenvalue on each mode; ``approx_response`` the linear high-pass curve
    (2 - xi + xi*lambda) / (xi + 2) at xi = mean negative degree.
    """

    lambdas: np.ndarray
    exact_response: np.ndarray
    approx_response: np.ndarray
    xi_bar: float
    lambda_max: float
    bound: float


@dataclass(frozen=True)
class KarateReport:
    """Degree-law convergence evidence after k plain convolutions."""

    seed: int
    k: int
    degrees: np.ndarray
    components: np.ndarray
    embeddings: np.ndarray
    max_ratio_residual: float
    max_same_degree_diff: float


def identity_dataset(g: SparseGraph, name: str = "identity") -> Dataset:
    """Structure-only dataset: features = I_n, no labels or splits."""
    n = g.n
    eye = CsrMatrix(
        shape=(n, n),
        indptr=np.arange(n + 1, dtype=np.int64),
        indices=np.arange(n, dtype=np.int64),
        data=np.ones(n, dtype=np.float64),
    )
    empty = np.empty(0, dtype=np.int64)
    return Dataset(
        graph=g,
        features=eye,
        labels=np.full(n, -1, dtype=np.int64),
        num_classes=1,
        train_idx=empty,
        val_idx=empty,
        test_idx=empty,
        name=name,
    )


def _structure_embedding(g: SparseGraph, method: str, k: int, cfg: MethodConfig):
    ds = identity_dataset(g)
    if method in ("sgc", "s2gc"):
        # Plain-convolution chains never materialize the identity densely:
        # the embedding stays a sparse power of the operator.
        import scipy.sparse as sp

        if method == "s2gc" and k < 1:
            raise ValueError("k must be >= 1")
        p = build_propagation_operator(g).csr.to_scipy()
        u = sp.identity(g.n, dtype=np.float64, format="csr")
        accum = None
        for _ in range(k):
            u = (p @ u).tocsr()
            if method == "s2gc":
                accum = u.copy() if accum is None else accum + u
        if method == "sgc":
            return u
        blend = sp.identity(g.n, dtype=np.float64, format="csr") * cfg.alpha
        return (blend + (1.0 - cfg.alpha) * (accum / k)).tocsr()
    if method in ("ggc", "ggcm"):
        if k == 0:
            return ds.features_dense().copy()
        run_cfg = replace(cfg, max_iters=k, snapshots="last", record_losses=False)
        runner = run_ggc if method == "ggc" else run_ggcm
        return runner(ds, run_cfg).final_embedding
    raise ValueError(f"unknown reconstruction method {method!r}")


def rank_neighbors(u, g: SparseGraph) -> np.ndarray:
    """Per-node precision of predicting the deg(i) nearest rows (Euclidean,
    self excluded, distance ties to the lower node id) as neighbors.

    Accepts a dense array or a scipy sparse matrix of embedding rows."""
    n = g.n
    sparse_input = not isinstance(u, np.ndarray)
    if sparse_input:
        sq_norms = np.asarray(u.multiply(u).sum(axis=1)).ravel()
    else:
        sq_norms = np.sum(u * u, axis=1)
    precision = np.ones(n, dtype=np.float64)  # isolated nodes score 1.0
    for start in range(0, n, _DISTANCE_BLOCK):
        stop = min(start + _DISTANCE_BLOCK, n)
        if sparse_input:
            block = u[start:stop].toarray()
            cross = np.asarray((u @ block.T).T)
        else:
            block = u[start:stop]
            cross = block @ u.T
        d2 = sq_norms[start:stop, None] + sq_norms[None, :] - 2.0 * cross
        for row, i in enumerate(range(start, stop)):
            deg = int(g.degrees[i])
            if deg == 0:
                continue
            dist = d2[row].copy()
            dist[i] = np.inf  # rank all *other* nodes
            # stable sort: equal distances resolve to the lower node id
            predicted = np.argsort(dist, kind="stable")[:deg]
            actual = g.neighbors(i)
            hits = np.isin(predicted, actual, assume_unique=True).sum()
            precision[i] = hits / deg
    return precision


def graph_reconstruction(
    g: SparseGraph, method: str, k: int, cfg: MethodConfig | None = None
) -> ReconstructionReport:
    """Embed the graph from identity features with the chosen method at
    depth k, then score neighbor retrieval (mean per-node precision)."""
    if g.n > RECONSTRUCT_MAX_NODES:
        raise ValueError(
            f"reconstruction capped at {RECONSTRUCT_MAX_NODES} nodes (pairwise distances); got {g.n}"
        )
    cfg = cfg if cfg is not None else MethodConfig.for_method(method)
    u = _structure_embedding(g, method, k, cfg)
    precision = rank_neighbors(u, g)
    return ReconstructionReport(
        method=method,
        k=k,
        per_node_precision=precision,
        mean_accuracy=float(precision.mean()),
    )


def _negative_normalized_laplacian(ng: NegativeGraph) -> np.ndarray:
    """Dense normalized Laplacian of the negative adjacency; rows of
    negative-degree 0 take the all-zero convention (frequency 0)."""
    neg = ng.graph
    deg = neg.degrees.astype(np.float64)
    with np.errstate(divide="ignore"):
        inv_sqrt = 1.0 / np.sqrt(deg)
    inv_sqrt[deg == 0] = 0.0
    adj = neg_adjacency_dense(ng)
    lap = -(inv_sqrt[:, None] * adj * inv_sqrt[None, :])
    np.fill_diagonal(lap, np.where(deg > 0, 1.0, 0.0))
    return lap


def neg_adjacency_dense(ng: NegativeGraph) -> np.ndarray:
    return ng.neg_csr.to_dense()


def verify_igc_filter(ng: NegativeGraph) -> SpectralReport:
    """Eigendecompose the renormalized inverse Laplacian I - igc_op and pair
    each mode's exact operator response with its frequency and the linear
    approximation; also populate the largest-eigenvalue bound
    2 - 4/(2 + max negative degree)."""
    igc_dense = ng.igc_csr.to_dense()
    n = ng.n
    m_lap = np.eye(n) - igc_dense
    report = symmetric_eigen(m_lap, want_vectors=True)
    mu = report.eigenvalues
    q = report.eigenvectors
    exact = 1.0 - mu
    neg_lap = _negative_normalized_laplacian(ng)
    lambdas = np.einsum("ij,ij->j", q, neg_lap @ q)
    deg = ng.neg_degrees.astype(np.float64)
    xi_bar = float(deg.mean())
    approx = (2.0 - xi_bar + xi_bar * lambdas) / (xi_bar + 2.0)
    bound = 2.0 - 4.0 / (2.0 + float(deg.max()))
    return SpectralReport(
        lambdas=lambdas,
        exact_response=exact,
        approx_response=approx,
        xi_bar=xi_bar,
        lambda_max=float(mu[-1]),
        bound=bound,
    )


def _logreg_rng(seed: int, k: int) -> Pcg32:
    return Pcg32(seed=splitmix64((seed & 0xFFFFFFFFFFFFFFFF) ^ splitmix64(k + 1)))


def evaluate_embedding(
    emb: np.ndarray, labels: LabelData, seed: int, k: int = 0
) -> tuple[float, float]:
    """Train the logistic evaluator on an embedding; (val, test) accuracy."""
    model = train_logreg(emb, labels, epochs=100, adam=AdamState(), rng=_logreg_rng(seed, k))
    val = test = 0.0
    if labels.val_idx.size:
        pred = model.predict(emb[labels.val_idx])
        val = float(np.mean(pred == labels.labels[labels.val_idx]))
    if labels.test_idx.size:
        pred = model.predict(emb[labels.test_idx])
        test = float(np.mean(pred == labels.labels[labels.test_idx]))
    return val, test


def depth_study(
    ds: Dataset, method: str, ks: list[int], cfg: MethodConfig | None = None
) -> list[tuple[int, float]]:
    """Test accuracy at each requested propagation depth, from one run.

    The supervised driver reads its own per-iteration predictions; the
    unsupervised/baseline methods train a fresh logistic evaluator per
    depth (deterministically re-seeded from cfg.seed and k).
    """
    cfg = cfg if cfg is not None else MethodConfig.for_method(method)
    if list(ks) != sorted(ks) or len(set(ks)) != len(ks):
        raise ValueError("ks must be strictly ascending")
    if not ks:
        return []
    if ks[-1] > cfg.max_iters:
        raise ValueError(f"max requested depth {ks[-1]} exceeds max_iters {cfg.max_iters}")
    if min(ks) < 0:
        raise ValueError("depths must be >= 0")
    if ds.test_idx.size == 0:
        raise ValueError("depth study needs a non-empty test split")
    labels = LabelData.from_dataset(ds)
    out: list[tuple[int, float]] = []
    if method == "ogc":
        trace = run_ogc(ds, cfg)
        last = trace.records[-1].k
        for k in ks:
            rec = trace.records[min(k, last)]  # converged early => stable tail
            out.append((k, float(rec.test_acc)))
        return out
    if method == "sgc":
        op = build_propagation_operator(ds.graph)
        chain = propagate_chain(op, ds.features_dense(), ks[-1], collect=tuple(ks))
        for k in ks:
            _, test = evaluate_embedding(chain[k], labels, cfg.seed, k)
            out.append((k, test))
        return out
    if method == "s2gc":
        op = build_propagation_operator(ds.graph)
        x = ds.features_dense()
        u = x.copy()
        accum = np.zeros_like(x)
        wanted = set(ks)
        if 0 in wanted:
            _, test = evaluate_embedding(x, labels, cfg.seed, 0)
            out.append((0, test))
        for t in range(1, ks[-1] + 1):
            u = spmm(op.csr, u)
            accum += u
            if t in wanted:
                emb = cfg.alpha * x + (1.0 - cfg.alpha) * (accum / t)
                _, test = evaluate_embedding(emb, labels, cfg.seed, t)
                out.append((t, test))
        return out
    if method in ("ggc", "ggcm"):
        if ks[-1] == 0:
            _, test = evaluate_embedding(ds.features_dense(), labels, cfg.seed, 0)
            return [(0, test)]
        run_cfg = replace(cfg, max_iters=ks[-1], snapshots=tuple(ks), record_losses=False)
        trace = run_ggc(ds, run_cfg) if method == "ggc" else run_ggcm(ds, run_cfg)
        for k in ks:
            _, test = evaluate_embedding(trace.embedding_at(k), labels, cfg.seed, k)
            out.append((k, test))
        return out
    raise ValueError(f"unknown method {method!r}")


def karate_verification(seed: int = 0, k: int = 512) -> KarateReport:
    """Propagate seeded 2-d uniform features k times on the bundled karate
    graph and report how closely embeddings follow the degree law
    U_i * sqrt(D_jj + 1) = U_j * sqrt(D_ii + 1) within components."""
    from .graph import load_dataset, resolve_dataset_path

    ds = load_dataset(resolve_dataset_path("karate"))
    g = ds.graph
    rng = Pcg32(seed)
    features = rng.uniform_matrix(g.n, 2)
    if k == 0:
        u = features
    else:
        op = build_propagation_operator(g)
        u = propagate_chain(op, features, k)[k]
    comp = g.components()
    scale = np.sqrt(g.degrees.astype(np.float64) + 1.0)
    norms = np.linalg.norm(u, axis=1)
    max_resid = 0.0
    max_same_degree = 0.0
    for i in range(g.n):
        same = comp == comp[i]
        cross = u[i][None, :] * scale[same, None] - u[same] * scale[i]
        resid = np.linalg.norm(cross, axis=1) / max(norms[i], 1e-12)
        max_resid = max(max_resid, float(resid.max()))
        same_deg = same & (g.degrees == g.degrees[i])
        diff = np.abs(u[same_deg] - u[i][None, :])
        if diff.size:
            max_same_degree = max(max_same_degree, float(diff.max()))
    return KarateReport(
        seed=seed,
        k=k,
        degrees=g.degrees.copy(),
        components=comp,
        embeddings=u,
        max_ratio_residual=max_resid,
        max_same_degree_diff=max_same_degree,
    )
