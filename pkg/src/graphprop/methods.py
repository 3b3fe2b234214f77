"""End-to-end propagation drivers.

- ``run_ogc``: supervised. Alternates a linear-model gradient step with a
  joint embedding update: lazy graph convolution plus the supervised
  embedding correction, both gradients taken at the current iterate.
  Stops early when consecutive predictions agree.
- ``run_ggc``: unsupervised. Averages a lazy-convolution step and a lazy
  inverse-convolution step (fresh negative graph per iteration by default),
  decaying beta.
- ``run_ggcm``: multi-scale variant; the smoothing chain advances while a
  running average of (smooth + sharp)/2 terms is blended with the input
  features: U_M(k) = alpha*X + (1-alpha)*(1/k) * sum_t (U_smo+U_sharp)/2.
- ``run_sgc`` / ``run_s2gc``: plain k-step convolution, and its
  alpha-blended running average.

Every run is deterministic given (dataset, config): randomness flows only
from ``MethodConfig.seed`` through the in-repo generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .classify import LabelData, LinearModel, gradient_step_w, supervised_residual
from .graph import (
    Dataset,
    NegativeGraph,
    build_propagation_operator,
    sample_negative_graph,
    spmm,
)
from .operators import LgcConfig, LossBreakdown, compute_losses, lgc_step, igc_step
from .rng import Pcg32

DEFAULT_NEG_MULTIPLIER = 20

SnapshotSpec = Literal["last", "all"] | tuple[int, ...]


class NumericalDivergenceError(RuntimeError):
    """A method produced non-finite values (learning rate too large)."""


@dataclass
class MethodConfig:
    """Shared hyper-parameters for all drivers.

    ``neg_edges=None`` resolves to 20x the input edge count (stable region
    of the negative-budget sensitivity sweep). ``snapshots`` controls which
    iterations keep a dense embedding in the trace ("last", "all", or an
    explicit tuple of iteration numbers); all other per-iteration records
    are always kept. ``igc_input`` picks the inverse-convolution input in
    the multi-scale driver: "previous" = the chained U^(k-1) (default),
    "smoothed" = the freshly smoothed U_smo^(k).
    """

    max_iters: int = 64
    lgc: LgcConfig = field(default_factory=LgcConfig)
    eta_sup: float = 0.25
    eta_w: float = 0.5
    alpha: float = 0.1
    neg_edges: int | None = None
    loss_kind: str = "squared"
    lim: bool = True
    seed: int = 0
    freeze_negative: bool = False
    igc_input: str = "previous"
    snapshots: SnapshotSpec = "last"
    record_losses: bool = True

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.eta_sup < 0 or self.eta_w < 0:
            raise ValueError("learning rates must be >= 0")
        if self.loss_kind not in ("squared", "cross-entropy"):
            raise ValueError(f"unknown loss_kind {self.loss_kind!r}")
        if self.igc_input not in ("previous", "smoothed"):
            raise ValueError(f"igc_input must be 'previous' or 'smoothed', got {self.igc_input!r}")
        if self.neg_edges is not None and self.neg_edges < 0:
            raise ValueError("neg_edges must be >= 0")

    @classmethod
    def for_method(cls, method: str, **overrides) -> "MethodConfig":
        """Per-method defaults: beta 0.5/no decay for the supervised driver,
        beta 0.7/decay 0.9 for the unsupervised ones."""
        base: dict = {}
        if method in ("ggc", "ggcm"):
            base["lgc"] = LgcConfig(beta=0.7, decay=0.9)
        elif method in ("ogc", "sgc", "s2gc"):
            base["lgc"] = LgcConfig(beta=0.5, decay=1.0)
        else:
            raise ValueError(f"unknown method {method!r}")
        if "lgc" in overrides:
            base["lgc"] = overrides.pop("lgc")
        return cls(**base, **overrides)

    def resolve_neg_edges(self, ds: Dataset) -> int:
        if self.neg_edges is not None:
            return self.neg_edges
        g = ds.graph
        free = g.n * (g.n - 1) // 2 - g.num_edges
        # the default budget clamps to the complement size so small graphs
        # stay runnable; an explicit ``neg_edges`` is taken literally
        return min(DEFAULT_NEG_MULTIPLIER * g.num_edges, free)


@dataclass
class IterRecord:
    """One iteration of a trace; ``embedding`` is populated only for
    iterations selected by the snapshot policy."""

    k: int
    beta: float
    losses: LossBreakdown | None = None
    predictions: np.ndarray | None = None
    val_acc: float | None = None
    test_acc: float | None = None
    embedding: np.ndarray | None = None


@dataclass
class IterationTrace:
    method: str
    config: MethodConfig
    records: list[IterRecord]
    final_embedding: np.ndarray

    def embedding_at(self, k: int) -> np.ndarray:
        rec = self.records[k]
        if rec.k != k:
            raise IndexError(f"trace records out of order at {k}")
        if rec.embedding is None:
            raise KeyError(
                f"no embedding snapshot stored for iteration {k}; "
                f"set MethodConfig.snapshots to include it"
            )
        return rec.embedding

    def predictions_at(self, k: int) -> np.ndarray:
        rec = self.records[k]
        if rec.predictions is None:
            raise KeyError(f"no predictions at iteration {k}")
        return rec.predictions

    def best_val_iteration(self) -> int:
        """Iteration with the best recorded validation accuracy (ties ->
        earliest); requires a supervised trace."""
        best_k, best = None, -1.0
        for rec in self.records:
            if rec.val_acc is not None and rec.val_acc > best:
                best_k, best = rec.k, rec.val_acc
        if best_k is None:
            raise ValueError("trace has no recorded validation accuracy")
        return best_k


def _wants_snapshot(spec: SnapshotSpec, k: int, last: int) -> bool:
    if spec == "all":
        return True
    if spec == "last":
        return k == last or k == 0
    return k in spec or k == 0


def _check_finite(u: np.ndarray, what: str, k: int):
    if not np.all(np.isfinite(u)):
        raise NumericalDivergenceError(f"{what} became non-finite at iteration {k}")


def run_ogc(ds: Dataset, cfg: MethodConfig | None = None) -> IterationTrace:
    """Supervised propagation (alternating W and U updates).

    Per iteration: (a) one gradient step on W over the train+val rows;
    (b) U <- lazy_convolution(U) - eta_sup * S(Z - Y) W^T with Z, the
    residual, and the convolution all read from the pre-step U (one joint
    gradient step on the two losses), S restricted to train rows when
    ``lim`` is on; (c) predictions from the fresh U and W. Stops when
    consecutive predictions are identical or at max_iters.
    """
    cfg = cfg if cfg is not None else MethodConfig.for_method("ogc")
    if ds.train_idx.size == 0:
        raise ValueError("train split is empty")
    op = build_propagation_operator(ds.graph)
    labels = LabelData.from_dataset(ds)
    u = ds.features_dense().copy()
    d, c = u.shape[1], ds.num_classes
    model = LinearModel(w=np.zeros((d, c)), loss_kind=cfg.loss_kind)
    seb_selector = "train" if cfg.lim else "train_val"
    seb_rows = labels.selector(seb_selector)
    w_selector = "train_val"
    beta = cfg.lgc.beta

    records = [
        IterRecord(
            k=0,
            beta=beta,
            losses=_maybe_losses(cfg, u, op, None, model, labels),
            predictions=model.predict(u),
            val_acc=_split_acc(model, u, labels, "val"),
            test_acc=_split_acc(model, u, labels, "test"),
            embedding=u.copy() if _wants_snapshot(cfg.snapshots, 0, cfg.max_iters) else None,
        )
    ]
    prev_pred: np.ndarray | None = None
    for k in range(1, cfg.max_iters + 1):
        try:
            model = gradient_step_w(model, u, labels, w_selector, cfg.eta_w)
        except FloatingPointError as exc:
            raise NumericalDivergenceError(f"W update diverged at iteration {k}") from exc
        resid = supervised_residual(model, u, labels, seb_rows)
        u_next = lgc_step(op, u, beta)
        if resid.size:
            u_next[seb_rows] -= cfg.eta_sup * (resid @ model.w.T)
        u = u_next
        _check_finite(u, "embedding", k)
        beta *= cfg.lgc.decay

        pred = model.predict(u)
        rec = IterRecord(
            k=k,
            beta=beta,
            losses=_maybe_losses(cfg, u, op, None, model, labels),
            predictions=pred,
            val_acc=_split_acc(model, u, labels, "val"),
            test_acc=_split_acc(model, u, labels, "test"),
            embedding=u.copy() if _wants_snapshot(cfg.snapshots, k, cfg.max_iters) else None,
        )
        records.append(rec)
        if prev_pred is not None and np.array_equal(pred, prev_pred):
            break
        prev_pred = pred
    return IterationTrace(method="ogc", config=cfg, records=records, final_embedding=u)


def _maybe_losses(cfg, u, op, ng, model, labels) -> LossBreakdown | None:
    if not cfg.record_losses:
        return None
    return compute_losses(u, op, ng=ng, model=model, labels=labels)


def _split_acc(model: LinearModel, u: np.ndarray, labels: LabelData, split: str) -> float | None:
    rows = labels.selector(split)
    if rows.size == 0:
        return None
    pred = model.predict(u[rows])
    return float(np.mean(pred == labels.labels[rows]))


def _unsupervised_trace(ds: Dataset, cfg: MethodConfig, method: str) -> IterationTrace:
    """Shared driver for the two unsupervised methods (see run_ggc/run_ggcm)."""
    op = build_propagation_operator(ds.graph)
    x = ds.features_dense()
    u = x.copy()
    rng = Pcg32(cfg.seed)
    target = cfg.resolve_neg_edges(ds)
    frozen_ng: NegativeGraph | None = None
    if cfg.freeze_negative:
        frozen_ng = sample_negative_graph(ds.graph, target, rng)
    beta = cfg.lgc.beta
    multiscale = method == "ggcm"
    accum = np.zeros_like(u) if multiscale else None

    records = [
        IterRecord(
            k=0,
            beta=beta,
            losses=_maybe_losses(cfg, u, op, frozen_ng, None, None),
            embedding=u.copy() if _wants_snapshot(cfg.snapshots, 0, cfg.max_iters) else None,
        )
    ]
    out = u
    for k in range(1, cfg.max_iters + 1):
        ng = frozen_ng if frozen_ng is not None else sample_negative_graph(ds.graph, target, rng)
        u_smo = lgc_step(op, u, beta)
        igc_src = u_smo if (multiscale and cfg.igc_input == "smoothed") else u
        u_sharp = igc_step(ng, igc_src, beta)
        if multiscale:
            accum += 0.5 * (u_smo + u_sharp)
            out = cfg.alpha * x + (1.0 - cfg.alpha) * (accum / k)
            u = u_smo
        else:
            u = 0.5 * (u_smo + u_sharp)
            out = u
        _check_finite(out, "embedding", k)
        beta *= cfg.lgc.decay
        records.append(
            IterRecord(
                k=k,
                beta=beta,
                losses=_maybe_losses(cfg, out, op, ng, None, None),
                embedding=out.copy() if _wants_snapshot(cfg.snapshots, k, cfg.max_iters) else None,
            )
        )
    return IterationTrace(method=method, config=cfg, records=records, final_embedding=out)


def run_ggc(ds: Dataset, cfg: MethodConfig | None = None) -> IterationTrace:
    """Unsupervised propagation balancing smoothing against the inverse
    (sharpening) step: U <- (lazy_conv(U) + lazy_igc(U)) / 2 each iteration,
    beta decaying, negative graph resampled fresh unless frozen."""
    cfg = cfg if cfg is not None else MethodConfig.for_method("ggc")
    return _unsupervised_trace(ds, cfg, "ggc")


def run_ggcm(ds: Dataset, cfg: MethodConfig | None = None) -> IterationTrace:
    """Multi-scale unsupervised propagation; see module docstring for the
    running-average form."""
    cfg = cfg if cfg is not None else MethodConfig.for_method("ggcm")
    return _unsupervised_trace(ds, cfg, "ggcm")


def propagate_chain(op, u0: np.ndarray, k: int, collect: tuple[int, ...] = ()) -> dict[int, np.ndarray]:
    """op^t @ u0 for t = 1..k, returning {t: embedding} for requested t
    (always includes k). Shared by the plain-convolution baselines."""
    u = np.ascontiguousarray(u0, dtype=np.float64)
    wanted = set(collect) | {k}
    out: dict[int, np.ndarray] = {}
    if 0 in wanted:
        out[0] = u.copy()
    for t in range(1, k + 1):
        u = spmm(op.csr, u)
        if t in wanted:
            out[t] = u.copy()
    return out


def run_sgc(ds: Dataset, k: int) -> np.ndarray:
    """k plain convolution steps applied to the features."""
    if k < 0:
        raise ValueError("k must be >= 0")
    x = ds.features_dense().copy()
    if k == 0:
        return x
    op = build_propagation_operator(ds.graph)
    return propagate_chain(op, x, k)[k]


def run_s2gc(ds: Dataset, k: int, alpha: float) -> np.ndarray:
    """Running average over propagation depths:
    (1/k) * sum_{t=1..k} [alpha*X + (1-alpha) * op^t X]."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    x = ds.features_dense().copy()
    op = build_propagation_operator(ds.graph)
    u = x.copy()
    accum = np.zeros_like(x)
    for _ in range(k):
        u = spmm(op.csr, u)
        accum += u
    return alpha * x + (1.0 - alpha) * (accum / k)


METHOD_NAMES = ("ogc", "ggc", "ggcm", "sgc", "s2gc")


def run_method(ds: Dataset, method: str, cfg: MethodConfig, k: int | None = None):
    """Uniform dispatch used by the command-line driver.

    Returns an IterationTrace for the iterative methods and a plain
    embedding matrix for the single-shot baselines.
    """
    if method == "ogc":
        return run_ogc(ds, cfg)
    if method == "ggc":
        return run_ggc(ds, cfg)
    if method == "ggcm":
        return run_ggcm(ds, cfg)
    if method == "sgc":
        return run_sgc(ds, cfg.max_iters if k is None else k)
    if method == "s2gc":
        return run_s2gc(ds, cfg.max_iters if k is None else k, cfg.alpha)
    raise ValueError(f"unknown method {method!r}; expected one of {METHOD_NAMES}")
