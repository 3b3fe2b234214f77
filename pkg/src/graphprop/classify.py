"""Linear classifiers: the propagation-internal linear model and the
Adam-trained logistic-regression evaluator for unsupervised embeddings."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .numerics import row_softmax
from .rng import Pcg32

LOSS_KINDS = ("squared", "cross-entropy")
SELECTORS = ("train", "val", "test", "train_val")


@dataclass
class LabelData:
    """One-hot label matrix plus split indices.

    ``y`` is n x c with one-hot rows for labeled nodes and zero rows for
    unlabeled ones; ``labels`` keeps the raw class ids (-1 = unlabeled).
    """

    y: np.ndarray
    labels: np.ndarray
    num_classes: int
    train_idx: np.ndarray
    val_idx: np.ndarray
    test_idx: np.ndarray

    @classmethod
    def from_dataset(cls, ds) -> "LabelData":
        n = ds.n
        y = np.zeros((n, ds.num_classes), dtype=np.float64)
        labeled = np.nonzero(ds.labels >= 0)[0]
        y[labeled, ds.labels[labeled]] = 1.0
        return cls(
            y=y,
            labels=ds.labels.astype(np.int64),
            num_classes=ds.num_classes,
            train_idx=np.asarray(ds.train_idx, dtype=np.int64),
            val_idx=np.asarray(ds.val_idx, dtype=np.int64),
            test_idx=np.asarray(ds.test_idx, dtype=np.int64),
        )

    def selector(self, which: str) -> np.ndarray:
        """Row indices selected by ``which`` (train/val/test/train_val)."""
        if which == "train":
            return self.train_idx
        if which == "val":
            return self.val_idx
        if which == "test":
            return self.test_idx
        if which == "train_val":
            return np.concatenate([self.train_idx, self.val_idx])
        raise ValueError(f"unknown selector {which!r}; expected one of {SELECTORS}")


@dataclass
class LinearModel:
    """d x c linear map; ``bias`` is used by the logistic evaluator only."""

    w: np.ndarray
    loss_kind: str = "squared"
    bias: np.ndarray | None = None

    def __post_init__(self):
        if self.loss_kind not in LOSS_KINDS:
            raise ValueError(f"loss_kind must be one of {LOSS_KINDS}, got {self.loss_kind!r}")

    def scores(self, u: np.ndarray) -> np.ndarray:
        """Raw linear scores UW (+ bias when present)."""
        z = u @ self.w
        if self.bias is not None:
            z = z + self.bias
        return z

    def outputs(self, u: np.ndarray) -> np.ndarray:
        """Z as the loss sees it: UW for squared loss, softmax(UW) for
        cross-entropy."""
        z = self.scores(u)
        return z if self.loss_kind == "squared" else row_softmax(z)

    def predict(self, u: np.ndarray) -> np.ndarray:
        """Per-row argmax class (ties go to the lowest class index)."""
        return np.argmax(self.scores(u), axis=1).astype(np.int64)


def supervised_residual(model: LinearModel, u: np.ndarray, labels: LabelData, rows: np.ndarray) -> np.ndarray:
    """(Z - Y) on the selected rows — the shared core of every supervised
    gradient: grad_W = U_S^T (Z - Y)_S and grad_U = S(Z - Y) W^T."""
    if rows.size == 0:
        return np.zeros((0, labels.num_classes), dtype=np.float64)
    return model.outputs(u[rows]) - labels.y[rows]


def supervised_loss(model: LinearModel, u: np.ndarray, labels: LabelData, rows: np.ndarray) -> float:
    """Q_sup summed over the selected rows (0.5*||Z-Y||^2 per row for squared
    loss; -sum Y log P for cross-entropy)."""
    if rows.size == 0:
        return 0.0
    z = model.scores(u[rows])
    y = labels.y[rows]
    if model.loss_kind == "squared":
        diff = z - y
        return 0.5 * float(np.sum(diff * diff))
    logp = z - z.max(axis=1, keepdims=True)
    logp = logp - np.log(np.sum(np.exp(logp), axis=1, keepdims=True))
    return -float(np.sum(y * logp))


def gradient_step_w(
    model: LinearModel, u: np.ndarray, labels: LabelData, selector: str, eta_w: float
) -> LinearModel:
    """One full-batch gradient step on Q_sup with respect to W."""
    rows = labels.selector(selector)
    resid = supervised_residual(model, u, labels, rows)
    grad = u[rows].T @ resid
    w = model.w - eta_w * grad
    if not np.all(np.isfinite(w)):
        raise FloatingPointError("gradient_step_w produced non-finite weights")
    return replace(model, w=w)


@dataclass
class AdamState:
    """Adam hyper-parameters and moment buffers (decoupled weight decay)."""

    lr: float = 0.2
    weight_decay: float = 1e-5
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m_w: np.ndarray | None = field(default=None, repr=False)
    v_w: np.ndarray | None = field(default=None, repr=False)
    m_b: np.ndarray | None = field(default=None, repr=False)
    v_b: np.ndarray | None = field(default=None, repr=False)

    def init_buffers(self, d: int, c: int):
        self.m_w = np.zeros((d, c))
        self.v_w = np.zeros((d, c))
        self.m_b = np.zeros(c)
        self.v_b = np.zeros(c)

    def update(self, grad_w: np.ndarray, grad_b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Bias-corrected Adam deltas for (W, b) given current gradients."""
        self.step += 1
        b1, b2 = self.beta1, self.beta2
        self.m_w = b1 * self.m_w + (1 - b1) * grad_w
        self.v_w = b2 * self.v_w + (1 - b2) * grad_w * grad_w
        self.m_b = b1 * self.m_b + (1 - b1) * grad_b
        self.v_b = b2 * self.v_b + (1 - b2) * grad_b * grad_b
        c1 = 1 - b1**self.step
        c2 = 1 - b2**self.step
        dw = self.lr * (self.m_w / c1) / (np.sqrt(self.v_w / c2) + self.eps)
        db = self.lr * (self.m_b / c1) / (np.sqrt(self.v_b / c2) + self.eps)
        return dw, db


def train_logreg(
    features: np.ndarray,
    labels: LabelData,
    epochs: int = 100,
    adam: AdamState | None = None,
    rng: Pcg32 | None = None,
) -> LinearModel:
    """Full-batch softmax regression trained with Adam.

    Minimizes mean cross-entropy over the train rows; decoupled weight decay
    applies to W (not the bias). Returns the parameters with the best
    validation accuracy across epochs (ties -> earliest epoch). Weights start
    uniform in [-1/sqrt(d), 1/sqrt(d)] from the seeded generator, bias at 0.
    """
    if labels.train_idx.size == 0:
        raise ValueError("train split is empty")
    adam = adam if adam is not None else AdamState()
    rng = rng if rng is not None else Pcg32(0)
    n, d = features.shape
    c = labels.num_classes
    bound = 1.0 / np.sqrt(d)
    w = rng.uniform_matrix(d, c, -bound, bound)
    b = np.zeros(c)
    adam.init_buffers(d, c)

    train = labels.train_idx
    x_train = features[train]
    y_train = labels.y[train]
    inv_batch = 1.0 / train.size

    def val_accuracy(model: LinearModel) -> float:
        if labels.val_idx.size == 0:
            return 0.0
        pred = model.predict(features[labels.val_idx])
        return float(np.mean(pred == labels.labels[labels.val_idx]))

    # The pre-training baseline candidate is the zero model (uniform scores),
    # not the random init: with epochs=0 the caller gets a predictable model.
    best = LinearModel(w=np.zeros_like(w), loss_kind="cross-entropy", bias=np.zeros(c))
    best_acc = val_accuracy(best)
    for _ in range(epochs):
        z = x_train @ w + b
        p = row_softmax(z)
        loss = -float(np.sum(y_train * np.log(np.maximum(p, 1e-300)))) * inv_batch
        if not np.isfinite(loss):
            raise FloatingPointError("logistic regression loss became non-finite")
        resid = (p - y_train) * inv_batch
        grad_w = x_train.T @ resid
        grad_b = resid.sum(axis=0)
        dw, db = adam.update(grad_w, grad_b)
        w = w - dw - adam.lr * adam.weight_decay * w
        b = b - db
        model = LinearModel(w=w, loss_kind="cross-entropy", bias=b)
        acc = val_accuracy(model)
        if acc > best_acc:
            best = LinearModel(w=w.copy(), loss_kind="cross-entropy", bias=b.copy())
            best_acc = acc
    return best


def evaluate_accuracy(model: LinearModel, features: np.ndarray, labels: LabelData, split: str) -> float:
    """Fraction of split nodes whose argmax score matches the label."""
    rows = labels.selector(split)
    if rows.size == 0:
        raise ValueError(f"split {split!r} is empty")
    pred = model.predict(features[rows])
    return float(np.mean(pred == labels.labels[rows]))
