"""Per-iteration embedding updates and the losses they descend.

Three primitives:

- ``lgc_step``: lazy graph convolution [beta*P + (1-beta)*I]U with
  P = D~^(-1/2) A~ D~^(-1/2) — a gradient step of size beta/2 on the
  smoothing loss q_smo.
- ``igc_step``: lazy inverse graph convolution over a sampled negative
  graph — at beta=1 a half-step descent on the inverse quadratic q_igc,
  pushing unlinked nodes apart.
- ``seb_step``: supervised embedding correction U - eta * S(Z - Y) W^T,
  the gradient of the supervised loss with respect to U.

``compute_losses`` evaluates all quadratic forms as sums over sparse edges
(nothing is densified).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classify import LabelData, LinearModel, supervised_loss, supervised_residual
from .graph import NegativeGraph, PropagationOperator, SparseGraph, spmm
from .kernels import lazy_spmm


@dataclass(frozen=True)
class LossBreakdown:
    """Loss components; q_smo/q_sharp/q_igc are PSD quadratic forms (>= 0)."""

    q_sup: float
    q_smo: float
    q_sharp: float
    q_igc: float


@dataclass
class LgcConfig:
    """Lazy-convolution parameters: moving probability ``beta`` in (0, 1]
    and a per-iteration multiplier ``decay`` in (0, 1]."""

    beta: float = 0.5
    decay: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"beta must be in (0, 1], got {self.beta}")
        if not 0.0 < self.decay <= 1.0:
            raise ValueError(f"decay must be in (0, 1], got {self.decay}")


def _check_rows(u: np.ndarray, n: int, what: str):
    if u.ndim != 2 or u.shape[0] != n:
        raise ValueError(f"{what}: embedding must be ({n}, d), got {u.shape}")


def lgc_step(op: PropagationOperator, u: np.ndarray, beta: float) -> np.ndarray:
    """beta * (P @ u) + (1 - beta) * u."""
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must be in (0, 1], got {beta}")
    u = np.ascontiguousarray(u, dtype=np.float64)
    _check_rows(u, op.n, "lgc_step")
    return lazy_spmm(op.csr.indptr, op.csr.indices, op.csr.data, u, beta)


def igc_step(ng: NegativeGraph, u: np.ndarray, beta: float) -> np.ndarray:
    """beta * (igc_op @ u) + (1 - beta) * u."""
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must be in (0, 1], got {beta}")
    u = np.ascontiguousarray(u, dtype=np.float64)
    _check_rows(u, ng.n, "igc_step")
    csr = ng.igc_csr
    return lazy_spmm(csr.indptr, csr.indices, csr.data, u, beta)


def seb_step(
    u: np.ndarray,
    model: LinearModel,
    labels: LabelData,
    eta_sup: float,
    selector: str = "train",
) -> np.ndarray:
    """u - eta_sup * S(Z - Y) W^T with S restricted to ``selector`` rows."""
    u = np.ascontiguousarray(u, dtype=np.float64)
    if model.w.shape[0] != u.shape[1]:
        raise ValueError(f"seb_step: W is {model.w.shape}, embeddings are {u.shape}")
    rows = labels.selector(selector)
    out = u.copy()
    if rows.size == 0 or eta_sup == 0.0:
        return out
    resid = supervised_residual(model, u, labels, rows)
    out[rows] -= eta_sup * (resid @ model.w.T)
    return out


def _edge_quadratic(u: np.ndarray, pairs, scale: np.ndarray, sign: float) -> float:
    """sum over edges (i, j) of || u_i*scale_i + sign * u_j*scale_j ||^2."""
    ui, vj = pairs
    if ui.size == 0:
        return 0.0
    left = u[ui] * scale[ui, None]
    right = u[vj] * scale[vj, None]
    diff = left + sign * right
    return float(np.sum(diff * diff))


def compute_losses(
    u: np.ndarray,
    op: PropagationOperator,
    ng: NegativeGraph | None = None,
    model: LinearModel | None = None,
    labels: LabelData | None = None,
    selector: str = "train_val",
) -> LossBreakdown:
    """Evaluate the loss components available from the supplied pieces.

    - q_smo: tr(U^T D~^(-1/2) L~ D~^(-1/2) U) over the operator's graph
      (self-loop degrees), as the edge sum
      sum_(i,j) ||u_i/sqrt(d_i+1) - u_j/sqrt(d_j+1)||^2.
    - q_sharp: the same form on the negative graph with its raw degrees.
    - q_igc: signless form sum_(i,j) ||u_i/sqrt(x_i+2) + u_j/sqrt(x_j+2)||^2
      over negative edges (x = negative degree).
    - q_sup: supervised loss of ``model`` summed over ``selector`` rows.

    Components without their inputs are reported as 0.
    """
    u = np.ascontiguousarray(u, dtype=np.float64)
    graph = op.graph
    _check_rows(u, graph.n, "compute_losses")
    inv_smo = 1.0 / np.sqrt(graph.degrees.astype(np.float64) + 1.0)
    q_smo = _edge_quadratic(u, graph.edge_pairs, inv_smo, -1.0)
    q_sharp = 0.0
    q_igc = 0.0
    if ng is not None:
        neg = ng.graph
        with np.errstate(divide="ignore"):
            inv_neg = 1.0 / np.sqrt(neg.degrees.astype(np.float64))
        inv_neg[neg.degrees == 0] = 0.0  # no incident edges -> no terms
        q_sharp = _edge_quadratic(u, neg.edge_pairs, inv_neg, -1.0)
        inv_tilde = 1.0 / np.sqrt(neg.degrees.astype(np.float64) + 2.0)
        q_igc = _edge_quadratic(u, neg.edge_pairs, inv_tilde, +1.0)
    q_sup = 0.0
    if model is not None and labels is not None:
        q_sup = supervised_loss(model, u, labels, labels.selector(selector))
    return LossBreakdown(q_sup=q_sup, q_smo=q_smo, q_sharp=q_sharp, q_igc=q_igc)


def oversmoothing_indicator(u: np.ndarray, g: SparseGraph) -> float:
    """Sum over nodes of cosine distance to the mean embedding of the node's
    degree class. Zero-norm rows: distance 0 to a zero mean, 1 otherwise
    (and symmetrically for a zero mean with a nonzero row)."""
    u = np.ascontiguousarray(u, dtype=np.float64)
    _check_rows(u, g.n, "oversmoothing_indicator")
    total = 0.0
    for deg in np.unique(g.degrees):
        rows = np.nonzero(g.degrees == deg)[0]
        block = u[rows]
        mean = block.mean(axis=0)
        mean_norm = float(np.linalg.norm(mean))
        norms = np.linalg.norm(block, axis=1)
        if mean_norm == 0.0:
            total += float(np.sum(norms > 0.0))
            continue
        cos = np.zeros(rows.size)
        nz = norms > 0.0
        cos[nz] = (block[nz] @ mean) / (norms[nz] * mean_norm)
        dist = 1.0 - cos
        dist[~nz] = 1.0
        total += float(np.sum(dist))
    return total


def propagation_matrix_dense(op: PropagationOperator) -> np.ndarray:
    """Dense copy of the propagation operator (diagnostics on small graphs)."""
    return op.csr.to_dense()


def smoothing_laplacian_dense(op: PropagationOperator) -> np.ndarray:
    """Dense I - P, the renormalized Laplacian the smoothing loss contracts."""
    n = op.n
    return np.eye(n) - op.csr.to_dense()


def igc_matrix_dense(ng: NegativeGraph) -> np.ndarray:
    """Dense copy of the inverse-convolution operator."""
    return ng.igc_csr.to_dense()


def spmm_propagate(op: PropagationOperator, u: np.ndarray) -> np.ndarray:
    """Plain convolution P @ u (beta = 1 step without the lazy blend)."""
    return spmm(op.csr, u)
