"""Dense-matrix kernels, eigensolvers, and spectral-radius estimation.

Matrices are plain 2-D float64 numpy arrays, row-major. All operations are
pure, single-threaded, and use a fixed reduction order so repeated runs are
bit-stable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import jacobi_eigh
from .rng import Pcg32

MAX_EIGEN_DIM = 4096
SYMMETRY_TOL = 1e-10


def ensure_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate/coerce a 2-D float64 array."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    return arr


def matmul(a, b) -> np.ndarray:
    """Dense product with shape checking (row-major accumulation)."""
    a = ensure_matrix(a, "a")
    b = ensure_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul dimension mismatch: {a.shape} x {b.shape}")
    return a @ b


def row_softmax(z) -> np.ndarray:
    """Row-wise softmax with per-row max subtraction for overflow safety."""
    z = ensure_matrix(z, "z")
    if z.size == 0:
        return z.copy()
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class EigenReport:
    """Full symmetric spectrum: ascending eigenvalues, eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None


def symmetric_eigen(m, want_vectors: bool = True) -> EigenReport:
    """Full spectrum of a symmetric matrix via Jacobi rotations.

    Requires square input, symmetric within 1e-10 per entry, size at most
    ``MAX_EIGEN_DIM`` (spectral checks only run on small graphs).
    """
    m = ensure_matrix(m, "m")
    n, nc = m.shape
    if n != nc:
        raise ValueError(f"symmetric_eigen needs a square matrix, got {m.shape}")
    if n > MAX_EIGEN_DIM:
        raise ValueError(f"symmetric_eigen capped at {MAX_EIGEN_DIM}, got n={n}")
    if n and np.max(np.abs(m - m.T)) > SYMMETRY_TOL:
        raise ValueError("matrix is not symmetric within 1e-10")
    sym = 0.5 * (m + m.T)  # exact symmetry for the rotation loop
    w, v, converged = jacobi_eigh(sym, want_vectors, tol=1e-13, max_sweeps=60)
    if not converged:
        raise RuntimeError("Jacobi eigensolver did not converge")
    return EigenReport(eigenvalues=w, eigenvectors=v)


def power_iteration_radius(apply, dim: int, iters: int = 10000, tol: float = 1e-12) -> float:
    """Dominant |eigenvalue| of a symmetric linear operator.

    ``apply`` maps a length-``dim`` vector to another. The estimate is
    sigma_k = ||A v_k||_2 for the normalized iterate v_k — the square root of
    the Rayleigh quotient of A**2 — which converges to max|lambda| even when
    +r and -r are both eigenvalues (a plain Rayleigh quotient of A stalls at
    a wrong interior value there). Converged when successive estimates agree
    within ``tol``; restarts with a fresh random vector if the iterate lands
    in the null space, erroring after 5 restarts.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = Pcg32(seed=0x9E3779B9, stream=dim)
    for _ in range(5):
        v = np.array([rng.uniform(-1.0, 1.0) for _ in range(dim)])
        norm = float(np.linalg.norm(v))
        if norm == 0.0:
            continue
        v /= norm
        prev = None
        for _ in range(iters):
            av = np.asarray(apply(v), dtype=np.float64).reshape(dim)
            sigma = float(np.linalg.norm(av))
            if sigma == 0.0:
                prev = None
                break  # null-space start; restart with a new vector
            if prev is not None and abs(sigma - prev) < tol * max(1.0, sigma):
                return sigma
            prev = sigma
            v = av / sigma
        if prev is not None:
            return prev
    raise RuntimeError("power iteration failed: start vectors kept collapsing to zero")
