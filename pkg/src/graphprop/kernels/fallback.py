"""numpy/scipy implementations of the hot kernels.

Every function here has a compiled twin in ``_ckern.pyx`` with identical
semantics; integer kernels (generator blocks, negative sampling) are
bit-identical across the two backends, float kernels use the same
accumulation order so results match bitwise in practice (tests enforce it).
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_MULT = np.uint64(6364136223846793005)

# Candidates per stall-accounting window in negative-edge sampling.
SAMPLE_WINDOW = 65536
# A window that completes with fewer acceptances than this (target still
# unmet) counts as a rejection stall: 6/65536 < 1e-4 <= 7/65536.
MIN_WINDOW_ACCEPTS = 7


def pcg_fill_u32(state: int, inc: int, count: int):
    """Draw ``count`` PCG-XSH-RR outputs starting from ``state``.

    Returns ``(outputs, new_state)`` where new_state is the LCG state after
    exactly ``count`` steps. Vectorized by jump tables: state_k =
    MULT**k * state + (sum_{i<k} MULT**i) * inc  (mod 2**64).
    """
    if count == 0:
        return np.empty(0, dtype=np.uint32), state
    powers = np.empty(count + 1, dtype=np.uint64)
    powers[0] = 1
    np.cumprod(np.full(count, _MULT, dtype=np.uint64), out=powers[1:])
    geo = np.empty(count + 1, dtype=np.uint64)
    geo[0] = 0
    np.cumsum(powers[:-1], out=geo[1:])

    s0 = np.uint64(state)
    c = np.uint64(inc)
    states = powers[:count] * s0 + geo[:count] * c
    xorshifted = (((states >> np.uint64(18)) ^ states) >> np.uint64(27)).astype(np.uint32)
    rot = (states >> np.uint64(59)).astype(np.uint32)
    out = (xorshifted >> rot) | (xorshifted << ((np.uint32(0) - rot) & np.uint32(31)))
    # scalar uint64 arithmetic wraps by design; numpy warns on scalars only
    with np.errstate(over="ignore"):
        new_state = int(powers[count] * s0 + geo[count] * c)
    return out, new_state


def spmm_csr(indptr, indices, data, dense):
    """CSR @ dense with per-row sequential accumulation order."""
    n_rows = indptr.shape[0] - 1
    mat = sp.csr_matrix((data, indices, indptr), shape=(n_rows, dense.shape[0]), copy=False)
    out = mat @ dense
    return np.ascontiguousarray(out)


def lazy_spmm(indptr, indices, data, dense, beta: float):
    """beta * (CSR @ dense) + (1 - beta) * dense, same rounding as compiled."""
    prod = spmm_csr(indptr, indices, data, dense)
    return beta * prod + (1.0 - beta) * dense


def sample_negative(n: int, adj_keys, target: int, state: int, inc: int):
    """Rejection-sample ``target`` distinct non-edges of an n-node graph.

    ``adj_keys`` is the sorted array of canonical keys (min*n + max) of
    existing edges. Candidates are drawn as index pairs from the generator
    stream (two 32-bit draws each, multiply-shift range map) and rejected on
    self-pairs, existing edges, and duplicates, in stream order.

    Returns ``(accepted_keys, status)`` with keys in acceptance order;
    status 0 = ok, 1 = rejection stall (windowed acceptance rate < 1e-4).
    """
    if target == 0:
        return np.empty(0, dtype=np.uint64), 0
    nn = np.uint64(n)
    accepted = np.empty(target, dtype=np.uint64)
    have = 0
    acc_sorted = np.empty(0, dtype=np.uint64)
    while True:
        words, state = pcg_fill_u32(state, inc, 2 * SAMPLE_WINDOW)
        w64 = words.astype(np.uint64)
        i = (w64[0::2] * nn) >> np.uint64(32)
        j = (w64[1::2] * nn) >> np.uint64(32)
        lo = np.minimum(i, j)
        hi = np.maximum(i, j)
        keys = lo * nn + hi
        valid = i != j
        if have:
            acc_sorted = np.sort(accepted[:have])
        kv = keys[valid]
        idx = np.searchsorted(adj_keys, kv)
        idx_c = np.minimum(idx, len(adj_keys) - 1) if len(adj_keys) else idx
        in_adj = (idx < len(adj_keys)) & (adj_keys[idx_c] == kv) if len(adj_keys) else np.zeros(len(kv), bool)
        kv = kv[~in_adj]
        if have:
            idx = np.searchsorted(acc_sorted, kv)
            idx_c = np.minimum(idx, have - 1)
            dup = (idx < have) & (acc_sorted[idx_c] == kv)
            kv = kv[~dup]
        uniq, first = np.unique(kv, return_index=True)
        new_keys = uniq[np.argsort(first, kind="stable")]
        take = min(len(new_keys), target - have)
        accepted[have : have + take] = new_keys[:take]
        have += take
        if have == target:
            return accepted, 0
        if len(new_keys) < MIN_WINDOW_ACCEPTS:
            return accepted[:have], 1


def _tournament_rounds(n: int):
    """Round-robin schedule: n (or n+1 if odd) players, disjoint pairs per
    round, every unordered pair exactly once across rounds."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [
            (min(players[i], players[m - 1 - i]), max(players[i], players[m - 1 - i]))
            for i in range(m // 2)
            if players[i] < n and players[m - 1 - i] < n
        ]
        p = np.array([x for x, _ in pairs], dtype=np.intp)
        q = np.array([y for _, y in pairs], dtype=np.intp)
        rounds.append((p, q))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _off_norm(a):
    d = a.copy()
    np.fill_diagonal(d, 0.0)
    return float(np.sqrt(np.sum(d * d)))


def jacobi_eigh(a, want_vectors: bool, tol: float, max_sweeps: int):
    """Jacobi eigensolver, parallel (tournament) rotation ordering.

    Each round applies ~n/2 Givens rotations on disjoint index pairs, which
    keeps the work vectorized. Returns (eigenvalues ascending, eigenvector
    columns or None, converged flag).
    """
    a = np.array(a, dtype=np.float64, order="C", copy=True)
    n = a.shape[0]
    q = np.eye(n) if want_vectors else None
    if n < 2:
        return np.diag(a).copy(), q, True
    rounds = _tournament_rounds(n)
    converged = False
    for _ in range(max_sweeps):
        scale = float(np.sqrt(np.sum(a * a)))
        if _off_norm(a) <= tol * max(scale, 1.0):
            converged = True
            break
        for p, r in rounds:
            apq = a[p, r]
            live = apq != 0.0
            if not np.any(live):
                continue
            pp, rr, apq = p[live], r[live], apq[live]
            theta = (a[rr, rr] - a[pp, pp]) / (2.0 * apq)
            # |theta| clipped so theta**2 cannot overflow; t ~ 1/(2 theta)
            # is below 5e-151 out there, indistinguishable from the exact value.
            th = np.clip(theta, -1e150, 1e150)
            t = np.sign(th) / (np.abs(th) + np.sqrt(th * th + 1.0))
            t = np.where(theta == 0.0, 1.0, t)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            row_p = a[pp, :].copy()
            row_r = a[rr, :].copy()
            a[pp, :] = c[:, None] * row_p - s[:, None] * row_r
            a[rr, :] = s[:, None] * row_p + c[:, None] * row_r
            col_p = a[:, pp].copy()
            col_r = a[:, rr].copy()
            a[:, pp] = c[None, :] * col_p - s[None, :] * col_r
            a[:, rr] = s[None, :] * col_p + c[None, :] * col_r
            if q is not None:
                q_p = q[:, pp].copy()
                q_r = q[:, rr].copy()
                q[:, pp] = c[None, :] * q_p - s[None, :] * q_r
                q[:, rr] = s[None, :] * q_p + c[None, :] * q_r
    else:
        converged = _off_norm(a) <= tol * max(float(np.sqrt(np.sum(a * a))), 1.0)
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], (q[:, order] if q is not None else None), converged
