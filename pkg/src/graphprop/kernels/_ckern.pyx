# cython: language_level=3
"""Compiled implementations of the hot kernels.

Semantics mirror ``fallback.py`` exactly: integer kernels are bit-identical,
float kernels use the same accumulation order (per-row sequential for spmm,
multiply-then-add for the lazy step) so both backends agree bitwise.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

cdef enum:
    _SAMPLE_WINDOW = 65536
    _MIN_WINDOW_ACCEPTS = 7

SAMPLE_WINDOW = _SAMPLE_WINDOW
MIN_WINDOW_ACCEPTS = _MIN_WINDOW_ACCEPTS

cdef extern from *:
    """
    static const unsigned long long PCG_MULT = 6364136223846793005ULL;
    """
    cdef unsigned long long PCG_MULT


cdef inline unsigned int _pcg_output(unsigned long long state) nogil:
    cdef unsigned int xorshifted = <unsigned int>(((state >> 18) ^ state) >> 27)
    cdef unsigned int rot = <unsigned int>(state >> 59)
    return (xorshifted >> rot) | (xorshifted << ((-rot) & 31))


def pcg_fill_u32(state, inc, count):
    """Draw ``count`` PCG-XSH-RR outputs; returns (outputs, new_state)."""
    cdef unsigned long long s = <unsigned long long>state
    cdef unsigned long long c = <unsigned long long>inc
    cdef Py_ssize_t k = count
    cdef cnp.ndarray[cnp.uint32_t, ndim=1] out = np.empty(k, dtype=np.uint32)
    cdef Py_ssize_t t
    for t in range(k):
        out[t] = _pcg_output(s)
        s = s * PCG_MULT + c
    return out, int(s)


def spmm_csr(indptr, indices, data, dense):
    """CSR @ dense with per-row sequential accumulation order."""
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dv = np.ascontiguousarray(data, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] b = np.ascontiguousarray(dense, dtype=np.float64)
    cdef Py_ssize_t n_rows = ip.shape[0] - 1
    cdef Py_ssize_t d = b.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((n_rows, d), dtype=np.float64)
    cdef Py_ssize_t i, p, j, col
    cdef double v
    with nogil:
        for i in range(n_rows):
            for p in range(ip[i], ip[i + 1]):
                col = ix[p]
                v = dv[p]
                for j in range(d):
                    out[i, j] = out[i, j] + v * b[col, j]
    return out


def lazy_spmm(indptr, indices, data, dense, double beta):
    """beta * (CSR @ dense) + (1 - beta) * dense."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] prod = spmm_csr(indptr, indices, data, dense)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] b = np.ascontiguousarray(dense, dtype=np.float64)
    cdef double omb = 1.0 - beta
    cdef Py_ssize_t n = prod.shape[0], d = prod.shape[1]
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n):
            for j in range(d):
                prod[i, j] = beta * prod[i, j] + omb * b[i, j]
    return prod


cdef inline bint _in_sorted(cnp.uint64_t[:] arr, unsigned long long key) nogil:
    cdef Py_ssize_t lo = 0, hi = arr.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if arr[mid] < key:
            lo = mid + 1
        else:
            hi = mid
    return lo < arr.shape[0] and arr[lo] == key


def sample_negative(n, adj_keys, target, state, inc):
    """Rejection-sample ``target`` distinct non-edge keys; see fallback twin.

    Returns (accepted_keys in acceptance order, status) with status 0 = ok,
    1 = windowed acceptance rate fell below 1e-4 before the target was met.
    """
    cdef unsigned long long s = <unsigned long long>state
    cdef unsigned long long c = <unsigned long long>inc
    cdef unsigned long long nn = <unsigned long long>n
    cdef Py_ssize_t want = target
    if want == 0:
        return np.empty(0, dtype=np.uint64), 0
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] adj = np.ascontiguousarray(adj_keys, dtype=np.uint64)
    cdef cnp.uint64_t[:] adj_v = adj
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] acc = np.empty(want, dtype=np.uint64)
    cdef cnp.uint64_t[:] acc_v = acc
    # open-addressing hash set of accepted keys (power-of-two capacity)
    cdef Py_ssize_t cap = 1
    while cap < 2 * want:
        cap <<= 1
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] slots = np.zeros(cap, dtype=np.uint64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] used = np.zeros(cap, dtype=np.uint8)
    cdef cnp.uint64_t[:] slots_v = slots
    cdef cnp.uint8_t[:] used_v = used
    cdef Py_ssize_t have = 0, window_cand = 0, window_acc = 0
    cdef unsigned long long a, b, i, j, lo, hi, key, h
    cdef Py_ssize_t pos
    cdef int status = -1
    with nogil:
        while True:
            a = _pcg_output(s); s = s * PCG_MULT + c
            b = _pcg_output(s); s = s * PCG_MULT + c
            i = (a * nn) >> 32
            j = (b * nn) >> 32
            window_cand += 1
            if i != j:
                lo = i if i < j else j
                hi = j if i < j else i
                key = lo * nn + hi
                if not _in_sorted(adj_v, key):
                    # probe the accepted-set hash (key+1 stored so 0 = empty)
                    h = (key * 0x9E3779B97F4A7C15ULL) >> 32
                    pos = <Py_ssize_t>(h & <unsigned long long>(cap - 1))
                    while used_v[pos] and slots_v[pos] != key + 1:
                        pos = (pos + 1) & (cap - 1)
                    if not used_v[pos]:
                        used_v[pos] = 1
                        slots_v[pos] = key + 1
                        acc_v[have] = key
                        have += 1
                        window_acc += 1
                        if have == want:
                            status = 0
                            break
            if window_cand == _SAMPLE_WINDOW:
                if window_acc < _MIN_WINDOW_ACCEPTS:
                    status = 1
                    break
                window_cand = 0
                window_acc = 0
    if status == 0:
        return acc, 0
    return acc[:have].copy(), 1


def jacobi_eigh(a_in, want_vectors, double tol, int max_sweeps):
    """Cyclic-by-row Jacobi eigensolver.

    Returns (eigenvalues ascending, eigenvector columns or None, converged).
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a = np.array(a_in, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = a.shape[0]
    cdef bint wv = bool(want_vectors)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] q = np.eye(n) if wv else np.empty((0, 0))
    cdef bint converged = 0
    cdef Py_ssize_t p, r, k, sweep
    cdef double off, scale, apq, app, arr, theta, t, cs, sn, tmp_p, tmp_r
    if n < 2:
        w0 = np.diag(a).copy()
        return w0, (q if wv else None), True
    for sweep in range(max_sweeps):
        off = 0.0
        scale = 0.0
        with nogil:
            for p in range(n):
                for r in range(n):
                    scale += a[p, r] * a[p, r]
                    if p != r:
                        off += a[p, r] * a[p, r]
        off = sqrt(off)
        scale = sqrt(scale)
        if off <= tol * (scale if scale > 1.0 else 1.0):
            converged = 1
            break
        with nogil:
            for p in range(n - 1):
                for r in range(p + 1, n):
                    apq = a[p, r]
                    if apq == 0.0:
                        continue
                    app = a[p, p]
                    arr = a[r, r]
                    theta = (arr - app) / (2.0 * apq)
                    if theta > 1e150:
                        theta = 1e150
                    elif theta < -1e150:
                        theta = -1e150
                    if theta == 0.0:
                        t = 1.0
                    elif theta > 0.0:
                        t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                    else:
                        t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                    cs = 1.0 / sqrt(t * t + 1.0)
                    sn = t * cs
                    for k in range(n):
                        tmp_p = a[p, k]
                        tmp_r = a[r, k]
                        a[p, k] = cs * tmp_p - sn * tmp_r
                        a[r, k] = sn * tmp_p + cs * tmp_r
                    for k in range(n):
                        tmp_p = a[k, p]
                        tmp_r = a[k, r]
                        a[k, p] = cs * tmp_p - sn * tmp_r
                        a[k, r] = sn * tmp_p + cs * tmp_r
                    if wv:
                        for k in range(n):
                            tmp_p = q[k, p]
                            tmp_r = q[k, r]
                            q[k, p] = cs * tmp_p - sn * tmp_r
                            q[k, r] = sn * tmp_p + cs * tmp_r
    else:
        off = 0.0
        scale = 0.0
        for p in range(n):
            for r in range(n):
                scale += a[p, r] * a[p, r]
                if p != r:
                    off += a[p, r] * a[p, r]
        converged = sqrt(off) <= tol * max(sqrt(scale), 1.0)
    w = np.diag(np.asarray(a)).copy()
    order = np.argsort(w, kind="stable")
    if wv:
        return w[order], np.asarray(q)[:, order], bool(converged)
    return w[order], None, bool(converged)
