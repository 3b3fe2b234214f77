"""Timing comparison of the compiled kernel extension vs the numpy/scipy
fallback on the hot paths: generator blocks, sparse matmul, negative-edge
sampling, the Jacobi eigensolver, and one full unsupervised iteration.

Run:  python benchmarks/bench_backends.py [--nodes N] [--dim D] [--repeats R]

Both backends are imported directly, so the GRAPHPROP_BACKEND environment
variable does not matter here.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from graphprop.graph import SparseGraph, build_propagation_operator
from graphprop.kernels import fallback
from graphprop.rng import Pcg32

try:
    from graphprop.kernels import _ckern
except ImportError:
    _ckern = None


def _random_graph(seed: int, n: int, extra: int) -> SparseGraph:
    rng = Pcg32(seed)
    edges = set()
    for v in range(1, n):
        edges.add((rng.int_below(v), v))
    while len(edges) < n - 1 + extra:
        i, j = rng.int_below(n), rng.int_below(n)
        if i != j:
            edges.add((min(i, j), max(i, j)))
    return SparseGraph.from_edges(n, sorted(edges))


def _time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nodes", type=int, default=3000)
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    n, d, repeats = args.nodes, args.dim, args.repeats
    g = _random_graph(7, n, 4 * n)
    op = build_propagation_operator(g)
    csr = op.csr
    x = Pcg32(3).uniform_matrix(n, d)
    rows, cols = g.edge_pairs
    adj_keys = np.sort(
        np.minimum(rows, cols).astype(np.uint64) * np.uint64(n)
        + np.maximum(rows, cols).astype(np.uint64)
    )
    sym = Pcg32(5).uniform_matrix(200, 200)
    sym = (sym + sym.T) / 2.0
    neg_target = min(20 * len(adj_keys), n * (n - 1) // 2 - len(adj_keys))
    seed_rng = Pcg32(11)
    state, inc = seed_rng.state, seed_rng.inc

    cases = {
        f"pcg_fill_u32 ({2 * 65536} words)": lambda impl: impl.pcg_fill_u32(
            state, inc, 2 * 65536
        ),
        f"spmm_csr ({n}x{n} @ {n}x{d})": lambda impl: impl.spmm_csr(
            csr.indptr, csr.indices, csr.data, x
        ),
        f"lazy_spmm (beta=0.7)": lambda impl: impl.lazy_spmm(
            csr.indptr, csr.indices, csr.data, x, 0.7
        ),
        f"sample_negative ({neg_target} accepts)": lambda impl: impl.sample_negative(
            n, adj_keys, neg_target, state, inc
        ),
        "jacobi_eigh (200x200, vectors)": lambda impl: impl.jacobi_eigh(
            sym, True, 1e-12, 64
        ),
    }

    backends = [("fallback", fallback)]
    if _ckern is not None:
        backends.insert(0, ("compiled", _ckern))
    else:
        print("compiled extension not built; timing the fallback only\n")

    width = max(len(name) for name in cases)
    header = f"{'kernel':<{width}}  " + "  ".join(f"{name:>10}" for name, _ in backends)
    if len(backends) == 2:
        header += f"  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, call in cases.items():
        times = [_time(lambda impl=impl: call(impl), repeats) for _, impl in backends]
        row = f"{name:<{width}}  " + "  ".join(f"{t * 1e3:>8.2f}ms" for t in times)
        if len(times) == 2:
            row += f"  {times[1] / times[0]:>7.2f}x"
        print(row)

    # one full unsupervised iteration: sample + lazy smoothing + lazy sharpening
    def iteration(impl):
        keys, status = impl.sample_negative(n, adj_keys, neg_target, state, inc)
        assert status == 0
        i = (keys // np.uint64(n)).astype(np.int64)
        j = (keys % np.uint64(n)).astype(np.int64)
        ng = SparseGraph.from_edges(n, np.stack([i, j], axis=1))
        deg = ng.degrees.astype(np.float64)
        inv = 1.0 / np.sqrt(deg + 2.0)
        data = np.empty_like(ng.indices, dtype=np.float64)
        for v in range(n):
            lo, hi = ng.indptr[v], ng.indptr[v + 1]
            data[lo:hi] = -inv[v] * inv[ng.indices[lo:hi]]
        smooth = impl.lazy_spmm(csr.indptr, csr.indices, csr.data, x, 0.7)
        sharp_prod = impl.spmm_csr(ng.indptr, ng.indices, data, x)
        sharp = 0.7 * (sharp_prod + (2.0 / (deg + 2.0))[:, None] * x) + 0.3 * x
        return 0.5 * (smooth + sharp)

    print()
    times = [_time(lambda impl=impl: iteration(impl), repeats) for _, impl in backends]
    label = f"full iteration (n={n}, d={d})"
    row = f"{label:<{width}}  " + "  ".join(f"{t * 1e3:>8.2f}ms" for t in times)
    if len(times) == 2:
        row += f"  {times[1] / times[0]:>7.2f}x"
        ref = iteration(backends[0][1])
        alt = iteration(backends[1][1])
        row += "  (bitwise equal)" if np.array_equal(ref, alt) else "  (MISMATCH!)"
    print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
