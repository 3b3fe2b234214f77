"""Compiled extension vs numpy/scipy fallback: the two kernel backends must
agree bit for bit on integer kernels and to rounding error on the eigensolver,
and full pipeline reports must not depend on the backend."""

from __future__ import annotations

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from graphprop.graph import SparseGraph, build_propagation_operator
from graphprop.kernels import BACKEND, fallback
from graphprop.rng import Pcg32

from conftest import random_graph

_ckern = pytest.importorskip(
    "graphprop.kernels._ckern", reason="compiled kernel extension not built"
)

BACKENDS = (_ckern, fallback)


def test_active_backend_is_compiled_when_available():
    assert BACKEND == "compiled"
    assert fallback.SAMPLE_WINDOW == _ckern.SAMPLE_WINDOW == 65536
    assert fallback.MIN_WINDOW_ACCEPTS == _ckern.MIN_WINDOW_ACCEPTS == 7


@pytest.mark.parametrize("seed,count", [(0, 0), (0, 1), (3, 7), (9, 1000), (42, 65536)])
def test_pcg_fill_bitwise_equal(seed, count):
    rng = Pcg32(seed)
    got_c, state_c = _ckern.pcg_fill_u32(rng.state, rng.inc, count)
    got_f, state_f = fallback.pcg_fill_u32(rng.state, rng.inc, count)
    np.testing.assert_array_equal(got_c, got_f)
    assert state_c == state_f
    # block drawing must equal scalar drawing from the generator itself
    scalar = Pcg32(seed)
    np.testing.assert_array_equal(got_c, [scalar.next_u32() for _ in range(count)])
    assert state_c == scalar.state


def _adjacency_keys(g: SparseGraph) -> np.ndarray:
    rows, cols = g.edge_pairs
    keys = np.minimum(rows, cols).astype(np.uint64) * np.uint64(g.n) + np.maximum(
        rows, cols
    ).astype(np.uint64)
    return np.sort(keys)


def test_sample_negative_bitwise_equal():
    g = random_graph(seed=5, n=50, extra_edges=60)
    keys = _adjacency_keys(g)
    rng = Pcg32(11)
    got_c, status_c = _ckern.sample_negative(g.n, keys, 30, rng.state, rng.inc)
    got_f, status_f = fallback.sample_negative(g.n, keys, 30, rng.state, rng.inc)
    np.testing.assert_array_equal(got_c, got_f)
    assert status_c == status_f == 0
    assert len(np.unique(got_c)) == 30


def test_sample_negative_stall_bitwise_equal():
    # complete graph minus one edge: a single non-edge exists, so asking for
    # two must stall identically on both backends
    n = 12
    keys = np.sort(
        np.array(
            [
                np.uint64(i) * np.uint64(n) + np.uint64(j)
                for i in range(n)
                for j in range(i + 1, n)
                if (i, j) != (0, 1)
            ],
            dtype=np.uint64,
        )
    )
    rng = Pcg32(2)
    got_c, status_c = _ckern.sample_negative(n, keys, 2, rng.state, rng.inc)
    got_f, status_f = fallback.sample_negative(n, keys, 2, rng.state, rng.inc)
    np.testing.assert_array_equal(got_c, got_f)
    assert status_c == status_f == 1
    assert got_c.tolist() == [1]  # key of pair (0, 1), the lone non-edge


def test_spmm_bitwise_equal():
    g = random_graph(seed=5, n=50, extra_edges=60)
    csr = build_propagation_operator(g).csr
    x = Pcg32(7).uniform_matrix(g.n, 16)
    got_c = _ckern.spmm_csr(csr.indptr, csr.indices, csr.data, x)
    got_f = fallback.spmm_csr(csr.indptr, csr.indices, csr.data, x)
    np.testing.assert_array_equal(got_c, got_f)
    lazy_c = _ckern.lazy_spmm(csr.indptr, csr.indices, csr.data, x, 0.37)
    lazy_f = fallback.lazy_spmm(csr.indptr, csr.indices, csr.data, x, 0.37)
    np.testing.assert_array_equal(lazy_c, lazy_f)


def test_jacobi_agrees_across_backends_and_with_lapack():
    w = Pcg32(13).uniform_matrix(40, 40)
    sym = (w + w.T) / 2.0
    vals_c, vecs_c, conv_c = _ckern.jacobi_eigh(sym, True, 1e-12, 64)
    vals_f, vecs_f, conv_f = fallback.jacobi_eigh(sym, True, 1e-12, 64)
    assert conv_c and conv_f
    # different summation orders in the convergence test allow rounding-level
    # divergence, nothing more
    np.testing.assert_allclose(vals_c, vals_f, atol=1e-10)
    np.testing.assert_allclose(vals_c, np.linalg.eigvalsh(sym), atol=1e-9)
    for vecs, vals in ((vecs_c, vals_c), (vecs_f, vals_f)):
        np.testing.assert_allclose(vecs @ np.diag(vals) @ vecs.T, sym, atol=1e-8)


def _report_bytes(backend: str, args, out_path) -> bytes:
    env = dict(os.environ, GRAPHPROP_BACKEND=backend)
    proc = subprocess.run(
        [sys.executable, "-m", "graphprop", *args, "--out", str(out_path)],
        capture_output=True,
        text=True,
        env=env,
    )
    assert proc.returncode == 0, proc.stderr
    return out_path.read_bytes()


def test_run_report_identical_across_backends(tmp_path):
    args = ["run", "--dataset", "karate", "--method", "ggcm", "--k", "3", "--seed", "4"]
    compiled = _report_bytes("compiled", args, tmp_path / "c.json")
    pure = _report_bytes("fallback", args, tmp_path / "f.json")
    assert compiled == pure


def test_reconstruct_report_identical_across_backends(tmp_path):
    args = ["reconstruct", "--dataset", "karate", "--method", "ggc", "--k", "2"]
    compiled = _report_bytes("compiled", args, tmp_path / "c.json")
    pure = _report_bytes("fallback", args, tmp_path / "f.json")
    assert compiled == pure


def test_spectrum_report_agrees_across_backends(tmp_path):
    # the eigensolver may round differently between backends, so compare
    # parsed values instead of bytes
    args = ["diagnose", "spectrum", "--nodes", "30", "--neg-edges", "45", "--seed", "3"]
    compiled = json.loads(_report_bytes("compiled", args, tmp_path / "c.json"))
    pure = json.loads(_report_bytes("fallback", args, tmp_path / "f.json"))
    for key in ("xi_bar", "lambda_max", "bound"):
        assert compiled["summary"][key] == pytest.approx(pure["summary"][key], abs=1e-10)
    assert compiled["summary"]["bound_holds"] and pure["summary"]["bound_holds"]
    rows_c = np.array(compiled["rows"], dtype=np.float64)
    rows_f = np.array(pure["rows"], dtype=np.float64)
    np.testing.assert_allclose(rows_c, rows_f, atol=1e-9)


def test_bad_backend_request_fails_import():
    proc = subprocess.run(
        [sys.executable, "-c", "import graphprop.kernels"],
        capture_output=True,
        text=True,
        env=dict(os.environ, GRAPHPROP_BACKEND="gpu"),
    )
    assert proc.returncode != 0
    assert "GRAPHPROP_BACKEND must be auto, compiled, or fallback" in proc.stderr
