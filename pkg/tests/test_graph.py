"""Sparse containers, propagation/inverse operators, negative sampling,
and the on-disk dataset format."""

from __future__ import annotations

import os

import numpy as np
import pytest

from graphprop import kernels
from graphprop.graph import (
    CsrMatrix,
    DataFormatError,
    SamplingError,
    SparseGraph,
    build_propagation_operator,
    load_dataset,
    negative_graph_from_edges,
    resolve_dataset_path,
    sample_negative_graph,
    spmm,
)
from graphprop.numerics import power_iteration_radius
from graphprop.rng import Pcg32

from conftest import path3, random_graph


# --- CSR container ---------------------------------------------------------------


def test_csr_roundtrip():
    import scipy.sparse as sp

    mat = sp.random(6, 4, density=0.4, random_state=3, format="csr")
    csr = CsrMatrix.from_scipy(mat)
    assert csr.nnz == mat.nnz
    np.testing.assert_allclose(csr.to_dense(), mat.toarray(), atol=0)
    np.testing.assert_allclose(csr.to_scipy().toarray(), mat.toarray(), atol=0)


def test_spmm_matches_dense():
    g = random_graph(2, 50, extra_edges=60)
    op = build_propagation_operator(g)
    u = Pcg32(5).uniform_matrix(50, 7, -1.0, 1.0)
    np.testing.assert_allclose(spmm(op.csr, u), op.csr.to_dense() @ u, atol=1e-12)


def test_spmm_validations():
    op = build_propagation_operator(path3())
    with pytest.raises(ValueError, match="2-D"):
        spmm(op.csr, np.zeros(3))
    with pytest.raises(ValueError, match="mismatch"):
        spmm(op.csr, np.zeros((4, 2)))


# --- graph construction ------------------------------------------------------------


def test_from_edges_collapses_duplicates():
    g = SparseGraph.from_edges(3, [(0, 1), (1, 0), (0, 1), (1, 2)])
    assert g.num_edges == 2
    assert g.degrees.tolist() == [1, 2, 1]
    assert g.neighbors(1).tolist() == [0, 2]


def test_from_edges_rejects_self_loop():
    with pytest.raises(ValueError, match="self-loop"):
        SparseGraph.from_edges(3, [(0, 0)])


def test_from_edges_rejects_out_of_range():
    with pytest.raises(ValueError, match="out of range"):
        SparseGraph.from_edges(3, [(0, 3)])


def test_edge_pairs_canonical():
    g = SparseGraph.from_edges(4, [(2, 0), (3, 1)])
    u, v = g.edge_pairs
    assert u.tolist() == [0, 1]
    assert v.tolist() == [2, 3]
    assert g.edge_keys.tolist() == [0 * 4 + 2, 1 * 4 + 3]


def test_components():
    g = SparseGraph.from_edges(6, [(0, 1), (1, 2), (3, 4), (4, 5)])
    comp = g.components()
    assert comp.tolist() == [0, 0, 0, 1, 1, 1]


# --- propagation operator -----------------------------------------------------------


def test_operator_single_node():
    op = build_propagation_operator(SparseGraph.from_edges(1, []))
    assert op.csr.to_dense().tolist() == [[1.0]]


def test_operator_single_edge():
    op = build_propagation_operator(SparseGraph.from_edges(2, [(0, 1)]))
    np.testing.assert_allclose(op.csr.to_dense(), [[0.5, 0.5], [0.5, 0.5]], atol=1e-15)


def test_operator_path3_entries():
    dense = build_propagation_operator(path3()).csr.to_dense()
    s6 = 1.0 / np.sqrt(6.0)
    want = np.array([[0.5, s6, 0.0], [s6, 1.0 / 3.0, s6], [0.0, s6, 0.5]])
    np.testing.assert_allclose(dense, want, atol=1e-15)
    assert abs(dense[0, 1] - 0.40824829) < 1e-8


@pytest.mark.parametrize("seed,n,extra", [(0, 10, 4), (1, 25, 15), (2, 40, 0)])
def test_operator_matches_dense_formula(seed, n, extra):
    g = random_graph(seed, n, extra)
    adj = np.zeros((n, n))
    u, v = g.edge_pairs
    adj[u, v] = adj[v, u] = 1.0
    inv_sqrt = 1.0 / np.sqrt(g.degrees + 1.0)
    want = inv_sqrt[:, None] * (adj + np.eye(n)) * inv_sqrt[None, :]
    np.testing.assert_allclose(build_propagation_operator(g).csr.to_dense(), want, atol=1e-15)


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_operator_row_sum_invariant(seed):
    # sum_j P_ij * sqrt(d_j + 1) = sqrt(d_i + 1): degree-scaled all-ones fixed point
    g = random_graph(seed, 30, extra_edges=20)
    root = np.sqrt(g.degrees + 1.0)
    got = spmm(build_propagation_operator(g).csr, root[:, None])
    np.testing.assert_allclose(got.ravel(), root, atol=1e-12)


# --- inverse operator and negative sampling --------------------------------------------


def test_igc_single_negative_edge():
    ng = negative_graph_from_edges(2, [(0, 1)])
    want = np.array([[2.0 / 3.0, -1.0 / 3.0], [-1.0 / 3.0, 2.0 / 3.0]])
    np.testing.assert_allclose(ng.igc_csr.to_dense(), want, atol=1e-15)
    assert ng.neg_degrees.tolist() == [1, 1]
    assert ng.neg_csr.to_dense().tolist() == [[0.0, 1.0], [1.0, 0.0]]


def test_igc_zero_target_is_identity():
    g = SparseGraph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3)])  # K4
    ng = sample_negative_graph(g, 0, Pcg32(0))
    assert np.array_equal(ng.igc_csr.to_dense(), np.eye(4))


def test_complete_graph_has_no_negative_edges():
    g = SparseGraph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3)])
    with pytest.raises(SamplingError, match="infeasible"):
        sample_negative_graph(g, 1, Pcg32(0))


def test_negative_target_rejected():
    with pytest.raises(ValueError):
        sample_negative_graph(path3(), -1, Pcg32(0))


def test_sampled_edges_live_in_complement():
    g = random_graph(7, 20, extra_edges=30)
    existing = set(map(tuple, np.stack(g.edge_pairs, axis=1).tolist()))
    ng = sample_negative_graph(g, 40, Pcg32(11))
    u, v = ng.graph.edge_pairs
    sampled = set(zip(u.tolist(), v.tolist()))
    assert len(sampled) == 40 == ng.graph.num_edges
    assert not (sampled & existing)


def test_sampling_deterministic_and_seed_sensitive():
    g = random_graph(3, 25, extra_edges=10)
    a = sample_negative_graph(g, 30, Pcg32(5)).graph.edge_keys.tolist()
    b = sample_negative_graph(g, 30, Pcg32(5)).graph.edge_keys.tolist()
    c = sample_negative_graph(g, 30, Pcg32(6)).graph.edge_keys.tolist()
    assert a == b
    assert a != c


def test_sampler_matches_reference_stream(oracle):
    case = oracle["sample_n8_seed3_target6"]
    g = SparseGraph.from_edges(8, case["edges"])
    child = Pcg32(3).spawn()
    keys, status = kernels.sample_negative(8, g.edge_keys, 6, child.state, child.inc)
    assert status == 0
    want_keys = [u * 8 + v for u, v in case["accepted_pairs"]]
    assert keys.tolist() == want_keys  # acceptance order, not just the set
    ng = sample_negative_graph(g, 6, Pcg32(3))
    got_pairs = set(zip(*(arr.tolist() for arr in ng.graph.edge_pairs)))
    assert got_pairs == {tuple(sorted(p)) for p in case["accepted_pairs"]}


def test_sampling_advances_caller_by_one_draw():
    g = random_graph(1, 15, extra_edges=5)
    rng = Pcg32(42)
    sample_negative_graph(g, 10, rng)
    twin = Pcg32(42)
    twin.next_u64()
    assert rng.state == twin.state


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_igc_spectral_radius_at_most_one(seed):
    g = random_graph(seed + 20, 30, extra_edges=12)
    ng = sample_negative_graph(g, 14, Pcg32(seed))  # sparse target: untouched nodes remain
    dense = ng.igc_csr.to_dense()
    radius = power_iteration_radius(lambda vec: dense @ vec, 30)
    assert radius <= 1.0 + 1e-12


# --- dataset files ---------------------------------------------------------------------


def _write(dirpath, name, text):
    with open(os.path.join(dirpath, name), "w", encoding="utf-8") as fh:
        fh.write(text)


def _write_tiny_dataset(dirpath, graph_text=None):
    _write(dirpath, "graph.txt", graph_text or "3 2\n0 1\n1 2\n")
    _write(dirpath, "features.txt", "3 2 4\n0 0 2.0\n0 1 2.0\n1 0 -3.0\n2 1 5.0\n")
    _write(dirpath, "labels.txt", "3 2\n0 0\n1 1\n2 -1\n")
    _write(dirpath, "splits.txt", "train: 0\nval: 1\ntest:\n")


def test_load_dataset_roundtrip(tmp_path):
    _write_tiny_dataset(tmp_path)
    ds = load_dataset(str(tmp_path))
    assert ds.n == 3 and ds.num_classes == 2 and ds.num_features == 2
    assert ds.graph.num_edges == 2
    assert ds.labels.tolist() == [0, 1, -1]
    assert ds.train_idx.tolist() == [0] and ds.val_idx.tolist() == [1] and ds.test_idx.size == 0
    # row L1 normalization, negative values normalized by absolute sum
    np.testing.assert_allclose(
        ds.features_dense(), [[0.5, 0.5], [-1.0, 0.0], [0.0, 1.0]], atol=1e-15
    )
    assert ds.features_dense() is ds.features_dense()  # cached


def test_graph_file_errors(tmp_path):
    _write_tiny_dataset(tmp_path, graph_text="3 2\n0 1\n2 2\n")
    with pytest.raises(DataFormatError, match=r"graph\.txt:3: self-loop"):
        load_dataset(str(tmp_path))
    _write_tiny_dataset(tmp_path, graph_text="3 2\n0 1\n0 9\n")
    with pytest.raises(DataFormatError, match=r"graph\.txt:3: endpoint out of range"):
        load_dataset(str(tmp_path))
    _write_tiny_dataset(tmp_path, graph_text="3 2\n0 1\n")
    with pytest.raises(DataFormatError, match=r"declared 2 edges but found 1"):
        load_dataset(str(tmp_path))
    _write_tiny_dataset(tmp_path, graph_text="3\n")
    with pytest.raises(DataFormatError, match=r"graph\.txt:1: header"):
        load_dataset(str(tmp_path))


def test_features_file_errors(tmp_path):
    _write_tiny_dataset(tmp_path)
    _write(tmp_path, "features.txt", "3 2 2\n0 0 1.0\n0 0 2.0\n")
    with pytest.raises(DataFormatError, match=r"duplicate feature entry"):
        load_dataset(str(tmp_path))
    _write(tmp_path, "features.txt", "3 2 1\n0 5 1.0\n")
    with pytest.raises(DataFormatError, match=r"features\.txt:2: column out of range"):
        load_dataset(str(tmp_path))
    _write(tmp_path, "features.txt", "4 2 0\n")
    with pytest.raises(DataFormatError, match=r"disagrees with graph\.txt"):
        load_dataset(str(tmp_path))
    _write(tmp_path, "features.txt", "3 2 1\n0 0 nan\n")
    with pytest.raises(DataFormatError, match=r"non-finite"):
        load_dataset(str(tmp_path))


def test_labels_file_errors(tmp_path):
    _write_tiny_dataset(tmp_path)
    _write(tmp_path, "labels.txt", "3 2\n0 0\n1 1\n")
    with pytest.raises(DataFormatError, match=r"no label line for node 2"):
        load_dataset(str(tmp_path))
    _write(tmp_path, "labels.txt", "3 2\n0 0\n1 5\n2 0\n")
    with pytest.raises(DataFormatError, match=r"labels\.txt:3: label out of range"):
        load_dataset(str(tmp_path))
    _write(tmp_path, "labels.txt", "3 2\n0 0\n0 1\n2 0\n")
    with pytest.raises(DataFormatError, match=r"duplicate label line"):
        load_dataset(str(tmp_path))


def test_splits_file_errors(tmp_path):
    _write_tiny_dataset(tmp_path)
    _write(tmp_path, "splits.txt", "train: 0\nval: 0\ntest:\n")
    with pytest.raises(DataFormatError, match=r"appears in both train and val"):
        load_dataset(str(tmp_path))
    _write(tmp_path, "splits.txt", "train: 0\ntest:\n")
    with pytest.raises(DataFormatError, match=r"missing val"):
        load_dataset(str(tmp_path))
    _write(tmp_path, "splits.txt", "train: 2\nval: 1\ntest:\n")
    with pytest.raises(DataFormatError, match=r"train index 2 has no label"):
        load_dataset(str(tmp_path))


def test_missing_file(tmp_path):
    _write_tiny_dataset(tmp_path)
    os.remove(os.path.join(tmp_path, "splits.txt"))
    with pytest.raises(DataFormatError, match=r"missing splits\.txt"):
        load_dataset(str(tmp_path))


def test_resolve_dataset_path_order(tmp_path, monkeypatch):
    # 1) explicit directory wins
    _write_tiny_dataset(tmp_path)
    assert resolve_dataset_path(str(tmp_path)) == str(tmp_path)
    # 2) $GRAPHPROP_DATA/<name>
    root = tmp_path / "root"
    (root / "tinyds").mkdir(parents=True)
    _write_tiny_dataset(root / "tinyds")
    monkeypatch.setenv("GRAPHPROP_DATA", str(root))
    assert resolve_dataset_path("tinyds") == os.path.join(str(root), "tinyds")
    # 3) ./data/<name>
    monkeypatch.delenv("GRAPHPROP_DATA")
    cwd = tmp_path / "cwd"
    (cwd / "data" / "tinyds").mkdir(parents=True)
    _write_tiny_dataset(cwd / "data" / "tinyds")
    monkeypatch.chdir(cwd)
    assert resolve_dataset_path("tinyds") == os.path.join("data", "tinyds")
    # 4) bundled datasets resolve by name; unknowns list what was tried
    assert os.path.isdir(resolve_dataset_path("karate"))
    with pytest.raises(DataFormatError, match="not found; tried"):
        resolve_dataset_path("no_such_dataset")


def test_bundled_datasets(karate, synth):
    assert karate.n == 34 and karate.graph.num_edges == 78 and karate.num_classes == 2
    assert int(karate.graph.degrees.max()) == 17
    assert (karate.train_idx.size, karate.val_idx.size, karate.test_idx.size) == (2, 4, 28)
    assert synth.n == 200 and synth.num_classes == 4 and synth.num_features == 16
    assert (synth.train_idx.size, synth.val_idx.size, synth.test_idx.size) == (20, 40, 100)
    sums = np.abs(synth.features_dense()).sum(axis=1)
    np.testing.assert_allclose(sums, np.ones_like(sums), atol=1e-12)
