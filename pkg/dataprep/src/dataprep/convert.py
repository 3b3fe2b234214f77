"""Convert raw Planetoid citation-network pickles to the plain-text dataset
format (graph.txt / features.txt / labels.txt / splits.txt + manifest.json).

A raw bundle is eight files for one dataset name:

- ``ind.<name>.x``      pickled scipy sparse matrix, training-node features
- ``ind.<name>.tx``     test-node features, rows in ``test.index`` file order
- ``ind.<name>.allx``   features of all non-test nodes (training superset)
- ``ind.<name>.y``      one-hot labels for the ``x`` rows
- ``ind.<name>.ty``     one-hot labels for the ``tx`` rows
- ``ind.<name>.ally``   one-hot labels for the ``allx`` rows
- ``ind.<name>.graph``  pickled dict: node id -> neighbor list (directed
  entries with duplicates; symmetrized and collapsed here)
- ``ind.<name>.test.index``  text file of test node ids, one per line,
  possibly unordered and (citeseer) with gaps in the id range

The conversion reproduces the well-known reference loading sequence exactly:
test rows are re-ordered per ``test.index``, and id-range gaps (isolated test
nodes) become zero feature rows with no label. Splits are the standard ones:
the ``x`` rows (20 per class) train, the next 500 ids validate, the sorted
``test.index`` ids test.

Converted statistics are checked against the published per-dataset table
(node/edge/feature/class/split counts); any mismatch aborts with a diff
report. Edge counts are unique undirected pairs after symmetrization with
self-loops dropped; because raw bundles in circulation disagree with some
published edge figures, ``allow_edge_mismatch`` (CLI:
``--allow-edge-mismatch``) downgrades an edge-count mismatch to a warning
while still recording the true counts in the manifest.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import pickle
import sys
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

# Published statistics used as conversion checksums.
EXPECTED_STATS = {
    "cora": {
        "nodes": 2708, "edges": 5429, "feature_dim": 1433, "classes": 7,
        "train": 140, "val": 500, "test": 1000,
    },
    "citeseer": {
        "nodes": 3327, "edges": 4732, "feature_dim": 3703, "classes": 6,
        "train": 120, "val": 500, "test": 1000,
    },
    "pubmed": {
        "nodes": 19717, "edges": 44338, "feature_dim": 500, "classes": 3,
        "train": 60, "val": 500, "test": 1000,
    },
}

_PARTS = ("x", "tx", "allx", "y", "ty", "ally", "graph", "test.index")


class ConversionError(ValueError):
    """Raw bundle unreadable, internally inconsistent, or failing checksums."""


@dataclass(frozen=True)
class PlanetoidBundle:
    """Paths to the eight raw files for one dataset name."""

    name: str
    paths: dict

    @classmethod
    def from_dir(cls, name: str, raw_dir: str) -> "PlanetoidBundle":
        paths = {part: os.path.join(raw_dir, f"ind.{name}.{part}") for part in _PARTS}
        missing = [p for p in paths.values() if not os.path.isfile(p)]
        if missing:
            raise ConversionError(
                "missing raw files: " + ", ".join(sorted(missing))
            )
        return cls(name=name, paths=paths)

    def load(self) -> dict:
        """Unpickle the seven object files and parse test.index."""
        data = {}
        for part in _PARTS[:-1]:
            path = self.paths[part]
            try:
                with open(path, "rb") as fh:
                    # python-2-era pickles: byte strings decode as latin1
                    data[part] = pickle.load(fh, encoding="latin1")
            except Exception as exc:
                raise ConversionError(f"cannot unpickle {path}: {exc}")
        path = self.paths["test.index"]
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data["test.index"] = [int(line) for line in fh if line.strip()]
        except ValueError as exc:
            raise ConversionError(f"bad test index file {path}: {exc}")
        if not data["test.index"]:
            raise ConversionError(f"empty test index file {path}")
        return data


def _assemble(raw: dict):
    """Reference loading sequence: vstack, gap zero-fill, test re-order.

    Returns (features csr, onehot labels, sorted test ids).
    """
    allx = sp.csr_matrix(raw["allx"], dtype=np.float64)
    tx = sp.csr_matrix(raw["tx"], dtype=np.float64)
    ally = np.asarray(raw["ally"])
    ty = np.asarray(raw["ty"])
    reorder = np.asarray(raw["test.index"], dtype=np.int64)
    order = np.sort(reorder)
    if np.unique(reorder).shape[0] != reorder.shape[0]:
        raise ConversionError("test.index contains duplicate ids")
    span = int(order[-1]) - int(order[0]) + 1
    if span != len(reorder):
        # ids skip some positions: those nodes exist in the graph but have
        # no feature/label rows — give them zero rows (the citeseer quirk)
        tx_full = sp.lil_matrix((span, tx.shape[1]), dtype=np.float64)
        tx_full[order - order[0], :] = tx
        tx = tx_full.tocsr()
        ty_full = np.zeros((span, ty.shape[1]), dtype=ty.dtype)
        ty_full[order - order[0], :] = ty
        ty = ty_full
    features = sp.vstack([allx, tx]).tolil()
    features[reorder, :] = features[order, :]
    onehot = np.vstack([ally, ty])
    onehot[reorder, :] = onehot[order, :]
    return features.tocsr(), onehot, order


def _collapse_edges(graph: dict, n: int):
    """Symmetrize the adjacency dict into unique undirected pairs.

    Returns (sorted pair list, raw directed entry count, self-loop count).
    """
    pairs = set()
    raw_directed = 0
    self_loops = 0
    for u, neighbors in graph.items():
        u = int(u)
        if not 0 <= u < n:
            raise ConversionError(f"graph dict key {u} outside 0..{n - 1}")
        for v in neighbors:
            v = int(v)
            raw_directed += 1
            if not 0 <= v < n:
                raise ConversionError(f"graph dict neighbor {v} outside 0..{n - 1}")
            if u == v:
                self_loops += 1
            else:
                pairs.add((min(u, v), max(u, v)))
    return sorted(pairs), raw_directed, self_loops


def _diff_report(stats: dict, expected: dict) -> list[str]:
    return [
        f"  {key}: got {stats[key]}, expected {expected[key]}"
        for key in sorted(expected)
        if stats.get(key) != expected[key]
    ]


def _format_value(v: float) -> str:
    return repr(float(v))


def _write_text(path: str, lines) -> str:
    text = "\n".join(lines) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def convert(
    bundle: PlanetoidBundle,
    out_dir: str,
    expected: dict | None = None,
    allow_edge_mismatch: bool = False,
    val_size: int = 500,
) -> dict:
    """Convert one raw bundle into ``out_dir``; returns a summary dict.

    ``expected`` defaults to the published statistics for known dataset
    names; pass an explicit dict (or None for unknown names) to override.
    """
    raw = bundle.load()
    features, onehot, test_idx = _assemble(raw)
    n, d = features.shape
    c = onehot.shape[1]
    graph = raw["graph"]
    if len(graph) != n:
        raise ConversionError(
            f"graph dict covers {len(graph)} nodes but features have {n} rows"
        )
    pairs, raw_directed, self_loops = _collapse_edges(graph, n)

    labeled = onehot.sum(axis=1) > 0
    labels = np.where(labeled, np.argmax(onehot, axis=1), -1).astype(np.int64)

    train_size = int(np.asarray(raw["y"]).shape[0])
    train_idx = np.arange(train_size, dtype=np.int64)
    val_idx = np.arange(train_size, train_size + val_size, dtype=np.int64)

    stats = {
        "nodes": n,
        "edges": len(pairs),
        "feature_dim": d,
        "classes": c,
        "train": int(train_idx.size),
        "val": int(val_idx.size),
        "test": int(test_idx.size),
    }
    if expected is None:
        expected = EXPECTED_STATS.get(bundle.name)
    edge_note = None
    if expected is not None:
        mismatched = _diff_report(stats, expected)
        if mismatched:
            only_edges = all(line.strip().startswith("edges:") for line in mismatched)
            report = "\n".join(
                [f"{bundle.name}: converted statistics disagree with expectations:"]
                + mismatched
                + [
                    f"  (raw directed entries {raw_directed}, self-loops {self_loops}, "
                    f"unique undirected pairs {len(pairs)})"
                ]
            )
            if not (only_edges and allow_edge_mismatch):
                raise ConversionError(report)
            edge_note = report

    # id-level split validation (after the stats diff, which is the better
    # error when a bundle is wholesale wrong)
    if val_idx.size and val_idx[-1] >= n:
        raise ConversionError(
            f"validation ids run to {val_idx[-1]} but only {n} nodes exist"
        )
    for split_name, idx in (("train", train_idx), ("val", val_idx), ("test", test_idx)):
        bad = idx[labels[idx] < 0]
        if bad.size:
            raise ConversionError(f"{split_name} id {int(bad[0])} has no label")
    overlap = (
        set(map(int, train_idx)) & set(map(int, val_idx))
        | set(map(int, train_idx)) & set(map(int, test_idx))
        | set(map(int, val_idx)) & set(map(int, test_idx))
    )
    if overlap:
        raise ConversionError(f"splits overlap at id {min(overlap)}")

    os.makedirs(out_dir, exist_ok=True)
    hashes = {}
    hashes["graph.txt"] = _write_text(
        os.path.join(out_dir, "graph.txt"),
        [f"{n} {len(pairs)}"] + [f"{u} {v}" for u, v in pairs],
    )
    coo = features.tocoo()
    triple_order = np.lexsort((coo.col, coo.row))
    hashes["features.txt"] = _write_text(
        os.path.join(out_dir, "features.txt"),
        [f"{n} {d} {coo.nnz}"]
        + [
            f"{coo.row[t]} {coo.col[t]} {_format_value(coo.data[t])}"
            for t in triple_order
        ],
    )
    hashes["labels.txt"] = _write_text(
        os.path.join(out_dir, "labels.txt"),
        [f"{n} {c}"] + [f"{i} {labels[i]}" for i in range(n)],
    )
    hashes["splits.txt"] = _write_text(
        os.path.join(out_dir, "splits.txt"),
        [
            "train: " + " ".join(str(i) for i in train_idx),
            "val: " + " ".join(str(i) for i in val_idx),
            "test: " + " ".join(str(i) for i in test_idx),
        ],
    )
    manifest = {
        "classes": c,
        "edge_detail": {
            "raw_directed": raw_directed,
            "self_loops": self_loops,
            "unique_undirected": len(pairs),
        },
        "edges": len(pairs),
        "feature_dim": d,
        "generator": "dataprep convert_planetoid",
        "name": bundle.name,
        "nodes": n,
        "sha256": hashes,
        "splits": {"train": stats["train"], "val": stats["val"], "test": stats["test"]},
    }
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {
        "name": bundle.name,
        "out_dir": out_dir,
        "stats": stats,
        "sha256": hashes,
        "edge_note": edge_note,
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="convert_planetoid",
        description="Convert raw Planetoid pickles to the plain-text dataset format.",
    )
    parser.add_argument("--name", required=True,
                        help="dataset name (cora, citeseer, pubmed, or custom)")
    parser.add_argument("--raw-dir", required=True,
                        help="directory containing the ind.<name>.* files")
    parser.add_argument("--out", required=True, help="output dataset directory")
    parser.add_argument("--allow-edge-mismatch", action="store_true",
                        help="tolerate an edge-count mismatch against the published "
                             "table (true counts still land in the manifest)")
    parser.add_argument("--val-size", type=int, default=500,
                        help="validation split size (default 500, the standard)")
    args = parser.parse_args(argv)
    try:
        bundle = PlanetoidBundle.from_dir(args.name, args.raw_dir)
        summary = convert(bundle, args.out,
                          allow_edge_mismatch=args.allow_edge_mismatch,
                          val_size=args.val_size)
    except ConversionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    stats = summary["stats"]
    print(f"{args.name}: wrote {summary['out_dir']}")
    print(
        f"  nodes={stats['nodes']} edges={stats['edges']} "
        f"features={stats['feature_dim']} classes={stats['classes']} "
        f"splits={stats['train']}/{stats['val']}/{stats['test']}"
    )
    if summary["edge_note"]:
        print(f"warning: {summary['edge_note']}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
