#!/usr/bin/env python3
"""Regenerate the bundled synth200 dataset (src/graphprop/data/synth200).

A 4-block stochastic block model on 200 nodes (p_in = 0.10, p_out = 0.01)
with 16-dimensional noisy class-center features, generated entirely from the
in-repo PCG generator so the output is reproducible byte for byte.
"""

import hashlib
import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "src"))

from graphprop.rng import Pcg32  # noqa: E402

N = 200
BLOCKS = 4
BLOCK_SIZE = N // BLOCKS
P_IN = 0.10
P_OUT = 0.01
DIM = 16
SEED = 20260814
TRAIN_PER_CLASS = 5
VAL_PER_CLASS = 10
TEST_PER_CLASS = 25


def sha256_file(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def main(out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    rng = Pcg32(SEED)
    labels = [i // BLOCK_SIZE for i in range(N)]

    edges = []
    for u in range(N):
        for v in range(u + 1, N):
            p = P_IN if labels[u] == labels[v] else P_OUT
            if rng.random() < p:
                edges.append((u, v))

    centers = [[rng.uniform(-1.0, 1.0) for _ in range(DIM)] for _ in range(BLOCKS)]
    features = []
    for i in range(N):
        c = centers[labels[i]]
        features.append([c[j] + 0.3 * rng.uniform(-1.0, 1.0) for j in range(DIM)])

    with open(os.path.join(out_dir, "graph.txt"), "w", newline="\n") as fh:
        fh.write(f"{N} {len(edges)}\n")
        for u, v in edges:
            fh.write(f"{u} {v}\n")

    with open(os.path.join(out_dir, "features.txt"), "w", newline="\n") as fh:
        fh.write(f"{N} {DIM} {N * DIM}\n")
        for i in range(N):
            for j in range(DIM):
                fh.write(f"{i} {j} {features[i][j]!r}\n")

    with open(os.path.join(out_dir, "labels.txt"), "w", newline="\n") as fh:
        fh.write(f"{N} {BLOCKS}\n")
        for i, lab in enumerate(labels):
            fh.write(f"{i} {lab}\n")

    train, val, test = [], [], []
    for b in range(BLOCKS):
        base = b * BLOCK_SIZE
        train += range(base, base + TRAIN_PER_CLASS)
        val += range(base + TRAIN_PER_CLASS, base + TRAIN_PER_CLASS + VAL_PER_CLASS)
        test += range(base + BLOCK_SIZE - TEST_PER_CLASS, base + BLOCK_SIZE)
    with open(os.path.join(out_dir, "splits.txt"), "w", newline="\n") as fh:
        fh.write("train: " + " ".join(map(str, train)) + "\n")
        fh.write("val: " + " ".join(map(str, val)) + "\n")
        fh.write("test: " + " ".join(map(str, test)) + "\n")

    files = ["graph.txt", "features.txt", "labels.txt", "splits.txt"]
    manifest = {
        "name": "synth200",
        "nodes": N,
        "edges": len(edges),
        "classes": BLOCKS,
        "feature_dim": DIM,
        "splits": {"train": len(train), "val": len(val), "test": len(test)},
        "generator": "tools/make_synth.py",
        "seed": SEED,
        "block_model": {"p_in": P_IN, "p_out": P_OUT, "block_size": BLOCK_SIZE},
        "sha256": {f: sha256_file(os.path.join(out_dir, f)) for f in files},
    }
    with open(os.path.join(out_dir, "manifest.json"), "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {out_dir}: {N} nodes, {len(edges)} edges")


if __name__ == "__main__":
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    default = os.path.join(root, "src", "graphprop", "data", "synth200")
    main(sys.argv[1] if len(sys.argv) > 1 else default)
