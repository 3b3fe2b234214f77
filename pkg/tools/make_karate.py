#!/usr/bin/env python3
"""Regenerate the bundled karate dataset (src/graphprop/data/karate).

The 34-node, 78-edge club friendship graph with the standard two-faction
labels. Features are identity rows (pure-structure dataset); the splits put
the two faction heads in train and the most contested members in val.
"""

import hashlib
import json
import os
import sys

# fmt: off
EDGES = [
    (0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (0, 7), (0, 8), (0, 10),
    (0, 11), (0, 12), (0, 13), (0, 17), (0, 19), (0, 21), (0, 31),
    (1, 2), (1, 3), (1, 7), (1, 13), (1, 17), (1, 19), (1, 21), (1, 30),
    (2, 3), (2, 7), (2, 8), (2, 9), (2, 13), (2, 27), (2, 28), (2, 32),
    (3, 7), (3, 12), (3, 13),
    (4, 6), (4, 10),
    (5, 6), (5, 10), (5, 16),
    (6, 16),
    (8, 30), (8, 32), (8, 33),
    (9, 33),
    (13, 33),
    (14, 32), (14, 33),
    (15, 32), (15, 33),
    (18, 32), (18, 33),
    (19, 33),
    (20, 32), (20, 33),
    (22, 32), (22, 33),
    (23, 25), (23, 27), (23, 29), (23, 32), (23, 33),
    (24, 25), (24, 27), (24, 31),
    (25, 31),
    (26, 29), (26, 33),
    (27, 33),
    (28, 31), (28, 33),
    (29, 32), (29, 33),
    (30, 32), (30, 33),
    (31, 32), (31, 33),
    (32, 33),
]
# fmt: on

FACTION_A = {0, 1, 2, 3, 4, 5, 6, 7, 8, 10, 11, 12, 13, 16, 17, 19, 21}

N = 34
TRAIN = [0, 33]
VAL = [1, 2, 31, 32]


def sha256_file(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def main(out_dir: str) -> None:
    assert len(EDGES) == 78, len(EDGES)
    assert len(set(EDGES)) == 78
    assert all(0 <= u < v < N for u, v in EDGES)
    os.makedirs(out_dir, exist_ok=True)

    with open(os.path.join(out_dir, "graph.txt"), "w", newline="\n") as fh:
        fh.write(f"{N} {len(EDGES)}\n")
        for u, v in EDGES:
            fh.write(f"{u} {v}\n")

    with open(os.path.join(out_dir, "features.txt"), "w", newline="\n") as fh:
        fh.write(f"{N} {N} {N}\n")
        for i in range(N):
            fh.write(f"{i} {i} 1\n")

    labels = [0 if i in FACTION_A else 1 for i in range(N)]
    with open(os.path.join(out_dir, "labels.txt"), "w", newline="\n") as fh:
        fh.write(f"{N} 2\n")
        for i, lab in enumerate(labels):
            fh.write(f"{i} {lab}\n")

    held = set(TRAIN) | set(VAL)
    test = [i for i in range(N) if i not in held]
    with open(os.path.join(out_dir, "splits.txt"), "w", newline="\n") as fh:
        fh.write("train: " + " ".join(map(str, TRAIN)) + "\n")
        fh.write("val: " + " ".join(map(str, VAL)) + "\n")
        fh.write("test: " + " ".join(map(str, test)) + "\n")

    files = ["graph.txt", "features.txt", "labels.txt", "splits.txt"]
    manifest = {
        "name": "karate",
        "nodes": N,
        "edges": len(EDGES),
        "classes": 2,
        "feature_dim": N,
        "splits": {"train": len(TRAIN), "val": len(VAL), "test": len(test)},
        "generator": "tools/make_karate.py",
        "sha256": {f: sha256_file(os.path.join(out_dir, f)) for f in files},
    }
    with open(os.path.join(out_dir, "manifest.json"), "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {out_dir}: {N} nodes, {len(EDGES)} edges")


if __name__ == "__main__":
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    default = os.path.join(root, "src", "graphprop", "data", "karate")
    main(sys.argv[1] if len(sys.argv) > 1 else default)
