# Copyright 2026 The cvegnn Authors
# SPDX-License-Identifier: Apache-2.0
"""Builds a tiny fake Planetoid set, converts it and trains one epoch on it."""

import pickle
import subprocess
import sys
import tempfile
from collections import defaultdict
from pathlib import Path

import numpy as np
import scipy.sparse as sp

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tools"))
import planetoid_to_dir  # noqa: E402


def dump(path, obj):
    with open(path, "wb") as f:
        pickle.dump(obj, f)


def main(cli):
    rng = np.random.default_rng(0)
    with tempfile.TemporaryDirectory() as tmp:
        raw, out = Path(tmp) / "raw", Path(tmp) / "out"
        raw.mkdir()
        # Nodes 0..6 in allx, test ids 9 and 7 (in that order), id 8 missing.
        allx = sp.csr_matrix(rng.integers(0, 2, size=(7, 4)).astype(float) + np.eye(7, 4))
        ally = np.eye(2)[[0, 1, 0, 1, 0, 1, 0]]
        tx = sp.csr_matrix(np.array([[0, 0, 0, 3.0], [1.0, 0, 0, 0]]))
        ty = np.eye(2)[[1, 0]]
        graph = defaultdict(list, {0: [1, 2], 1: [0], 2: [0, 2], 7: [9], 9: [7, 3], 3: [9], 8: []})
        for k, v in {"x": allx[:2], "y": ally[:2], "tx": tx, "ty": ty, "allx": allx, "ally": ally,
                     "graph": graph}.items():
            dump(raw / f"ind.fake.{k}", v)
        (raw / "ind.fake.test.index").write_text("9\n7\n")

        n, d, c, m = planetoid_to_dir.convert(raw, "fake", out, val_size=2)
        assert (n, d, c, m) == (10, 4, 2, 4), (n, d, c, m)
        feats = np.frombuffer((out / "features.bin").read_bytes()[12:], dtype="<f4").reshape(10, 4)
        assert np.allclose(feats[9], [0, 0, 0, 1]) and np.allclose(feats[7], [1, 0, 0, 0]), feats
        assert np.allclose(feats[8], 0)
        assert np.allclose(feats[:7].sum(axis=1), 1)
        labels = dict(tuple(map(int, line.split())) for line in (out / "labels.tsv").read_text().split("\n") if line)
        assert labels[9] == 1 and labels[7] == 0 and 8 not in labels, labels
        assert (out / "train.txt").read_text().split() == ["0", "1"]
        assert (out / "val.txt").read_text().split() == ["2", "3"]
        assert (out / "test.txt").read_text().split() == ["7", "9"]
        assert (out / "edges.tsv").read_text().split("\n")[:4] == ["0\t1", "0\t2", "3\t9", "7\t9"]

        subprocess.run([cli, "train", "--dataset-dir", str(out), "--epochs", "1", "--batch-size", "2",
                        "--hidden-dim", "3"], check=True)
    print("planetoid conversion ok")


if __name__ == "__main__":
    main(sys.argv[1])
