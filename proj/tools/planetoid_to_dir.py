#!/usr/bin/env python3
# Copyright 2026 The cvegnn Authors
# SPDX-License-Identifier: Apache-2.0
"""Convert Planetoid `ind.<name>.*` pickles into a cve_gnn dataset directory.

    python3 tools/planetoid_to_dir.py --raw planetoid/data --name cora --out data/cora

Reads ind.<name>.{x,y,tx,ty,allx,ally,graph,test.index} and writes edges.tsv,
features.bin, labels.tsv, train.txt, val.txt, test.txt and node_ids.txt.

The split is the usual public one: the first |y| nodes train, the next 500
validate, and the nodes listed in test.index test. Test ids missing from the
pickles (CiteSeer has a few isolated ones) get zero features and no label.
Features are row-normalized unless --no-row-normalize is given.
"""

import argparse
import pickle
import struct
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp


def load_pickle(path):
    with open(path, "rb") as f:
        if sys.version_info > (3, 0):
            return pickle.load(f, encoding="latin1")
        return pickle.load(f)


def dense(m):
    return m.toarray() if sp.issparse(m) else np.asarray(m)


def convert(raw, name, out, row_normalize=True, val_size=500):
    parts = {k: load_pickle(raw / f"ind.{name}.{k}") for k in ("x", "y", "tx", "ty", "allx", "ally", "graph")}
    test_index = [int(line) for line in (raw / f"ind.{name}.test.index").read_text().split()]
    test_sorted = sorted(test_index)

    tx, ty = dense(parts["tx"]), dense(parts["ty"])
    span = test_sorted[-1] - test_sorted[0] + 1
    if span != len(test_sorted):
        # Pad missing test ids with empty rows.
        tx_full = np.zeros((span, tx.shape[1]))
        ty_full = np.zeros((span, ty.shape[1]))
        tx_full[np.array(test_sorted) - test_sorted[0], :] = tx
        ty_full[np.array(test_sorted) - test_sorted[0], :] = ty
        tx, ty = tx_full, ty_full

    features = np.vstack([dense(parts["allx"]), tx]).astype(np.float64)
    onehot = np.vstack([dense(parts["ally"]), ty])
    # Test rows arrive in test.index order; place them at their node ids.
    features[test_index, :] = features[test_sorted, :]
    onehot[test_index, :] = onehot[test_sorted, :]

    graph = parts["graph"]
    n = max(features.shape[0], max(graph.keys()) + 1)
    if features.shape[0] < n:
        features = np.vstack([features, np.zeros((n - features.shape[0], features.shape[1]))])
        onehot = np.vstack([onehot, np.zeros((n - onehot.shape[0], onehot.shape[1]))])

    if row_normalize:
        sums = features.sum(axis=1, keepdims=True)
        sums[sums == 0] = 1.0
        features = features / sums

    edges = set()
    for u, nbrs in graph.items():
        for v in nbrs:
            if u != v:
                edges.add((min(u, v), max(u, v)))

    n_train = dense(parts["y"]).shape[0]
    train = list(range(n_train))
    val = list(range(n_train, n_train + val_size))
    labeled = onehot.sum(axis=1) > 0
    test = [v for v in test_sorted if labeled[v]]

    out.mkdir(parents=True, exist_ok=True)
    with open(out / "edges.tsv", "w") as f:
        for u, v in sorted(edges):
            f.write(f"{u}\t{v}\n")
    with open(out / "features.bin", "wb") as f:
        f.write(b"GNNF")
        f.write(struct.pack("<II", features.shape[0], features.shape[1]))
        f.write(features.astype("<f4").tobytes(order="C"))
    with open(out / "labels.tsv", "w") as f:
        for v in range(n):
            if labeled[v]:
                f.write(f"{v}\t{int(onehot[v].argmax())}\n")
    for fname, ids in (("train.txt", train), ("val.txt", val), ("test.txt", test)):
        with open(out / fname, "w") as f:
            f.writelines(f"{v}\n" for v in ids)
    # Planetoid ids are already dense; the mapping is the identity.
    with open(out / "node_ids.txt", "w") as f:
        f.write("# node_id\tplanetoid_id\n")
        f.writelines(f"{v}\t{v}\n" for v in range(n))
    return n, features.shape[1], onehot.shape[1], len(edges)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--raw", type=Path, required=True, help="directory holding ind.<name>.* files")
    ap.add_argument("--name", required=True, help="cora, citeseer or pubmed")
    ap.add_argument("--out", type=Path, required=True, help="output dataset directory")
    ap.add_argument("--no-row-normalize", action="store_true", help="keep raw feature values")
    args = ap.parse_args(argv)
    n, d, c, m = convert(args.raw, args.name, args.out, row_normalize=not args.no_row_normalize)
    print(f"{args.name}: {n} nodes, {m} edges, {d} features, {c} classes -> {args.out}")


if __name__ == "__main__":
    main()
