"""Shared builders and brute-force oracles for the test suite.

The oracles deliberately take the dumbest correct path (dense arrays,
per-class counting loops) so they share no code with the implementations
they check.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from boostne import Graph


def random_graph(rng, n, extra_edges=None, weighted=False):
    """Ring plus random chords: connected, every degree at least 2."""
    if extra_edges is None:
        extra_edges = n
    accum: dict[tuple[int, int], float] = {}

    def add(i, j, w):
        key = (i, j) if i < j else (j, i)
        accum[key] = accum.get(key, 0.0) + w

    for i in range(n):
        w = rng.uniform(0.5, 2.0) if weighted else 1.0
        add(i, (i + 1) % n, w)
    for _ in range(extra_edges):
        i, j = rng.integers(0, n, size=2)
        if i == j:
            continue
        w = rng.uniform(0.5, 2.0) if weighted else 1.0
        add(int(i), int(j), w)
    pairs = sorted(accum)
    rows = [p[0] for p in pairs] + [p[1] for p in pairs]
    cols = [p[1] for p in pairs] + [p[0] for p in pairs]
    vals = [accum[p] for p in pairs] * 2
    adj = sp.csr_array(sp.coo_array((vals, (rows, cols)), shape=(n, n)))
    return Graph.from_adjacency(adj)


def random_sparse_nonneg(rng, n, m, density=0.4):
    """Random sparse nonnegative matrix with at least one positive entry."""
    mask = rng.random((n, m)) < density
    dense = np.where(mask, rng.uniform(0.1, 3.0, size=(n, m)), 0.0)
    if not dense.any():
        dense[rng.integers(0, n), rng.integers(0, m)] = rng.uniform(0.5, 2.0)
    return sp.csr_array(dense)


def dense_walk_oracle(graph, window):
    """Brute-force window-averaged transition powers via dense matmul."""
    dense = graph.adjacency.toarray()
    step = dense / dense.sum(axis=1, keepdims=True)
    total = np.zeros_like(step)
    power = np.eye(graph.n)
    for _ in range(window):
        power = power @ step
        total += power
    return total / window


def dense_deepwalk_oracle(graph, window, shift):
    """Brute-force clipped log connectivity from the dense walk average."""
    walk = dense_walk_oracle(graph, window)
    scaled = graph.volume * walk / graph.degrees[np.newaxis, :] / shift
    out = np.zeros_like(scaled)
    mask = scaled > 1.0
    out[mask] = np.log(scaled[mask])
    return out


def dense_grarep_oracle(graph, step, shift):
    """Brute-force column-normalized transition-power connectivity."""
    dense = graph.adjacency.toarray()
    trans = dense / dense.sum(axis=1, keepdims=True)
    power = np.linalg.matrix_power(trans, step)
    colsum = power.sum(axis=0)
    out = np.zeros_like(power)
    mask = power > 0
    out[mask] = np.log(power[mask] / colsum[np.nonzero(mask)[1]]) - np.log(shift)
    return np.maximum(out, 0.0)


def dense_objective_oracle(matrix, u, v):
    """Frobenius objective via a fully dense difference."""
    diff = matrix.toarray() - u @ v
    return float(np.sum(diff * diff))


def f1_oracle(predicted, truth, n_classes):
    """Per-class confusion counts by explicit membership loops."""
    micro_num = 0
    micro_den = 0
    per_class = []
    for j in range(n_classes):
        tp = sum(1 for p, t in zip(predicted, truth) if j in p and j in t)
        fp = sum(1 for p, t in zip(predicted, truth) if j in p and j not in t)
        fn = sum(1 for p, t in zip(predicted, truth) if j not in p and j in t)
        micro_num += 2 * tp
        micro_den += 2 * tp + fp + fn
        per_class.append(2 * tp / (2 * tp + fp + fn) if tp + fp + fn else 0.0)
    micro = micro_num / micro_den if micro_den else 0.0
    return micro, sum(per_class) / n_classes


def random_label_instance(rng, n_nodes, n_classes, multi=True):
    """Random (predicted, truth) label sets covering edge cases."""
    predicted = []
    truth = []
    for _ in range(n_nodes):
        max_k = n_classes if multi else 1
        t = rng.integers(1, max_k + 1)
        p = rng.integers(1, max_k + 1)
        truth.append(frozenset(rng.choice(n_classes, size=t, replace=False).tolist()))
        predicted.append(
            frozenset(rng.choice(n_classes, size=p, replace=False).tolist())
        )
    return predicted, truth
