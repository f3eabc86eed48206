"""Closed-form nonnegative node-connectivity matrices.

Each builder turns a graph into the sparse nonnegative matrix that a
random-walk embedding method implicitly factorizes:

* ``deepwalk_matrix`` - entrywise positive part of
  ``log(vol(G) * P / degree_j) - log(shift)`` with ``P`` the window-averaged
  walk-sum matrix,
* ``line_matrix`` - the window-1 special case,
* ``grarep_step_matrix`` - positive part of
  ``log(column-normalized step-p transition power) - log(shift)``.

Logs are only ever evaluated on strictly positive walk probabilities;
structural zeros stay exactly zero, so the support of the result is always
contained in the support of the underlying walk matrix.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from ._validation import check_positive_float, check_positive_int
from .errors import DegenerateInputError, ParseError
from .graph import DEFAULT_DENSE_NODE_CEILING, Graph, transition_matrix, walk_sum

#: Entries at or below this magnitude are dropped from sparse storage.
DROP_TOL = 1e-12

_CACHE_MAGIC = b"BNECM1\n"


@dataclass(frozen=True)
class ConnectivityConfig:
    """Recipe that produced a connectivity matrix.

    ``kind`` is one of ``"deepwalk"``, ``"line"``, ``"grarep"``; ``window``
    applies to deepwalk, ``step`` to grarep, and ``shift`` (the log shift,
    a.k.a. negative-sample count) to all of them.
    """

    kind: str
    shift: float
    window: int | None = None
    step: int | None = None

    def __post_init__(self):
        if self.kind not in ("deepwalk", "line", "grarep"):
            raise ValueError(f"unknown connectivity kind {self.kind!r}")
        check_positive_float(self.shift, "shift")
        if self.window is not None:
            check_positive_int(self.window, "window")
        if self.step is not None:
            check_positive_int(self.step, "step")


@dataclass(frozen=True)
class ConnectivityMatrix:
    """Nonnegative sparse factorization target plus its provenance."""

    matrix: sp.csr_array
    config: ConnectivityConfig
    graph_fingerprint: str

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def fingerprint(self) -> str:
        """Content hash over the recipe, source graph, and stored entries."""
        recipe = (
            self.config.kind,
            self.config.shift,
            self.config.window,
            self.config.step,
            self.graph_fingerprint,
            self.matrix.shape,
        )
        digest = hashlib.sha256(repr(recipe).encode("utf-8"))
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        digest.update(coo.row[order].astype(np.int64).tobytes())
        digest.update(coo.col[order].astype(np.int64).tobytes())
        digest.update(coo.data[order].astype(np.float64).tobytes())
        return digest.hexdigest()


def _sparsify_clipped(dense: np.ndarray) -> sp.csr_array:
    dense[dense < DROP_TOL] = 0.0
    out = sp.csr_array(dense)
    out.eliminate_zeros()
    out.sort_indices()
    return out


def deepwalk_matrix(
    graph: Graph,
    window: int = 10,
    shift: float = 5.0,
    max_dense_nodes: int = DEFAULT_DENSE_NODE_CEILING,
) -> ConnectivityMatrix:
    """Window-averaged random-walk connectivity matrix, clipped at zero.

    Entry (i, j) is ``max(log(vol(G) * P_ij / (degree_j * shift)), 0)`` where
    ``P`` averages the first ``window`` transition powers.  Defaults follow
    the common skip-gram setup: window 10, shift 5.
    """
    check_positive_int(window, "window")
    check_positive_float(shift, "shift")
    walk = walk_sum(graph, window, max_dense_nodes=max_dense_nodes)
    # scale = vol(G) * P_ij / (degree_j * shift); log applied only where > 1
    scaled = walk * (graph.volume / shift / graph.degrees)[np.newaxis, :]
    values = np.zeros_like(scaled)
    positive = scaled > 1.0
    values[positive] = np.log(scaled[positive])
    config = ConnectivityConfig(kind="deepwalk", shift=shift, window=window)
    return ConnectivityMatrix(_sparsify_clipped(values), config, graph.fingerprint())


def line_matrix(
    graph: Graph,
    shift: float = 5.0,
    max_dense_nodes: int = DEFAULT_DENSE_NODE_CEILING,
) -> ConnectivityMatrix:
    """First-order connectivity matrix: the window-1 walk matrix."""
    built = deepwalk_matrix(graph, 1, shift, max_dense_nodes=max_dense_nodes)
    config = ConnectivityConfig(kind="line", shift=shift, window=1)
    return ConnectivityMatrix(built.matrix, config, built.graph_fingerprint)


def grarep_step_matrix(
    graph: Graph, step: int, shift: float | None = None
) -> ConnectivityMatrix:
    """Single-step transition-power connectivity matrix, clipped at zero.

    The step-``step`` transition power is column-normalized inside the log:
    entry (i, j) is ``max(log(T_ij / colsum_j) - log(shift), 0)`` on the
    support of the power ``T``.  ``shift`` defaults to ``1 / n``.
    """
    check_positive_int(step, "step")
    if shift is None:
        shift = 1.0 / graph.n
    check_positive_float(shift, "shift")
    base = transition_matrix(graph)
    power = base
    for _ in range(step - 1):
        power = sp.csr_array(power @ base)
    power.eliminate_zeros()
    column_sums = np.asarray(power.sum(axis=0), dtype=np.float64).ravel()
    empty = np.flatnonzero(column_sums == 0)
    if empty.size:
        name = graph.node_ids[empty[0]]
        raise DegenerateInputError(
            f"column {empty[0]} (node {name!r}) of the step-{step} transition "
            "power sums to zero; its log-ratio is undefined"
        )
    coo = power.tocoo()
    values = np.log(coo.data / column_sums[coo.col]) - np.log(shift)
    np.maximum(values, 0.0, out=values)
    values[values < DROP_TOL] = 0.0
    out = sp.csr_array(
        sp.coo_array((values, (coo.row, coo.col)), shape=power.shape)
    )
    out.eliminate_zeros()
    out.sort_indices()
    config = ConnectivityConfig(kind="grarep", shift=shift, step=step)
    return ConnectivityMatrix(out, config, graph.fingerprint())


def save_connectivity(conn: ConnectivityMatrix, path: str | Path) -> None:
    """Write a connectivity matrix to the binary cache format.

    Layout: magic, length-prefixed JSON header (dimensions, recipe, graph
    fingerprint, entry count), then raw int64 row indices, int64 column
    indices, and float64 values.  The round-trip is exact to the bit.
    """
    coo = conn.matrix.tocoo()
    header = {
        "n": conn.n,
        "kind": conn.config.kind,
        "window": conn.config.window,
        "shift": conn.config.shift,
        "step": conn.config.step,
        "graph_fingerprint": conn.graph_fingerprint,
        "nnz": int(coo.nnz),
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as handle:
        handle.write(_CACHE_MAGIC)
        handle.write(struct.pack("<Q", len(blob)))
        handle.write(blob)
        handle.write(coo.row.astype(np.int64).tobytes())
        handle.write(coo.col.astype(np.int64).tobytes())
        handle.write(coo.data.astype(np.float64).tobytes())


def load_connectivity(path: str | Path) -> ConnectivityMatrix:
    """Read a connectivity matrix written by :func:`save_connectivity`."""
    with open(path, "rb") as handle:
        magic = handle.read(len(_CACHE_MAGIC))
        if magic != _CACHE_MAGIC:
            raise ParseError(f"{path}: not a connectivity cache file")
        (length,) = struct.unpack("<Q", handle.read(8))
        header = json.loads(handle.read(length).decode("utf-8"))
        n = header["n"]
        nnz = header["nnz"]
        rows = np.frombuffer(handle.read(8 * nnz), dtype=np.int64)
        cols = np.frombuffer(handle.read(8 * nnz), dtype=np.int64)
        data = np.frombuffer(handle.read(8 * nnz), dtype=np.float64)
    if rows.size != nnz or cols.size != nnz or data.size != nnz:
        raise ParseError(f"{path}: truncated connectivity cache")
    matrix = sp.csr_array(sp.coo_array((data, (rows, cols)), shape=(n, n)))
    matrix.sort_indices()
    config = ConnectivityConfig(
        kind=header["kind"],
        shift=header["shift"],
        window=header["window"],
        step=header["step"],
    )
    return ConnectivityMatrix(matrix, config, header["graph_fingerprint"])
