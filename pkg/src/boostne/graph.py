"""Undirected weighted graphs in compressed sparse row form.

Ingestion normalizes raw edge lists into a canonical symmetric adjacency
matrix: duplicate (i, j)/(j, i) lines are collapsed into one undirected edge
with summed weight, self-loops are dropped, and node ids (arbitrary string
tokens) are mapped to dense indices in first-seen order.  Disconnected
components are processed as-is; random-walk mass simply stays within each
component.

The derived matrices live here as well: the row-stochastic transition matrix
and the window-averaged walk-sum matrix that the connectivity builders
consume.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import IO, Iterable, Union

import numpy as np
import scipy.sparse as sp

from ._validation import check_adjacency, check_positive_int
from .errors import (
    DegenerateInputError,
    ParseError,
    ResourceLimitError,
    ZeroDegreeError,
)

#: Dense n x n allocations above this node count are refused by default.
DEFAULT_DENSE_NODE_CEILING = 20_000

EdgeSource = Union[str, Path, IO[str], Iterable[str]]


@dataclass(frozen=True)
class Graph:
    """Immutable undirected weighted graph.

    Attributes
    ----------
    adjacency : scipy.sparse.csr_array
        Symmetric nonnegative matrix with zero diagonal; stored entries are
        strictly positive.
    node_ids : tuple of str
        External id for each internal index, in first-seen order.
    degrees : numpy.ndarray
        Weighted degree of each node (row sums of the adjacency).
    """

    adjacency: sp.csr_array
    node_ids: tuple[str, ...]
    degrees: np.ndarray

    @classmethod
    def from_adjacency(cls, matrix, node_ids: Iterable[str] | None = None) -> "Graph":
        """Build a graph from an adjacency matrix (sparse or dense).

        The matrix must be square, symmetric, and nonnegative; diagonal
        entries are dropped.  When ``node_ids`` is omitted, stringified
        indices are used.
        """
        adj = check_adjacency(matrix)
        n = adj.shape[0]
        if node_ids is None:
            ids = tuple(str(i) for i in range(n))
        else:
            ids = tuple(str(v) for v in node_ids)
            if len(ids) != n:
                raise ValueError(
                    f"got {len(ids)} node ids for an adjacency with {n} rows"
                )
            if len(set(ids)) != n:
                raise ValueError("node ids must be unique")
        degrees = np.asarray(adj.sum(axis=1), dtype=np.float64).ravel()
        return cls(adjacency=adj, node_ids=ids, degrees=degrees)

    @property
    def n(self) -> int:
        """Number of nodes."""
        return self.adjacency.shape[0]

    @property
    def edge_count(self) -> int:
        """Number of undirected edges."""
        return self.adjacency.nnz // 2

    @property
    def volume(self) -> float:
        """Sum of all adjacency entries (twice the total edge weight)."""
        return float(self.degrees.sum())

    @cached_property
    def index_of(self) -> dict[str, int]:
        """Mapping from external node id to internal index."""
        return {name: i for i, name in enumerate(self.node_ids)}

    def fingerprint(self) -> str:
        """SHA-256 over the canonical serialized form of this graph."""
        digest = hashlib.sha256()
        digest.update(repr(self.node_ids).encode())
        coo = self.adjacency.tocoo()
        order = np.lexsort((coo.col, coo.row))
        digest.update(coo.row[order].astype(np.int64).tobytes())
        digest.update(coo.col[order].astype(np.int64).tobytes())
        digest.update(coo.data[order].astype(np.float64).tobytes())
        return digest.hexdigest()


def _iter_lines(source: EdgeSource):
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as handle:
            yield from handle
    else:
        yield from source


def load_edge_list(source: EdgeSource, drop_isolated: bool = False) -> Graph:
    """Parse a whitespace-separated ``src dst [weight]`` edge list.

    Lines starting with ``#`` and blank lines are ignored.  The weight
    defaults to 1.  Duplicate pairs in either orientation are collapsed into
    one undirected edge with summed weight; self-loops are dropped (their
    endpoints still claim a node id).  With ``drop_isolated=True``, nodes
    that end up with zero degree are removed from the graph.

    Raises
    ------
    ParseError
        On a malformed line (wrong token count, non-numeric or nonpositive
        weight), with the 1-based line number.
    DegenerateInputError
        When no edges survive ingestion.
    """
    index: dict[str, int] = {}
    names: list[str] = []
    weights: dict[tuple[int, int], float] = {}

    def intern(token: str) -> int:
        idx = index.get(token)
        if idx is None:
            idx = len(names)
            index[token] = idx
            names.append(token)
        return idx

    for line_number, raw in enumerate(_iter_lines(source), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) not in (2, 3):
            raise ParseError(
                f"expected 'src dst [weight]', got {len(tokens)} tokens",
                line_number,
            )
        weight = 1.0
        if len(tokens) == 3:
            try:
                weight = float(tokens[2])
            except ValueError:
                raise ParseError(
                    f"non-numeric weight {tokens[2]!r}", line_number
                ) from None
            if not np.isfinite(weight) or weight <= 0:
                raise ParseError(f"weight must be > 0, got {tokens[2]}", line_number)
        src = intern(tokens[0])
        dst = intern(tokens[1])
        if src == dst:
            continue
        key = (src, dst) if src < dst else (dst, src)
        weights[key] = weights.get(key, 0.0) + weight

    if not weights:
        raise DegenerateInputError("edge list contains no usable edges")

    n = len(names)
    pairs = np.array(sorted(weights), dtype=np.int64)
    vals = np.array([weights[tuple(p)] for p in pairs], dtype=np.float64)
    rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
    data = np.concatenate([vals, vals])
    adj = sp.csr_array(sp.coo_array((data, (rows, cols)), shape=(n, n)))
    adj.sort_indices()

    graph = Graph.from_adjacency(adj, names)
    if drop_isolated:
        keep = np.flatnonzero(graph.degrees > 0)
        if keep.size < graph.n:
            sub = graph.adjacency[keep, :][:, keep]
            kept_ids = [graph.node_ids[i] for i in keep]
            graph = Graph.from_adjacency(sub, kept_ids)
    return graph


def save_edge_list(graph: Graph, target: str | Path | IO[str]) -> None:
    """Write the canonical edge list (upper triangle, index order).

    The file starts with one self-loop line per node in index order.  Loading
    drops self-loops but registers their endpoint, so a round-trip reproduces
    the node ordering (and any isolated nodes) exactly.  Weights are written
    with full round-trip precision.
    """
    declarations = [f"{name} {name} 1\n" for name in graph.node_ids]
    coo = sp.triu(graph.adjacency, k=1).tocoo()
    order = np.lexsort((coo.col, coo.row))
    lines = [
        f"{graph.node_ids[i]} {graph.node_ids[j]} {float(w)!r}\n"
        for i, j, w in zip(coo.row[order], coo.col[order], coo.data[order])
    ]
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as handle:
            handle.writelines(declarations + lines)
    else:
        target.writelines(declarations + lines)


def transition_matrix(graph: Graph) -> sp.csr_array:
    """Row-stochastic one-step random-walk matrix (degree-normalized adjacency).

    Raises
    ------
    ZeroDegreeError
        If any node has zero degree; the row would be undefined.  Callers can
        pre-drop such nodes via ``load_edge_list(..., drop_isolated=True)``
        (CLI flag ``--drop-isolated``).
    """
    zero = np.flatnonzero(graph.degrees == 0)
    if zero.size:
        names = tuple(graph.node_ids[i] for i in zero[:10])
        listed = ", ".join(names)
        suffix = "" if zero.size <= 10 else f" (+{zero.size - 10} more)"
        raise ZeroDegreeError(
            f"{zero.size} zero-degree node(s): {listed}{suffix}; "
            "drop them first (--drop-isolated) or fix the input",
            nodes=names,
        )
    inv_deg = sp.dia_array(
        (1.0 / graph.degrees[np.newaxis, :], [0]), shape=(graph.n, graph.n)
    )
    out = sp.csr_array(inv_deg @ graph.adjacency)
    out.sort_indices()
    return out


def walk_sum(
    graph: Graph,
    window: int,
    max_dense_nodes: int = DEFAULT_DENSE_NODE_CEILING,
) -> np.ndarray:
    """Average of the first ``window`` transition-matrix powers, dense.

    Accumulates sparse-times-dense products; the k-th power is never formed
    by dense-dense multiplication.  Every row sums to 1 (within roundoff)
    because each power is row-stochastic.

    Raises
    ------
    ResourceLimitError
        If the graph has more than ``max_dense_nodes`` nodes; the result is
        a dense n x n array and the allocation is refused above the ceiling.
    """
    check_positive_int(window, "window")
    if graph.n > max_dense_nodes:
        raise ResourceLimitError(
            f"walk_sum needs a dense {graph.n} x {graph.n} array; the ceiling "
            f"is {max_dense_nodes} nodes (raise max_dense_nodes to override)"
        )
    step = transition_matrix(graph)
    current = step.toarray()
    total = current.copy()
    for _ in range(window - 1):
        current = step @ current
        total += current
    total /= window
    return total
