"""Estimator-style front end for the boosted embedding pipeline.

``BoostNE`` wires graph ingestion, connectivity construction, and the
boosted factorization into the familiar fit/transform shape: construct
with hyperparameters, ``fit`` on a graph or adjacency matrix, read the
``embedding_`` attribute or call ``transform``.  The embedding is
transductive, so ``transform`` returns rows for the fitted graph only.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ._validation import check_adjacency
from .boost import BoostConfig, boostne, residual_trace
from .connectivity import (
    DEFAULT_DENSE_NODE_CEILING,
    deepwalk_matrix,
    grarep_step_matrix,
    line_matrix,
)
from .graph import Graph


class BoostNE(BaseEstimator):
    """Multi-level nonnegative node embedding of an undirected graph.

    Parameters
    ----------
    matrix : {"deepwalk", "line", "grarep"}, default "deepwalk"
        Which closed-form connectivity matrix to factorize.
    dimension : int, default 128
        Total embedding width; must be divisible by ``levels``.
    levels : int, default 8
        Number of boosting stages; each contributes dimension/levels
        columns fit on the residual of the previous stages.
    window : int, default 10
        Walk window for the deepwalk matrix.
    shift : float or None, default None
        Log shift (negative-sample count).  None picks 5 for the
        deepwalk and line matrices and 1/n for the grarep matrix.
    step : int, default 1
        Transition power for the grarep matrix.
    max_iters, rel_tol, epsilon :
        Per-level factorization controls.
    seed : int, default 0
        Base seed; level i uses ``seed + i``.
    max_dense_nodes : int, default 20000
        Guard on the dense walk accumulation for deepwalk/line.
    allow_wide : bool, default False
        Permit ``dimension >= n``.

    Attributes
    ----------
    graph_ : Graph
        The ingested graph.
    connectivity_ : ConnectivityMatrix
        The factorization target that was built.
    result_ : MultiLevelEmbedding
        Full per-level factors and residual statistics.
    embedding_ : ndarray of shape (n, dimension)
        The concatenated nonnegative embedding.
    """

    def __init__(
        self,
        matrix: str = "deepwalk",
        dimension: int = 128,
        levels: int = 8,
        window: int = 10,
        shift: float | None = None,
        step: int = 1,
        max_iters: int = 200,
        rel_tol: float = 1e-4,
        epsilon: float = 1e-12,
        seed: int = 0,
        max_dense_nodes: int = DEFAULT_DENSE_NODE_CEILING,
        allow_wide: bool = False,
    ):
        self.matrix = matrix
        self.dimension = dimension
        self.levels = levels
        self.window = window
        self.shift = shift
        self.step = step
        self.max_iters = max_iters
        self.rel_tol = rel_tol
        self.epsilon = epsilon
        self.seed = seed
        self.max_dense_nodes = max_dense_nodes
        self.allow_wide = allow_wide

    def _as_graph(self, X) -> Graph:
        if isinstance(X, Graph):
            return X
        return Graph.from_adjacency(check_adjacency(X))

    def _build_connectivity(self, graph: Graph):
        if self.matrix == "deepwalk":
            return deepwalk_matrix(
                graph,
                window=self.window,
                shift=5.0 if self.shift is None else self.shift,
                max_dense_nodes=self.max_dense_nodes,
            )
        if self.matrix == "line":
            return line_matrix(
                graph,
                shift=5.0 if self.shift is None else self.shift,
                max_dense_nodes=self.max_dense_nodes,
            )
        if self.matrix == "grarep":
            return grarep_step_matrix(graph, self.step, shift=self.shift)
        raise ValueError(f"unknown matrix kind {self.matrix!r}")

    def fit(self, X, y=None):
        """Build the connectivity matrix for ``X`` and factorize it.

        ``X`` is a :class:`Graph` or a symmetric nonnegative adjacency
        matrix (dense or sparse).  ``y`` is ignored.
        """
        if self.dimension % self.levels != 0:
            raise ValueError(
                f"dimension {self.dimension} is not divisible by "
                f"{self.levels} levels"
            )
        graph = self._as_graph(X)
        connectivity = self._build_connectivity(graph)
        config = BoostConfig(
            levels=self.levels,
            rank=self.dimension // self.levels,
            seed=self.seed,
            max_iters=self.max_iters,
            rel_tol=self.rel_tol,
            epsilon=self.epsilon,
            allow_wide=self.allow_wide,
        )
        result = boostne(connectivity, config)
        self.graph_ = graph
        self.connectivity_ = connectivity
        self.result_ = result
        self.embedding_ = result.embedding
        return self

    def _check_fitted(self):
        if not hasattr(self, "result_"):
            raise NotFittedError(
                "this BoostNE instance is not fitted yet; call fit first"
            )

    def transform(self, X=None) -> np.ndarray:
        """Return the fitted embedding.

        The method is transductive: rows exist only for the fitted graph.
        Passing ``X`` re-checks that it is the same graph and rejects
        anything else.
        """
        self._check_fitted()
        if X is not None:
            graph = self._as_graph(X)
            if graph.fingerprint() != self.graph_.fingerprint():
                raise ValueError(
                    "embedding is transductive: transform only returns rows "
                    "for the graph passed to fit"
                )
        return self.embedding_

    def fit_transform(self, X, y=None) -> np.ndarray:
        """Fit on ``X`` and return the embedding."""
        return self.fit(X, y).transform()

    def residual_trace(self) -> list[dict]:
        """Residual norm and support per level, JSON-ready."""
        self._check_fitted()
        return residual_trace(self.result_)
