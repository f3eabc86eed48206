"""Input validation helpers used by the public estimator surface."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp


def check_positive_int(value, name: str) -> int:
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if value < 1:
        raise ValueError(f"{name} must be >= 1, got {value}")
    return int(value)


def check_positive_float(value, name: str) -> float:
    value = float(value)
    if not value > 0:
        raise ValueError(f"{name} must be > 0, got {value}")
    return value


def check_adjacency(matrix) -> sp.csr_array:
    """Validate a user-supplied adjacency matrix and return it as CSR.

    Requires a square matrix with nonnegative finite weights and exact
    symmetry.  Diagonal entries are removed (self-loops are dropped at
    ingestion everywhere in this package).
    """
    if sp.issparse(matrix):
        adj = sp.csr_array(matrix, dtype=np.float64)
    else:
        arr = np.asarray(matrix, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"adjacency must be 2-d, got shape {arr.shape}")
        adj = sp.csr_array(arr)
    if adj.shape[0] != adj.shape[1]:
        raise ValueError(f"adjacency must be square, got shape {adj.shape}")
    if not np.isfinite(adj.data).all():
        raise ValueError("adjacency contains non-finite weights")
    if adj.data.size and adj.data.min() < 0:
        raise ValueError("adjacency contains negative weights")
    if (adj != adj.T).nnz != 0:
        raise ValueError("adjacency must be symmetric")
    adj.setdiag(0.0)
    adj.eliminate_zeros()
    adj.sort_indices()
    return adj


def check_embedding_matrix(matrix) -> np.ndarray:
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"embedding must be 2-d, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("embedding contains non-finite entries")
    return arr
