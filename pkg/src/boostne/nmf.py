"""Nonnegative matrix factorization by multiplicative updates.

The solver fits ``R ~ U @ V`` under squared Frobenius loss with all factor
entries kept nonnegative.  ``R`` stays sparse throughout: every kernel touches
only its stored entries, so one iteration costs O(nnz(R) * rank) plus the
small dense Gram products.

Multiplicative updates never leave the nonnegative orthant and drive the
objective monotonically downward (up to the epsilon guard slack), which the
test suite checks as a hard invariant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ._validation import check_positive_float, check_positive_int

#: Row block size for streaming over the stored entries of a sparse target.
_ENTRY_BLOCK = 1 << 19


@dataclass(frozen=True)
class NmfConfig:
    """Solver settings for one factorization.

    ``rank`` is the inner dimension; iteration stops after ``max_iters``
    steps or once the relative objective improvement drops below
    ``rel_tol``.  ``epsilon`` guards denominators against exact zeros.
    """

    rank: int
    max_iters: int = 200
    rel_tol: float = 1e-4
    epsilon: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        check_positive_int(self.rank, "rank")
        check_positive_int(self.max_iters, "max_iters")
        check_positive_float(self.rel_tol, "rel_tol")
        check_positive_float(self.epsilon, "epsilon")


@dataclass(frozen=True)
class FactorPair:
    """A center factor ``u`` (n x rank) and context factor ``v`` (rank x m).

    ``final_objective`` is filled in by :func:`factorize`; ``degenerate``
    marks the zero factors returned for an all-zero target.
    """

    u: np.ndarray
    v: np.ndarray
    final_objective: float | None = None
    degenerate: bool = False

    @property
    def rank(self) -> int:
        return self.u.shape[1]


def _check_shapes(matrix: sp.csr_array, factors: FactorPair) -> None:
    n, m = matrix.shape
    if factors.u.shape[0] != n or factors.v.shape[1] != m:
        raise ValueError(
            f"factor shapes {factors.u.shape} x {factors.v.shape} do not "
            f"match target shape {matrix.shape}"
        )
    if factors.u.shape[1] != factors.v.shape[0]:
        raise ValueError(
            f"inner dimensions differ: u has rank {factors.u.shape[1]}, "
            f"v has rank {factors.v.shape[0]}"
        )


def lowrank_entries(
    factors: FactorPair, rows: np.ndarray, cols: np.ndarray
) -> np.ndarray:
    """Entries ``(u @ v)[rows, cols]`` without forming the dense product."""
    out = np.empty(rows.size, dtype=np.float64)
    for start in range(0, rows.size, _ENTRY_BLOCK):
        block = slice(start, start + _ENTRY_BLOCK)
        out[block] = np.einsum(
            "ij,ji->i", factors.u[rows[block]], factors.v[:, cols[block]]
        )
    return out


def init_factors(matrix: sp.csr_array, config: NmfConfig) -> FactorPair:
    """Draw uniform positive factors scaled to the target's mean entry.

    Entries are i.i.d. on ``(0, s]`` with ``s = sqrt(mean(matrix) / rank)``
    so the initial product matches the target's mean magnitude.  An all-zero
    target yields zero factors marked degenerate.  The draw order (``u``
    first, then ``v``) is part of the determinism contract.
    """
    n, m = matrix.shape
    total = float(matrix.sum())
    if total == 0.0:
        return FactorPair(
            np.zeros((n, config.rank)), np.zeros((config.rank, m)),
            degenerate=True,
        )
    scale = np.sqrt(total / (n * m) / config.rank)
    rng = np.random.default_rng(config.seed)
    # 1 - random() lands in (0, 1]: multiplicative updates cannot escape
    # an exactly-zero entry, so the init must be strictly positive
    u = scale * (1.0 - rng.random((n, config.rank)))
    v = scale * (1.0 - rng.random((config.rank, m)))
    return FactorPair(u, v)


def multiplicative_step(
    matrix: sp.csr_array, factors: FactorPair, epsilon: float
) -> FactorPair:
    """One Lee-Seung update of both factors, ``u`` first.

    u' = u * (R v^T) / (u (v v^T) + eps); v' = v * (u'^T R) / ((u'^T u') v + eps).
    Nonnegativity is preserved exactly; the objective never rises by more
    than the epsilon slack.
    """
    check_positive_float(epsilon, "epsilon")
    _check_shapes(matrix, factors)
    u, v = factors.u, factors.v
    u_new = u * (matrix @ v.T) / (u @ (v @ v.T) + epsilon)
    v_new = v * (matrix.T @ u_new).T / ((u_new.T @ u_new) @ v + epsilon)
    return FactorPair(u_new, v_new, degenerate=factors.degenerate)


def objective(matrix: sp.csr_array, factors: FactorPair) -> float:
    """Squared Frobenius error ``|R - u v|_F^2`` without densifying ``R``.

    Expanded as ``|R|^2 - 2 sum_nnz R_ij (uv)_ij + trace((u^T u)(v v^T))``;
    the cross term streams over stored entries in fixed-order blocks.
    """
    _check_shapes(matrix, factors)
    coo = matrix.tocoo()
    norm_sq = float(coo.data @ coo.data)
    cross = float(coo.data @ lowrank_entries(factors, coo.row, coo.col))
    gram = float(np.sum((factors.u.T @ factors.u) * (factors.v @ factors.v.T)))
    return max(norm_sq - 2.0 * cross + gram, 0.0)


def factorize(matrix: sp.csr_array, config: NmfConfig) -> FactorPair:
    """Run multiplicative updates to convergence on a sparse target.

    Stops at ``max_iters`` steps or when the per-step objective drop,
    relative to the initial objective, falls below ``rel_tol``.  The
    returned pair carries the final objective; an all-zero target
    short-circuits to degenerate zero factors with objective 0.
    """
    matrix = sp.csr_array(matrix)
    if matrix.nnz and matrix.data.min() < 0:
        raise ValueError("factorization target must be nonnegative")
    if config.rank > min(matrix.shape):
        raise ValueError(
            f"rank {config.rank} exceeds target dimensions {matrix.shape}"
        )
    factors = init_factors(matrix, config)
    if factors.degenerate:
        return FactorPair(factors.u, factors.v, 0.0, degenerate=True)
    initial = objective(matrix, factors)
    previous = initial
    current = initial
    for _ in range(config.max_iters):
        factors = multiplicative_step(matrix, factors, config.epsilon)
        current = objective(matrix, factors)
        if (previous - current) / max(initial, config.epsilon) < config.rel_tol:
            break
        previous = current
    return FactorPair(factors.u, factors.v, current)
