"""Boosted multi-level factorization of a connectivity matrix.

Levels are fit greedily: level i factorizes the residual left by levels
1..i-1, the residual is re-clipped at zero, and the final embedding is the
column-concatenation of every level's center factor.  Because each residual
is computed on the support of the previous one and clipped, the sequence is
entrywise dominated (0 <= R_{i+1} <= R_i), so residual norms and support
sizes never grow; the test suite enforces this exactly.

Once a level's factors are returned they are frozen; there is no joint
refinement across levels.  The joint reconstruction error of the whole
stack is still exposed for inspection via :func:`joint_objective`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from ._validation import check_positive_float, check_positive_int
from .connectivity import ConnectivityMatrix
from .nmf import (
    FactorPair,
    NmfConfig,
    _check_shapes,
    factorize,
    lowrank_entries,
    objective,
)

#: Residual entries at or below this magnitude are dropped from storage.
RESIDUAL_DROP_TOL = 1e-12


@dataclass(frozen=True)
class BoostConfig:
    """Settings for one boosted run.

    ``levels`` is the number of boosting stages, ``rank`` the per-level
    inner dimension, so the final embedding has ``levels * rank`` columns.
    Level i (zero-based) is solved with seed ``seed + i``, which makes a
    one-level run bit-identical to a plain factorize call at the same seed.
    ``allow_wide`` lifts the guard that the total dimension stay below the
    node count.
    """

    levels: int = 8
    rank: int = 16
    seed: int = 0
    max_iters: int = 200
    rel_tol: float = 1e-4
    epsilon: float = 1e-12
    allow_wide: bool = False

    def __post_init__(self):
        check_positive_int(self.levels, "levels")
        check_positive_int(self.rank, "rank")
        check_positive_int(self.max_iters, "max_iters")
        check_positive_float(self.rel_tol, "rel_tol")
        check_positive_float(self.epsilon, "epsilon")

    @property
    def dimension(self) -> int:
        """Total embedding width: levels x per-level rank."""
        return self.levels * self.rank

    def level_config(self, index: int) -> NmfConfig:
        """Solver settings for the zero-based level ``index``."""
        return NmfConfig(
            rank=self.rank,
            max_iters=self.max_iters,
            rel_tol=self.rel_tol,
            epsilon=self.epsilon,
            seed=self.seed + index,
        )


@dataclass(frozen=True)
class LevelFactor:
    """One boosting stage: its factors and the residual it consumed."""

    level: int
    factors: FactorPair
    residual_norm_before: float
    residual_nnz_before: int


@dataclass(frozen=True)
class MultiLevelEmbedding:
    """Result of a boosted run.

    ``embedding`` stacks the center factors column-wise in level order;
    columns [(i-1)*rank, i*rank) are exactly level i's factor.  The
    terminal residual is what remains after the last level, and
    ``warnings`` records degeneracies such as a residual hitting zero
    before the levels ran out.
    """

    levels: tuple[LevelFactor, ...]
    embedding: np.ndarray
    config: BoostConfig
    connectivity_fingerprint: str
    terminal_residual_norm: float
    terminal_residual_nnz: int
    warnings: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return self.embedding.shape[0]

    @property
    def dimension(self) -> int:
        return self.embedding.shape[1]


def _frobenius(matrix: sp.csr_array) -> float:
    return float(np.sqrt(np.sum(matrix.data * matrix.data)))


def residual(matrix: sp.csr_array, factors: FactorPair) -> sp.csr_array:
    """Clipped unexplained part ``max(matrix - u v, 0)``.

    Computed only on the stored entries of ``matrix``: a structural zero
    stays zero because ``u v >= 0`` makes its clipped difference zero.
    Entries at or below the storage drop tolerance are removed, so the
    result's support is contained in the input's and every entry is
    bounded by the corresponding input entry.
    """
    _check_shapes(matrix, factors)
    coo = matrix.tocoo()
    values = coo.data - lowrank_entries(factors, coo.row, coo.col)
    np.maximum(values, 0.0, out=values)
    values[values <= RESIDUAL_DROP_TOL] = 0.0
    out = sp.csr_array(
        sp.coo_array((values, (coo.row, coo.col)), shape=matrix.shape)
    )
    out.eliminate_zeros()
    out.sort_indices()
    return out


def boostne(conn: ConnectivityMatrix, config: BoostConfig) -> MultiLevelEmbedding:
    """Run the boosted factorization loop on a connectivity matrix.

    Each level records the residual norm and support size it consumed,
    factorizes the residual at its derived seed, and hands the clipped
    remainder to the next level.  An all-zero residual does not stop the
    loop: later levels emit zero factors so the embedding width stays
    stable, and a warning is attached to the result.
    """
    n = conn.n
    if config.dimension >= n and not config.allow_wide:
        raise ValueError(
            f"total dimension {config.dimension} is not below the node "
            f"count {n}; pass allow_wide=True to override"
        )
    current = sp.csr_array(conn.matrix)
    levels: list[LevelFactor] = []
    warnings: list[str] = []
    for index in range(config.levels):
        norm_before = _frobenius(current)
        nnz_before = int(current.nnz)
        factors = factorize(current, config.level_config(index))
        if factors.degenerate and not warnings:
            warnings.append(
                f"residual is all-zero at level {index + 1}; this and later "
                "levels contribute zero columns"
            )
        levels.append(LevelFactor(index + 1, factors, norm_before, nnz_before))
        current = residual(current, factors)
    return MultiLevelEmbedding(
        levels=tuple(levels),
        embedding=concatenate(levels),
        config=config,
        connectivity_fingerprint=conn.fingerprint(),
        terminal_residual_norm=_frobenius(current),
        terminal_residual_nnz=int(current.nnz),
        warnings=tuple(warnings),
    )


def concatenate(levels: Sequence[LevelFactor]) -> np.ndarray:
    """Column-concatenate the center factors in level order."""
    if not levels:
        raise ValueError("no levels to concatenate")
    heights = {lf.factors.u.shape[0] for lf in levels}
    if len(heights) != 1:
        raise ValueError(f"levels disagree on node count: {sorted(heights)}")
    return np.hstack([lf.factors.u for lf in levels])


def residual_trace(result: MultiLevelEmbedding) -> list[dict]:
    """Per-level residual statistics, ready for JSON serialization.

    Row i holds the norm and support size of the residual that level i
    consumed; the final row (level k+1) describes the terminal residual
    left after all levels.  Both columns are non-increasing.
    """
    rows = [
        {
            "level": lf.level,
            "frobenius_norm": lf.residual_norm_before,
            "nnz": lf.residual_nnz_before,
        }
        for lf in result.levels
    ]
    rows.append(
        {
            "level": len(result.levels) + 1,
            "frobenius_norm": result.terminal_residual_norm,
            "nnz": result.terminal_residual_nnz,
        }
    )
    return rows


def joint_objective(conn: ConnectivityMatrix, result: MultiLevelEmbedding) -> float:
    """Reconstruction error of the whole stack against the original target.

    The sum of the per-level products equals the product of the
    concatenated factors, so this is ``objective`` evaluated at the
    stacked pair.  Bounded above by the squared norm of the target.
    """
    stacked = FactorPair(
        result.embedding,
        np.vstack([lf.factors.v for lf in result.levels]),
    )
    return objective(sp.csr_array(conn.matrix), stacked)
