"""Multi-label node-classification harness.

Protocol: sample a fraction of labeled nodes for training, fit one
L2-regularized binary logistic regression per class on the embedding rows
(one-vs-rest), and on each test node predict as many top-scored classes as
the node has true labels.  Micro- and Macro-F1 aggregate the per-class
confusion counts; repeated trials over a ratio grid are averaged into a
report.

The classifier is self-contained and fully deterministic: full-batch
gradient descent with a fixed step size for a fixed iteration count, no
early stopping, no randomized solver state.  Features are standardized
internally and the scaling is folded back into the returned weights, so
models score raw embedding rows.
"""

from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import expit

from ._validation import check_positive_int
from .errors import LabelMismatchError

_POWER_ITERS = 50
_STD_FLOOR = 1e-12


@dataclass(frozen=True)
class LabelSet:
    """Class assignments for the labeled subset of an embedding.

    ``node_indices`` are embedding row numbers in ascending order;
    ``assignments[p]`` holds the class indices of the node at
    ``node_indices[p]``.  Nodes without labels simply do not appear and
    are excluded from evaluation.
    """

    n_classes: int
    class_names: tuple[str, ...]
    node_indices: np.ndarray
    assignments: tuple[frozenset[int], ...]

    @property
    def n_labeled(self) -> int:
        return len(self.assignments)


def build_label_set(
    node_ids: Sequence[str], records: Iterable[tuple[str, tuple[str, ...]]]
) -> LabelSet:
    """Align raw (node id, label tokens) records with an embedding's rows.

    Class indices are assigned by sorted label token, so they are stable
    across files that list the same classes.  Repeated ids contribute the
    union of their labels.  Ids absent from the embedding are an error,
    reported up to ten at a time.
    """
    index_of = {name: i for i, name in enumerate(node_ids)}
    raw: dict[int, set[str]] = {}
    missing: list[str] = []
    for name, tokens in records:
        row = index_of.get(name)
        if row is None:
            if name not in missing:
                missing.append(name)
            continue
        raw.setdefault(row, set()).update(tokens)
    if missing:
        shown = ", ".join(repr(m) for m in missing[:10])
        suffix = "" if len(missing) <= 10 else f" (and {len(missing) - 10} more)"
        raise LabelMismatchError(
            f"labeled ids missing from the embedding: {shown}{suffix}",
            ids=tuple(missing),
        )
    if not raw:
        raise LabelMismatchError("no labeled node appears in the embedding")
    classes = sorted({token for tokens in raw.values() for token in tokens})
    class_index = {token: j for j, token in enumerate(classes)}
    rows = np.array(sorted(raw), dtype=np.int64)
    assignments = tuple(
        frozenset(class_index[token] for token in raw[int(row)]) for row in rows
    )
    return LabelSet(len(classes), tuple(classes), rows, assignments)


@dataclass(frozen=True)
class EvalConfig:
    """Evaluation protocol settings.

    ``train_ratios`` and ``repeats`` define the trial grid; ``seed`` feeds
    every split deterministically.  ``regularization`` is the L2 strength,
    ``iterations`` the fixed gradient-descent step count.  ``threshold``
    switches the decision rule from top-l to score >= threshold;
    ``stratified`` switches splits to per-class proportional sampling.
    """

    train_ratios: tuple[float, ...] = (
        0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9,
    )
    repeats: int = 10
    seed: int = 0
    regularization: float = 1.0
    iterations: int = 300
    threshold: float | None = None
    stratified: bool = False

    def __post_init__(self):
        if not self.train_ratios:
            raise ValueError("train_ratios must be non-empty")
        for ratio in self.train_ratios:
            if not 0.0 < ratio < 1.0:
                raise ValueError(f"train ratio {ratio} outside (0, 1)")
        check_positive_int(self.repeats, "repeats")
        check_positive_int(self.iterations, "iterations")
        if self.regularization < 0:
            raise ValueError("regularization must be nonnegative")
        if self.threshold is not None and not 0.0 < self.threshold < 1.0:
            raise ValueError(f"threshold {self.threshold} outside (0, 1)")


def split(
    labels: LabelSet,
    ratio: float,
    seed: int | np.random.SeedSequence,
    stratified: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Partition labeled-node positions into train and test sets.

    Uniform sampling without replacement with ceil(ratio * n_labeled)
    training nodes.  A class can end up with zero training examples; no
    resampling happens in that case, its classifier just degenerates to
    always-negative.  With ``stratified=True`` each node's lowest class
    index defines its stratum and the ratio is applied per stratum.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"train ratio {ratio} outside (0, 1)")
    rng = np.random.default_rng(seed)
    if stratified:
        strata: dict[int, list[int]] = {}
        for pos, classes in enumerate(labels.assignments):
            strata.setdefault(min(classes), []).append(pos)
        train_parts = []
        test_parts = []
        for key in sorted(strata):
            members = np.array(strata[key], dtype=np.int64)
            perm = members[rng.permutation(members.size)]
            take = math.ceil(ratio * members.size)
            train_parts.append(perm[:take])
            test_parts.append(perm[take:])
        train = np.concatenate(train_parts)
        test = np.concatenate(test_parts)
    else:
        perm = rng.permutation(labels.n_labeled)
        take = math.ceil(ratio * labels.n_labeled)
        train, test = perm[:take], perm[take:]
    return np.sort(train), np.sort(test)


@dataclass(frozen=True)
class OvrModel:
    """One-vs-rest linear scorer over raw embedding rows."""

    weights: np.ndarray
    intercepts: np.ndarray

    @property
    def n_classes(self) -> int:
        return self.intercepts.size

    def scores(self, features: np.ndarray) -> np.ndarray:
        """Per-class sigmoid scores, one row per input row."""
        return expit(features @ self.weights + self.intercepts)


def _fixed_step(design: np.ndarray, regularization: float) -> float:
    # 1 / L with L an upper bound on the logistic Hessian spectral norm:
    # lambda_max(design' design) / (4 t) + reg / t.  The leading eigenvalue
    # comes from a fixed-length power iteration with a constant start
    # vector, keeping the whole schedule deterministic.
    t = design.shape[0]
    gram = design.T @ design
    vec = np.full(gram.shape[0], 1.0 / np.sqrt(gram.shape[0]))
    for _ in range(_POWER_ITERS):
        nxt = gram @ vec
        norm = np.linalg.norm(nxt)
        if norm == 0.0:
            break
        vec = nxt / norm
    leading = float(vec @ (gram @ vec))
    return 1.0 / (leading / (4.0 * t) + regularization / t + 1e-12)


def train_ovr(
    embedding: np.ndarray,
    labels: LabelSet,
    train_indices: np.ndarray,
    config: EvalConfig,
) -> OvrModel:
    """Fit all per-class logistic regressions on the training rows.

    The classes share one vectorized descent because their problems are
    independent; exactly ``config.iterations`` full-batch steps run with
    the fixed step size, and the intercept column is left unpenalized.
    """
    if train_indices.size == 0:
        raise ValueError("empty training set")
    features = embedding[labels.node_indices[train_indices]]
    if not np.all(np.isfinite(features)):
        raise ValueError("embedding contains non-finite entries")
    t, dim = features.shape
    c = labels.n_classes
    targets = np.zeros((t, c))
    for row, pos in enumerate(train_indices):
        for j in labels.assignments[pos]:
            targets[row, j] = 1.0
    absent = np.flatnonzero(targets.sum(axis=0) == 0)
    for j in absent:
        warnings.warn(
            f"class {labels.class_names[j]!r} has no training examples; "
            "its classifier degenerates to always-negative",
            RuntimeWarning,
            stacklevel=2,
        )
    mean = features.mean(axis=0)
    std = features.std(axis=0)
    std[std < _STD_FLOOR] = 1.0
    design = np.hstack([(features - mean) / std, np.ones((t, 1))])
    step = _fixed_step(design, config.regularization)
    coef = np.zeros((dim + 1, c))
    penalty_mask = np.ones((dim + 1, 1))
    penalty_mask[dim, 0] = 0.0
    for _ in range(config.iterations):
        grad = design.T @ (expit(design @ coef) - targets) / t
        grad += (config.regularization / t) * (coef * penalty_mask)
        coef -= step * grad
    # fold the standardization back so the model scores raw rows
    weights = coef[:dim] / std[:, np.newaxis]
    intercepts = coef[dim] - mean @ weights
    return OvrModel(weights, intercepts)


def predict(
    model: OvrModel, features: np.ndarray, label_counts: np.ndarray
) -> tuple[frozenset[int], ...]:
    """Top-l decision rule: node i gets its ``label_counts[i]`` best classes.

    Ties break toward the lower class index.  With every count equal to 1
    this is plain argmax.
    """
    counts = np.asarray(label_counts, dtype=np.int64)
    if counts.size != features.shape[0]:
        raise ValueError("one label count per row is required")
    if counts.min(initial=1) < 1:
        raise ValueError("label counts must be at least 1")
    if counts.max(initial=0) > model.n_classes:
        raise ValueError(
            f"a node requests {counts.max()} labels but only "
            f"{model.n_classes} classes exist"
        )
    scores = model.scores(features)
    # stable sort on the negated scores: equal scores keep index order
    order = np.argsort(-scores, axis=1, kind="stable")
    return tuple(
        frozenset(order[i, : counts[i]].tolist()) for i in range(counts.size)
    )


def predict_threshold(
    model: OvrModel, features: np.ndarray, threshold: float
) -> tuple[frozenset[int], ...]:
    """Alternative rule: every class whose score reaches the threshold."""
    scores = model.scores(features)
    return tuple(
        frozenset(np.flatnonzero(row >= threshold).tolist()) for row in scores
    )


def micro_macro_f1(
    predicted: Sequence[frozenset[int]],
    truth: Sequence[frozenset[int]],
    n_classes: int,
) -> tuple[float, float]:
    """Micro- and Macro-F1 over per-class confusion counts.

    Micro pools counts across classes; Macro averages per-class F1 with
    the 0/0 case scored as 0, so zero-support classes drag the mean down
    rather than being skipped.
    """
    if len(predicted) != len(truth):
        raise ValueError("prediction and truth lengths differ")
    if not truth:
        raise ValueError("empty test set")
    tp = np.zeros(n_classes, dtype=np.int64)
    fp = np.zeros(n_classes, dtype=np.int64)
    fn = np.zeros(n_classes, dtype=np.int64)
    for pred, true in zip(predicted, truth):
        for j in pred:
            if j in true:
                tp[j] += 1
            else:
                fp[j] += 1
        for j in true - pred:
            fn[j] += 1
    denom = 2 * tp + fp + fn
    micro_den = int(denom.sum())
    micro = float(2 * tp.sum() / micro_den) if micro_den else 0.0
    per_class = np.zeros(n_classes)
    nonzero = denom > 0
    per_class[nonzero] = 2 * tp[nonzero] / denom[nonzero]
    return micro, float(per_class.mean())


@dataclass(frozen=True)
class EvalCell:
    """One trial: a train ratio, a repeat index, and its two scores."""

    ratio: float
    repeat: int
    micro_f1: float
    macro_f1: float


@dataclass(frozen=True)
class RatioSummary:
    """Mean scores across the repeats of one train ratio."""

    ratio: float
    mean_micro_f1: float
    mean_macro_f1: float


@dataclass(frozen=True)
class EvalReport:
    """All trial cells plus per-ratio means and input fingerprints."""

    cells: tuple[EvalCell, ...]
    summaries: tuple[RatioSummary, ...]
    config_fingerprint: str
    embedding_fingerprint: str

    def summary_for(self, ratio: float) -> RatioSummary:
        for summary in self.summaries:
            if summary.ratio == ratio:
                return summary
        raise KeyError(f"no summary for ratio {ratio}")


def _config_fingerprint(config: EvalConfig) -> str:
    payload = repr(
        (
            config.train_ratios,
            config.repeats,
            config.seed,
            config.regularization,
            config.iterations,
            config.threshold,
            config.stratified,
        )
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def embedding_fingerprint(embedding: np.ndarray) -> str:
    """Content hash of a dense embedding matrix."""
    digest = hashlib.sha256(repr(embedding.shape).encode("utf-8"))
    digest.update(np.ascontiguousarray(embedding, dtype=np.float64).tobytes())
    return digest.hexdigest()


def evaluate(
    embedding: np.ndarray, labels: LabelSet, config: EvalConfig
) -> EvalReport:
    """Run the full trial grid and aggregate per-ratio means.

    Each (ratio, repeat) cell derives its split seed from
    ``(config.seed, ratio index, repeat)``, so reports are reproducible
    and cells are independent of grid order.
    """
    cells = []
    summaries = []
    for ratio_index, ratio in enumerate(config.train_ratios):
        micro_sum = 0.0
        macro_sum = 0.0
        for repeat in range(config.repeats):
            seed = np.random.SeedSequence([config.seed, ratio_index, repeat])
            train, test = split(labels, ratio, seed, config.stratified)
            model = train_ovr(embedding, labels, train, config)
            test_features = embedding[labels.node_indices[test]]
            truth = [labels.assignments[pos] for pos in test]
            if config.threshold is None:
                counts = np.array([len(s) for s in truth], dtype=np.int64)
                predicted = predict(model, test_features, counts)
            else:
                predicted = predict_threshold(
                    model, test_features, config.threshold
                )
            micro, macro = micro_macro_f1(predicted, truth, labels.n_classes)
            cells.append(EvalCell(ratio, repeat, micro, macro))
            micro_sum += micro
            macro_sum += macro
        summaries.append(
            RatioSummary(
                ratio, micro_sum / config.repeats, macro_sum / config.repeats
            )
        )
    return EvalReport(
        cells=tuple(cells),
        summaries=tuple(summaries),
        config_fingerprint=_config_fingerprint(config),
        embedding_fingerprint=embedding_fingerprint(embedding),
    )


def report_to_dict(report: EvalReport) -> dict:
    """JSON-ready view of a report."""
    return {
        "config_fingerprint": report.config_fingerprint,
        "embedding_fingerprint": report.embedding_fingerprint,
        "cells": [
            {
                "ratio": cell.ratio,
                "repeat": cell.repeat,
                "micro_f1": cell.micro_f1,
                "macro_f1": cell.macro_f1,
            }
            for cell in report.cells
        ],
        "means": [
            {
                "ratio": summary.ratio,
                "micro_f1": summary.mean_micro_f1,
                "macro_f1": summary.mean_macro_f1,
            }
            for summary in report.summaries
        ],
    }


def format_report_table(report: EvalReport) -> str:
    """Aligned text table: train ratios as columns, metric means as rows."""
    ratios = [summary.ratio for summary in report.summaries]
    header = "train ratio " + "".join(f"{r:>9.2f}" for r in ratios)
    micro = "micro-f1    " + "".join(
        f"{s.mean_micro_f1:>9.4f}" for s in report.summaries
    )
    macro = "macro-f1    " + "".join(
        f"{s.mean_macro_f1:>9.4f}" for s in report.summaries
    )
    return "\n".join([header, micro, macro])
