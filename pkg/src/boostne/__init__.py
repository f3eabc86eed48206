"""Boosted multi-level nonnegative node embeddings for undirected graphs.

The pipeline: ingest an edge list into a :class:`Graph`, build a
closed-form nonnegative connectivity matrix (deepwalk, line, or grarep
flavored), factorize it in boosted stages where each stage fits the
clipped residual of the previous ones, and concatenate the per-stage
center factors into the final embedding.  A self-contained multi-label
classification harness scores embeddings with Micro/Macro-F1.

The :class:`BoostNE` estimator is the high-level entry point; the
underlying building blocks are importable individually.
"""

__version__ = "0.1.0"

from .boost import (
    BoostConfig,
    LevelFactor,
    MultiLevelEmbedding,
    boostne,
    concatenate,
    joint_objective,
    residual,
    residual_trace,
)
from .connectivity import (
    ConnectivityConfig,
    ConnectivityMatrix,
    deepwalk_matrix,
    grarep_step_matrix,
    line_matrix,
    load_connectivity,
    save_connectivity,
)
from .errors import (
    BoostNEError,
    DegenerateInputError,
    LabelMismatchError,
    ParseError,
    ResourceLimitError,
    ZeroDegreeError,
)
from .estimator import BoostNE
from .evaluation import (
    EvalCell,
    EvalConfig,
    EvalReport,
    LabelSet,
    OvrModel,
    RatioSummary,
    build_label_set,
    embedding_fingerprint,
    evaluate,
    format_report_table,
    micro_macro_f1,
    predict,
    predict_threshold,
    report_to_dict,
    split,
    train_ovr,
)
from .graph import (
    Graph,
    load_edge_list,
    save_edge_list,
    transition_matrix,
    walk_sum,
)
from .io import (
    file_sha256,
    load_embedding,
    load_labels,
    save_embedding,
)
from .nmf import (
    FactorPair,
    NmfConfig,
    factorize,
    init_factors,
    multiplicative_step,
    objective,
)

__all__ = [
    "__version__",
    "BoostNE",
    "BoostNEError",
    "BoostConfig",
    "ConnectivityConfig",
    "ConnectivityMatrix",
    "DegenerateInputError",
    "EvalCell",
    "EvalConfig",
    "EvalReport",
    "FactorPair",
    "Graph",
    "LabelMismatchError",
    "LabelSet",
    "LevelFactor",
    "MultiLevelEmbedding",
    "NmfConfig",
    "OvrModel",
    "ParseError",
    "RatioSummary",
    "ResourceLimitError",
    "ZeroDegreeError",
    "boostne",
    "build_label_set",
    "concatenate",
    "deepwalk_matrix",
    "embedding_fingerprint",
    "evaluate",
    "factorize",
    "file_sha256",
    "format_report_table",
    "grarep_step_matrix",
    "init_factors",
    "joint_objective",
    "line_matrix",
    "load_connectivity",
    "load_edge_list",
    "load_embedding",
    "load_labels",
    "micro_macro_f1",
    "multiplicative_step",
    "objective",
    "predict",
    "predict_threshold",
    "report_to_dict",
    "residual",
    "residual_trace",
    "save_connectivity",
    "save_edge_list",
    "save_embedding",
    "split",
    "train_ovr",
    "transition_matrix",
    "walk_sum",
]
