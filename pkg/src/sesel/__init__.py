"""Structural-entropy sample selection.

Scores every sample by its share of the similarity graph's structural entropy
(an exact per-node split of the graph-level quantity), combines that share
with a training-difficulty signal, and picks a budgeted, diversity-aware
subset by importance-biased blue-noise sampling.
"""

__version__ = "0.1.0"

from .coverage import CoverageReport, GmmSpec, ball_coverage, run_coverage_check, sample_gmm
from .errors import (
    CapacityTooSmall,
    DuplicateIndex,
    EmptyDataset,
    FormatError,
    InfeasibleBudget,
    InvalidBeta,
    InvalidK,
    IoError,
    IsolatedNode,
    LengthMismatch,
    MissingIndex,
    NoMergeablePair,
    SameNode,
    SeselError,
    TooLarge,
    TreeGraphMismatch,
    UsageError,
    ZeroVector,
)
from .entropy import (
    coalition_value,
    graph_entropy_direct,
    graph_entropy_edge_sum,
    node_structural_entropy,
    shapley_bruteforce,
    shapley_closed_form,
)
from .estimator import SampleSelector, StructuralEntropyScorer
from .graph import SampleGraph, build_knn_graph, default_k, normalized_cosine
from .pipeline import compute_scores, select
from .replay import ReplayMemory, ses_task_selector, update_merge_reduce, update_per_task
from .sampler import (
    SelectionConfig,
    SelectionResult,
    kmeans_clusters,
    sample_with_threshold,
    select_samples,
    top_score_select,
)
from .scoring import (
    ScoreVector,
    ScoringConfig,
    combine_scores,
    difficulty_cutoff_mask,
    minmax_normalize,
)
from .tree import (
    EncodingTree,
    TreeBuildConfig,
    build_tree,
    compress_tree,
    lca_volume,
    tree_from_parents,
    validate_tree,
)

__all__ = [
    "__version__",
    "ball_coverage",
    "build_knn_graph",
    "build_tree",
    "coalition_value",
    "combine_scores",
    "compress_tree",
    "compute_scores",
    "CoverageReport",
    "default_k",
    "difficulty_cutoff_mask",
    "EncodingTree",
    "GmmSpec",
    "graph_entropy_direct",
    "graph_entropy_edge_sum",
    "kmeans_clusters",
    "lca_volume",
    "minmax_normalize",
    "node_structural_entropy",
    "normalized_cosine",
    "ReplayMemory",
    "run_coverage_check",
    "sample_gmm",
    "sample_with_threshold",
    "SampleGraph",
    "SampleSelector",
    "ScoreVector",
    "ScoringConfig",
    "select",
    "select_samples",
    "SelectionConfig",
    "SelectionResult",
    "ses_task_selector",
    "shapley_bruteforce",
    "shapley_closed_form",
    "StructuralEntropyScorer",
    "top_score_select",
    "tree_from_parents",
    "TreeBuildConfig",
    "update_merge_reduce",
    "update_per_task",
    "validate_tree",
    # errors
    "SeselError",
    "UsageError",
    "IoError",
    "FormatError",
    "EmptyDataset",
    "MissingIndex",
    "DuplicateIndex",
    "ZeroVector",
    "InvalidK",
    "IsolatedNode",
    "SameNode",
    "TreeGraphMismatch",
    "TooLarge",
    "LengthMismatch",
    "InvalidBeta",
    "InfeasibleBudget",
    "CapacityTooSmall",
    "NoMergeablePair",
]
