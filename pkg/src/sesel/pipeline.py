"""End-to-end scoring and selection, the single code path behind every entry
point (CLI, estimators, bindings)."""

from __future__ import annotations

import numpy as np

from .entropy import (
    graph_entropy_edge_sum,
    node_structural_entropy,
    shapley_closed_form,
)
from .errors import EmptyDataset, FormatError, LengthMismatch, UsageError
from .graph import SampleGraph, build_knn_graph, default_k
from .sampler import (
    SelectionConfig,
    SelectionResult,
    kmeans_clusters,
    select_samples,
    with_run_metadata,
)
from .scoring import ScoreVector, combine_scores, difficulty_cutoff_mask, minmax_normalize
from .tree import EncodingTree, TreeBuildConfig, build_tree


def validate_embeddings(emb) -> np.ndarray:
    emb = np.asarray(emb, dtype=np.float64)
    if emb.ndim != 2:
        raise FormatError(f"embeddings must be 2-D, got shape {emb.shape}")
    if emb.shape[0] == 0:
        raise EmptyDataset("no samples")
    if emb.shape[1] == 0:
        raise FormatError("zero feature dimension")
    if not np.isfinite(emb).all():
        raise FormatError("non-finite value in embeddings")
    return emb


def _validate_per_sample(name: str, values, n: int, dtype=np.float64) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype)
    if arr.shape != (n,):
        raise LengthMismatch(f"{name} has shape {arr.shape}, expected ({n},)")
    if dtype == np.float64 and not np.isfinite(arr).all():
        raise FormatError(f"non-finite value in {name}")
    return arr


def compute_scores(
    emb,
    difficulty=None,
    *,
    k: int | None = None,
    tree_mode: str = "compressed",
    max_height: int = 3,
    log_base: float = 2.0,
    threads: int = 1,
    with_phi: bool = False,
) -> tuple[SampleGraph, EncodingTree, ScoreVector]:
    """Build the graph and tree, then score every sample."""
    emb = validate_embeddings(emb)
    n = emb.shape[0]
    if k is None:
        k = default_k(n)
    graph = build_knn_graph(emb, k, threads=threads)
    tree = build_tree(graph, TreeBuildConfig(mode=tree_mode, max_height=max_height))
    s_e = node_structural_entropy(graph, tree, base=log_base)
    if difficulty is None:
        s_t = np.ones(n, dtype=np.float64)
    else:
        s_t = _validate_per_sample("difficulty", difficulty, n)
    s = combine_scores(minmax_normalize(s_e), minmax_normalize(s_t))
    phi = shapley_closed_form(graph, tree, base=log_base) if with_phi else None
    return graph, tree, ScoreVector(s_e=s_e, s_t=s_t, s=s, phi=phi)


def select(
    emb,
    difficulty=None,
    labels=None,
    *,
    rate: float | None = None,
    budget: int | None = None,
    k: int | None = None,
    beta: float = 0.0,
    gamma: float | None = None,
    kmeans: int | None = None,
    tree_mode: str = "compressed",
    max_height: int = 3,
    log_base: float = 2.0,
    seed: int = 0,
    strategy: str = "blue_noise",
    threads: int = 1,
) -> SelectionResult:
    """Score all samples and pick a budgeted, diversity-aware subset."""
    emb = validate_embeddings(emb)
    n = emb.shape[0]
    config = SelectionConfig(
        rate=rate, budget=budget, gamma=gamma, seed=seed, strategy=strategy
    )
    if labels is not None:
        labels = _validate_per_sample("labels", labels, n, dtype=np.int64)
        if (labels < 0).any():
            raise FormatError("labels must be non-negative")
    if kmeans is not None:
        if labels is not None:
            raise UsageError("pass either labels or a kmeans cluster count, not both")
        labels = kmeans_clusters(emb, kmeans, seed=seed)
    if gamma is not None and labels is None:
        raise UsageError("gamma requires labels or a kmeans cluster count")

    graph, tree, scores = compute_scores(
        emb,
        difficulty,
        k=k,
        tree_mode=tree_mode,
        max_height=max_height,
        log_base=log_base,
        threads=threads,
    )
    mask = difficulty_cutoff_mask(scores.s_t, beta)
    result = select_samples(scores.s, mask, graph, config, labels=labels)
    return with_run_metadata(
        result,
        k=k if k is not None else default_k(n),
        beta=beta,
        graph_entropy=graph_entropy_edge_sum(graph, tree, base=log_base),
        seed=seed,
    )
