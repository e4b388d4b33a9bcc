"""Importance-biased blue-noise sampling with a bisected similarity threshold.

One pass walks candidates in descending score order and accepts a candidate
unless an already-accepted graph neighbor is more similar than the threshold
(or its class hit the per-class cap).  A binary search over the threshold
finds the tightest value whose acceptance count still covers the budget; the
final set is that pass's acceptances truncated to the highest-scoring m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InfeasibleBudget, UsageError
from .graph import SampleGraph

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None


@dataclass(frozen=True)
class SelectionConfig:
    rate: float | None = None
    budget: int | None = None
    gamma: float | None = None
    theta_max_iters: int = 40
    seed: int = 0
    strategy: str = "blue_noise"  # or "top_score"

    def __post_init__(self):
        if (self.rate is None) == (self.budget is None):
            raise UsageError("exactly one of rate and budget must be set")
        if self.rate is not None and not 0.0 < self.rate <= 1.0:
            raise UsageError(f"rate={self.rate} outside (0, 1]")
        if self.budget is not None and self.budget < 1:
            raise UsageError(f"budget={self.budget} must be >= 1")
        if self.gamma is not None and self.gamma < 1.0:
            raise UsageError(f"gamma={self.gamma} must be >= 1")
        if self.strategy not in ("blue_noise", "top_score"):
            raise UsageError(f"unknown strategy {self.strategy!r}")

    def resolve_budget(self, n: int) -> int:
        if self.budget is not None:
            return int(self.budget)
        return max(int(math.floor(self.rate * n + 0.5)), 1)


@dataclass
class SelectionResult:
    indices: np.ndarray
    theta_final: float | None
    per_class_counts: dict | None
    warnings: list = field(default_factory=list)
    n: int = 0
    m: int = 0
    k: int = 0
    beta: float = 0.0
    gamma: float | None = None
    graph_entropy: float = float("nan")
    seed: int = 0


def _greedy_pass_py(order, indptr, indices, weights, theta, labels, caps, selected):
    accepted = []
    has_caps = caps.size > 0
    for u in order.tolist():
        s, e = indptr[u], indptr[u + 1]
        hit = False
        for j in range(s, e):
            if selected[indices[j]] and weights[j] > theta:
                hit = True
                break
        if hit:
            continue
        if has_caps:
            c = labels[u]
            if caps[c] <= 0:
                continue
            caps[c] -= 1
        selected[u] = True
        accepted.append(u)
    return np.asarray(accepted, dtype=np.int64)


if njit is not None:

    @njit(cache=True)
    def _greedy_pass_nb(order, indptr, indices, weights, theta, labels, caps, selected, out):
        count = 0
        has_caps = caps.size > 0
        for i in range(order.size):
            u = order[i]
            hit = False
            for j in range(indptr[u], indptr[u + 1]):
                if selected[indices[j]] and weights[j] > theta:
                    hit = True
                    break
            if hit:
                continue
            if has_caps:
                c = labels[u]
                if caps[c] <= 0:
                    continue
                caps[c] -= 1
            selected[u] = True
            out[count] = u
            count += 1
        return count


def sample_with_threshold(
    scores: np.ndarray,
    mask: np.ndarray,
    graph: SampleGraph,
    theta: float,
    caps: np.ndarray | None = None,
    labels: np.ndarray | None = None,
) -> np.ndarray:
    """Single greedy acceptance pass; returns accepted ids in score order."""
    order = candidate_order(scores, mask)
    return _run_pass(order, graph, theta, labels, caps)


def candidate_order(scores: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Unmasked candidate ids sorted by descending score, lower index first."""
    pool = np.flatnonzero(np.asarray(mask, dtype=bool))
    scores = np.asarray(scores, dtype=np.float64)
    return pool[np.lexsort((pool, -scores[pool]))]


def _run_pass(order, graph, theta, labels, caps) -> np.ndarray:
    selected = np.zeros(graph.n, dtype=np.bool_)
    caps_arr = (
        np.asarray(caps, dtype=np.int64).copy()
        if caps is not None
        else np.empty(0, dtype=np.int64)
    )
    labels_arr = (
        np.asarray(labels, dtype=np.int64)
        if labels is not None
        else np.empty(0, dtype=np.int64)
    )
    if caps_arr.size and labels_arr.size != graph.n:
        raise UsageError("class caps need a full label vector")
    if njit is not None:
        out = np.empty(order.size, dtype=np.int64)
        count = _greedy_pass_nb(
            order,
            graph.indptr,
            graph.indices,
            graph.weights,
            float(theta),
            labels_arr,
            caps_arr,
            selected,
            out,
        )
        return out[:count].copy()
    return _greedy_pass_py(
        order, graph.indptr, graph.indices, graph.weights, float(theta), labels_arr, caps_arr, selected
    )


def select_samples(
    scores: np.ndarray,
    mask: np.ndarray,
    graph: SampleGraph,
    config: SelectionConfig,
    labels: np.ndarray | None = None,
) -> SelectionResult:
    """Budgeted selection via bisection on the similarity threshold."""
    n = graph.n
    m = config.resolve_budget(n)
    order = candidate_order(scores, mask)
    if m > order.size:
        raise InfeasibleBudget(f"budget {m} exceeds candidate pool of {order.size}")

    if config.strategy == "top_score":
        chosen = order[:m]
        result = SelectionResult(
            indices=np.sort(chosen),
            theta_final=None,
            per_class_counts=_class_counts(chosen, labels),
            n=n,
            m=m,
            gamma=config.gamma,
            seed=config.seed,
        )
        return result

    caps = None
    warnings: list[str] = []
    if config.gamma is not None:
        if labels is None:
            raise UsageError("gamma requires labels or clusters")
        n_classes = int(labels.max()) + 1
        caps = np.full(n_classes, int(math.ceil(config.gamma * m / n_classes)), dtype=np.int64)

    accepted_full = _run_pass(order, graph, 1.0, labels, caps)
    if accepted_full.size < m:
        # only class caps can starve the pass at threshold 1.0; fill the
        # shortfall from the best remaining candidates and flag it
        shortfall = m - accepted_full.size
        taken = np.zeros(n, dtype=bool)
        taken[accepted_full] = True
        extras = order[~taken[order]][:shortfall]
        chosen = np.concatenate([accepted_full, extras])
        warnings.append(f"caps_relaxed:{shortfall}")
        theta_final = 1.0
    else:
        lo, hi = 0.0, 1.0
        best = accepted_full
        for _ in range(config.theta_max_iters):
            mid = (lo + hi) / 2.0
            acc = _run_pass(order, graph, mid, labels, caps)
            if acc.size >= m:
                hi = mid
                best = acc
            else:
                lo = mid
        theta_final = hi
        chosen = best[:m]  # acceptances arrive in descending score order

    _check_blue_noise(graph, chosen, theta_final)
    return SelectionResult(
        indices=np.sort(chosen),
        theta_final=theta_final,
        per_class_counts=_class_counts(chosen, labels),
        warnings=warnings,
        n=n,
        m=m,
        gamma=config.gamma,
        seed=config.seed,
    )


def top_score_select(scores: np.ndarray, mask: np.ndarray, m: int) -> np.ndarray:
    """The m highest-scoring unmasked indices (ties toward lower index)."""
    order = candidate_order(scores, mask)
    if m > order.size:
        raise InfeasibleBudget(f"budget {m} exceeds candidate pool of {order.size}")
    return np.sort(order[:m])


def _class_counts(chosen: np.ndarray, labels: np.ndarray | None) -> dict | None:
    if labels is None:
        return None
    counts = np.bincount(labels[chosen])
    return {int(c): int(v) for c, v in enumerate(counts) if v > 0}


def _check_blue_noise(graph: SampleGraph, chosen: np.ndarray, theta: float) -> None:
    """Post-hoc invariant: no selected neighbor pair above the threshold."""
    sel = np.zeros(graph.n, dtype=bool)
    sel[chosen] = True
    u_sel = sel[graph.edge_u] & sel[graph.edge_v]
    if np.any(graph.edge_w[u_sel] > theta):
        raise RuntimeError("blue-noise invariant violated")


def kmeans_clusters(emb: np.ndarray, n_clusters: int, seed: int = 0) -> np.ndarray:
    """Lloyd's algorithm with k-means++ seeding; deterministic given seed.

    Stops after 100 iterations or when the largest centroid shift drops below
    1e-6.  Used to fabricate class labels for cap balancing when none exist.
    """
    emb = np.asarray(emb, dtype=np.float64)
    n = emb.shape[0]
    if not 1 <= n_clusters <= n:
        raise UsageError(f"cluster count {n_clusters} outside [1, {n}]")
    rng = np.random.default_rng(seed)
    centers = np.empty((n_clusters, emb.shape[1]), dtype=np.float64)
    centers[0] = emb[rng.integers(n)]
    d2 = np.sum((emb - centers[0]) ** 2, axis=1)
    for j in range(1, n_clusters):
        total = d2.sum()
        if total > 0.0:
            centers[j] = emb[rng.choice(n, p=d2 / total)]
        else:
            centers[j] = emb[int(np.argmin(d2))]
        d2 = np.minimum(d2, np.sum((emb - centers[j]) ** 2, axis=1))

    assign = np.zeros(n, dtype=np.int64)
    for _ in range(100):
        dists = (
            np.sum(emb**2, axis=1)[:, None]
            - 2.0 * emb @ centers.T
            + np.sum(centers**2, axis=1)[None, :]
        )
        assign = np.argmin(dists, axis=1)
        shift = 0.0
        for j in range(n_clusters):
            members = emb[assign == j]
            if members.size:
                new_c = members.mean(axis=0)
                shift = max(shift, float(np.linalg.norm(new_c - centers[j])))
                centers[j] = new_c
        if shift < 1e-6:
            break
    return assign.astype(np.int64)


def with_run_metadata(result: SelectionResult, **meta) -> SelectionResult:
    """Attach pipeline-level report fields (k, beta, entropy, ...)."""
    return replace(result, **meta)
