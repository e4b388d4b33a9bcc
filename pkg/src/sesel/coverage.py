"""Empirical check that the entropy share lower-bounds sample coverage.

Draws a Gaussian mixture, scores every sample with the natural-log entropy
share (unnormalized edge sum, matching the bound's algebra), and compares the
per-sample lower bound

    bound(u) = exp(s_e(u) / (k_u R)) / (n k_u^2 R)

against the true ball mass P(u, r).  Here k_u is the number of graph
neighbors of u: the bound's derivation is per node over its own neighbor
list, and after union symmetrization that count sits above the construction
parameter k.  With identity component covariance the ball mass has a closed
form through the noncentral chi-square CDF, so the check is exact up to the
radius policy.  The edge-weight bound R is 1 because rescaled cosine weights
cannot exceed one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import ncx2

from .graph import build_knn_graph, default_k
from .tree import TreeBuildConfig, build_tree, lca_nodes


@dataclass(frozen=True)
class GmmSpec:
    classes: int = 10
    per_class: int = 500
    dim: int = 16
    seed: int = 0
    center_scale: float = 1.0

    def __post_init__(self):
        if self.classes < 1 or self.per_class < 1 or self.dim < 1:
            raise ValueError("classes, per_class, and dim must all be >= 1")

    @property
    def n(self) -> int:
        return self.classes * self.per_class


def gmm_centers(spec: GmmSpec) -> np.ndarray:
    rng = np.random.default_rng(spec.seed)
    return rng.standard_normal((spec.classes, spec.dim)) * spec.center_scale


def sample_gmm(spec: GmmSpec) -> tuple[np.ndarray, np.ndarray]:
    """Class centers from a standard normal; samples normal around them."""
    rng = np.random.default_rng(spec.seed)
    centers = rng.standard_normal((spec.classes, spec.dim)) * spec.center_scale
    labels = np.repeat(np.arange(spec.classes, dtype=np.int64), spec.per_class)
    data = centers[labels] + rng.standard_normal((spec.n, spec.dim))
    return data, labels


def ball_coverage(
    spec: GmmSpec,
    u: np.ndarray,
    r: float,
    method: str = "chi2",
    mc_draws: int = 100_000,
    mc_seed: int = 1,
) -> tuple[float, float]:
    """Mixture mass of the radius-r ball around ``u``; returns (p, stderr).

    ``chi2`` evaluates the noncentral chi-square CDF per component (stderr 0);
    ``monte_carlo`` uses fresh draws from the mixture.
    """
    if r <= 0:
        raise ValueError("radius must be positive")
    u = np.asarray(u, dtype=np.float64)
    centers = gmm_centers(spec)
    if method == "chi2":
        nc = np.sum((centers - u) ** 2, axis=1)
        p = float(np.mean(ncx2.cdf(r * r, df=spec.dim, nc=np.maximum(nc, 1e-300))))
        return p, 0.0
    if method == "monte_carlo":
        rng = np.random.default_rng(mc_seed)
        comp = rng.integers(0, spec.classes, mc_draws)
        draws = centers[comp] + rng.standard_normal((mc_draws, spec.dim))
        inside = np.sum((draws - u) ** 2, axis=1) <= r * r
        p = float(inside.mean())
        return p, math.sqrt(max(p * (1.0 - p), 1e-12) / mc_draws)
    raise ValueError(f"unknown method {method!r}")


def _coverage_chi2_all(spec: GmmSpec, data: np.ndarray, r: float) -> np.ndarray:
    centers = gmm_centers(spec)
    total = np.zeros(data.shape[0], dtype=np.float64)
    for c in range(spec.classes):
        nc = np.sum((data - centers[c]) ** 2, axis=1)
        total += ncx2.cdf(r * r, df=spec.dim, nc=np.maximum(nc, 1e-300))
    return total / spec.classes


@dataclass
class CoverageReport:
    spec: GmmSpec
    k: int
    r: float
    r_policy: str
    weight_bound: float
    s_e: np.ndarray = field(repr=False)
    bound: np.ndarray = field(repr=False)
    coverage: np.ndarray = field(repr=False)
    ratio: np.ndarray = field(repr=False)

    def summary(self) -> dict:
        q = np.percentile(self.ratio, [50, 90, 99])
        return {
            "n": self.spec.n,
            "classes": self.spec.classes,
            "per_class": self.spec.per_class,
            "dim": self.spec.dim,
            "seed": self.spec.seed,
            "k": self.k,
            "r": self.r,
            "r_policy": self.r_policy,
            "weight_bound": self.weight_bound,
            "p50": float(q[0]),
            "p90": float(q[1]),
            "p99": float(q[2]),
            "frac_ratio_ge_1": float(np.mean(self.ratio >= 1.0)),
            "frac_in_band_100_145": float(
                np.mean((self.ratio >= 1.00) & (self.ratio <= 1.45))
            ),
            "frac_below_197": float(np.mean(self.ratio < 1.97)),
        }

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")

    def write_csv(self, path) -> None:
        lines = ["index,s_e,bound,coverage,ratio"]
        for i in range(self.ratio.size):
            lines.append(
                f"{i},{self.s_e[i]!r},{self.bound[i]!r},{self.coverage[i]!r},{self.ratio[i]!r}"
            )
        Path(path).write_text("\n".join(lines) + "\n")


def run_coverage_check(
    spec: GmmSpec,
    k: int | None = None,
    r: float | None = None,
    r_policy: str = "p95_edge_length",
    threads: int = 1,
) -> CoverageReport:
    """Generate the mixture, score it, and compare bound against true coverage."""
    data, _ = sample_gmm(spec)
    n = spec.n
    if k is None:
        k = default_k(n)
    graph = build_knn_graph(data, k, threads=threads)
    tree = build_tree(graph, TreeBuildConfig())

    # natural-log, unnormalized entropy share: the bound exponentiates it
    lca = lca_nodes(tree, graph.edge_u, graph.edge_v)
    contrib = graph.edge_w * np.log(tree.vol[lca])
    s_e = np.bincount(graph.edge_u, weights=contrib, minlength=n)
    s_e += np.bincount(graph.edge_v, weights=contrib, minlength=n)

    if r is None:
        if r_policy.startswith("p"):
            pct = float(r_policy.split("_")[0][1:])
        else:
            raise ValueError(f"unknown radius policy {r_policy!r}")
        lengths = np.linalg.norm(data[graph.edge_u] - data[graph.edge_v], axis=1)
        r = float(np.percentile(lengths, pct))
    else:
        r_policy = "explicit"

    weight_bound = 1.0
    k_u = np.diff(graph.indptr).astype(np.float64)  # per-node neighbor count
    bound = np.exp(s_e / (k_u * weight_bound)) / (n * k_u * k_u * weight_bound)
    coverage = _coverage_chi2_all(spec, data, r)
    ratio = coverage / bound
    return CoverageReport(
        spec=spec,
        k=k,
        r=r,
        r_policy=r_policy,
        weight_bound=weight_bound,
        s_e=s_e,
        bound=bound,
        coverage=coverage,
        ratio=ratio,
    )
