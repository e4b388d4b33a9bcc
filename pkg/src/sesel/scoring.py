"""Importance scores: normalized structural entropy times training difficulty.

Both ingredients are min-max rescaled onto [eps, 1] before multiplying, so a
raw difficulty signal with negative values (or a structural-entropy vector
whose log terms went negative) cannot flip the ranking of the product.  The
cutoff ratio removes a fraction of the hardest (or easiest, when negative)
samples from the candidate pool; graph scores are still computed on the full
population.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidBeta, LengthMismatch

EPS = 1e-6


@dataclass(frozen=True)
class ScoringConfig:
    beta: float = 0.0
    difficulty_mode: str = "file"  # "identity" scores every sample equally
    eps: float = EPS

    def __post_init__(self):
        if not -1.0 <= self.beta <= 1.0:
            raise InvalidBeta(f"beta={self.beta} outside [-1, 1]")
        if self.difficulty_mode not in ("file", "identity"):
            raise ValueError(f"unknown difficulty mode {self.difficulty_mode!r}")


@dataclass
class ScoreVector:
    """Per-sample score components (all length n)."""

    s_e: np.ndarray
    s_t: np.ndarray
    s: np.ndarray
    phi: np.ndarray | None = field(default=None)


def minmax_normalize(values: np.ndarray, eps: float = EPS) -> np.ndarray:
    """Affine map onto [eps, 1]; a constant vector maps to all ones."""
    values = np.asarray(values, dtype=np.float64)
    lo = values.min()
    hi = values.max()
    if hi == lo:
        return np.ones_like(values)
    return eps + (values - lo) * (1.0 - eps) / (hi - lo)


def combine_scores(s_e_norm: np.ndarray, s_t_norm: np.ndarray) -> np.ndarray:
    """Elementwise product of the normalized global and local scores."""
    s_e_norm = np.asarray(s_e_norm, dtype=np.float64)
    s_t_norm = np.asarray(s_t_norm, dtype=np.float64)
    if s_e_norm.shape != s_t_norm.shape:
        raise LengthMismatch(f"{s_e_norm.shape} vs {s_t_norm.shape}")
    return s_e_norm * s_t_norm


def difficulty_cutoff_mask(raw_difficulty: np.ndarray, beta: float) -> np.ndarray:
    """Candidate mask after removing floor(|beta| * n) samples by difficulty.

    Positive beta removes the most difficult samples, negative beta the
    easiest; ties resolve toward removing the lower index first.
    """
    if not -1.0 <= beta <= 1.0:
        raise InvalidBeta(f"beta={beta} outside [-1, 1]")
    raw = np.asarray(raw_difficulty, dtype=np.float64)
    n = raw.size
    mask = np.ones(n, dtype=bool)
    drop = int(np.floor(abs(beta) * n))
    if drop == 0:
        return mask
    idx = np.arange(n)
    if beta > 0:
        order = np.lexsort((idx, -raw))  # hardest first, lower index first
    else:
        order = np.lexsort((idx, raw))  # easiest first, lower index first
    mask[order[:drop]] = False
    return mask
