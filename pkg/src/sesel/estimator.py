"""Scikit-learn style wrappers so selection composes with ML pipelines."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from . import pipeline
from .errors import SeselError


class StructuralEntropyScorer(BaseEstimator):
    """Scores samples by their share of the graph's structural entropy.

    After ``fit(X)`` the per-sample scores are available as ``scores_`` (the
    entropy share), ``difficulty_``, and ``combined_``; ``transform(X)``
    returns the entropy share as a column vector so the scorer can be used
    as a feature stage.
    """

    def __init__(self, k=None, tree_mode="compressed", max_height=3, log_base=2.0, threads=1):
        self.k = k
        self.tree_mode = tree_mode
        self.max_height = max_height
        self.log_base = log_base
        self.threads = threads

    def fit(self, X, y=None, difficulty=None):
        graph, tree, scores = pipeline.compute_scores(
            X,
            difficulty,
            k=self.k,
            tree_mode=self.tree_mode,
            max_height=self.max_height,
            log_base=self.log_base,
            threads=self.threads,
            with_phi=True,
        )
        self.n_features_in_ = np.asarray(X).shape[1]
        self.graph_ = graph
        self.tree_ = tree
        self.scores_ = scores.s_e
        self.shapley_ = scores.phi
        self.difficulty_ = scores.s_t
        self.combined_ = scores.s
        return self

    def transform(self, X):
        self._check_fitted(X)
        return self.scores_.reshape(-1, 1)

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X, y, **fit_params).transform(X)

    def _check_fitted(self, X):
        if not hasattr(self, "scores_"):
            raise SeselError("call fit before transform")
        if np.asarray(X).shape[0] != self.scores_.shape[0]:
            raise SeselError("transform expects the same samples passed to fit")


class SampleSelector(BaseEstimator):
    """Budgeted subset selection as a fit/transform estimator.

    ``fit(X, y=None, difficulty=None)`` runs the full pipeline; the selected
    row indices are exposed as ``indices_`` and ``transform(X)`` returns the
    selected rows.  ``y`` doubles as the class labels used for gamma caps.
    """

    def __init__(
        self,
        rate=None,
        budget=None,
        k=None,
        beta=0.0,
        gamma=None,
        kmeans=None,
        tree_mode="compressed",
        max_height=3,
        log_base=2.0,
        strategy="blue_noise",
        random_state=0,
        threads=1,
    ):
        self.rate = rate
        self.budget = budget
        self.k = k
        self.beta = beta
        self.gamma = gamma
        self.kmeans = kmeans
        self.tree_mode = tree_mode
        self.max_height = max_height
        self.log_base = log_base
        self.strategy = strategy
        self.random_state = random_state
        self.threads = threads

    def fit(self, X, y=None, difficulty=None):
        result = pipeline.select(
            X,
            difficulty,
            labels=None if y is None else np.asarray(y, dtype=np.int64),
            rate=self.rate,
            budget=self.budget,
            k=self.k,
            beta=self.beta,
            gamma=self.gamma,
            kmeans=self.kmeans,
            tree_mode=self.tree_mode,
            max_height=self.max_height,
            log_base=self.log_base,
            seed=self.random_state,
            strategy=self.strategy,
            threads=self.threads,
        )
        self.n_features_in_ = np.asarray(X).shape[1]
        self.result_ = result
        self.indices_ = result.indices
        self.theta_ = result.theta_final
        return self

    def transform(self, X):
        if not hasattr(self, "indices_"):
            raise SeselError("call fit before transform")
        X = np.asarray(X)
        if X.shape[0] != self.result_.n:
            raise SeselError("transform expects the same samples passed to fit")
        return X[self.indices_]

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X, y, **fit_params).transform(X)

    def get_support(self, n=None):
        if not hasattr(self, "indices_"):
            raise SeselError("call fit before get_support")
        n = self.result_.n if n is None else n
        support = np.zeros(n, dtype=bool)
        support[self.indices_] = True
        return support
