"""Scikit-learn style estimator wrapping the diffusion scoring machinery."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .graph import BipartiteGraph, build_graph
from .kernels import (DENSE_ORACLE_CAP, KernelScorer, dense_transfer_matrix,
                      resolve_kernel)

__all__ = ["DiffusionRecommender"]


class DiffusionRecommender(BaseEstimator):
    """Diffusion-based recommender over a bipartite user-object graph.

    Parameters
    ----------
    kernel : str or kernel instance, default "bd"
        Kernel family name (``md``, ``hc``, ``hhp``, ``bhc``, ``bd``, ``pd``,
        ``general``) or an already-built kernel object.
    param : float or None, default 0.79
        Scalar parameter for the single-parameter families; must be None for
        ``md``, ``hc``, ``general`` and kernel instances.
    a, b : float or None
        Explicit target/source exponents, only for ``kernel="general"``.
    oracle_cap : int
        Object-count cap for ``transfer_matrix``.

    Examples
    --------
    >>> links = [(0, 0), (0, 1), (1, 1), (1, 2), (2, 1), (2, 2), (2, 3)]
    >>> model = DiffusionRecommender(kernel="bd", param=0.79).fit(links)
    >>> model.recommend(0, length=2)
    array([2, 3])
    """

    def __init__(self, kernel="bd", param: float | None = 0.79,
                 a: float | None = None, b: float | None = None,
                 oracle_cap: int = DENSE_ORACLE_CAP):
        self.kernel = kernel
        self.param = param
        self.a = a
        self.b = b
        self.oracle_cap = oracle_cap

    def fit(self, X, y=None):
        """Build the graph and precompute propagation weights.

        ``X`` is a (k, 2) array-like of (user, object) links, a scipy sparse
        user-by-object matrix, or an existing BipartiteGraph.
        """
        if isinstance(X, BipartiteGraph):
            graph = X
        else:
            graph = build_graph(X)
        if not isinstance(self.kernel, str):
            # A kernel instance is complete on its own; the scalar knobs
            # only apply to family names.
            self.kernel_ = resolve_kernel(self.kernel)
        else:
            param = self.param
            if self.kernel.lower() in ("md", "hc", "general"):
                # Allow the default scalar to coexist with parameterless names.
                param = None
            self.kernel_ = resolve_kernel(self.kernel, param, a=self.a, b=self.b)
        self.graph_ = graph
        self.n_users_ = graph.num_users
        self.n_objects_ = graph.num_objects
        self._scorer = KernelScorer(graph, self.kernel_)
        return self

    def score_user(self, user: int) -> np.ndarray:
        """Diffusion scores over all objects for one user."""
        check_is_fitted(self, "graph_")
        return self._scorer.score(user)

    def recommend(self, user: int, length: int = 20) -> np.ndarray:
        """Top ``length`` uncollected object indices for one user."""
        check_is_fitted(self, "graph_")
        return self._scorer.recommend(user, length).items

    def predict(self, users, length: int = 20) -> np.ndarray:
        """Top-``length`` recommendations for each user in ``users``.

        Returns an integer array of shape (len(users), length); rows with
        fewer than ``length`` uncollected objects are padded with -1.
        """
        check_is_fitted(self, "graph_")
        users = np.atleast_1d(np.asarray(users, dtype=np.int64))
        out = np.full((users.size, length), -1, dtype=np.int64)
        for row, user in enumerate(users):
            items = self._scorer.recommend(int(user), length).items
            out[row, :items.size] = items
        return out

    def transfer_matrix(self) -> np.ndarray:
        """Dense object-to-object transfer matrix (small graphs only)."""
        check_is_fitted(self, "graph_")
        return dense_transfer_matrix(self.graph_, self.kernel_, cap=self.oracle_cap)
