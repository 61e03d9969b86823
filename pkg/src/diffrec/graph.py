"""Immutable bipartite user-object graph and construction helpers.

The graph stores both orientations of the adjacency (user -> objects and
object -> users) as CSR-style index arrays so that per-user and per-object
neighborhoods are cheap contiguous slices. All arrays are frozen after
construction; derived scipy matrices are cached lazily.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import EmptyGraphError

__all__ = ["BipartiteGraph", "build_graph", "as_link_array", "sparsity"]


@dataclass(frozen=True, eq=False)
class BipartiteGraph:
    """Bipartite graph between ``num_users`` users and ``num_objects`` objects.

    Links are stored deduplicated and sorted, once per orientation:
    ``user_indices[user_indptr[u]:user_indptr[u+1]]`` is the ascending array
    of objects collected by user ``u``, and symmetrically for objects.
    """

    num_users: int
    num_objects: int
    user_indptr: np.ndarray
    user_indices: np.ndarray
    object_indptr: np.ndarray
    object_indices: np.ndarray

    def __post_init__(self):
        for arr in (self.user_indptr, self.user_indices,
                    self.object_indptr, self.object_indices):
            arr.setflags(write=False)

    @property
    def num_links(self) -> int:
        return int(self.user_indices.shape[0])

    @cached_property
    def user_degrees(self) -> np.ndarray:
        deg = np.diff(self.user_indptr)
        deg.setflags(write=False)
        return deg

    @cached_property
    def object_degrees(self) -> np.ndarray:
        deg = np.diff(self.object_indptr)
        deg.setflags(write=False)
        return deg

    def objects_of(self, user: int) -> np.ndarray:
        """Ascending object indices collected by ``user``."""
        if not 0 <= user < self.num_users:
            raise IndexError(f"user index {user} out of range [0, {self.num_users})")
        return self.user_indices[self.user_indptr[user]:self.user_indptr[user + 1]]

    def users_of(self, obj: int) -> np.ndarray:
        """Ascending user indices that collected ``obj``."""
        if not 0 <= obj < self.num_objects:
            raise IndexError(f"object index {obj} out of range [0, {self.num_objects})")
        return self.object_indices[self.object_indptr[obj]:self.object_indptr[obj + 1]]

    def links(self) -> np.ndarray:
        """All links as a (num_links, 2) array of (user, object), sorted."""
        users = np.repeat(np.arange(self.num_users, dtype=np.int64), self.user_degrees)
        return np.column_stack([users, self.user_indices])

    @cached_property
    def user_object_matrix(self) -> sp.csr_matrix:
        """Binary adjacency as a scipy CSR matrix, shape (num_users, num_objects)."""
        data = np.ones(self.num_links, dtype=np.float64)
        mat = sp.csr_matrix(
            (data, self.user_indices.astype(np.int32, copy=True), self.user_indptr),
            shape=(self.num_users, self.num_objects),
        )
        return mat

    @cached_property
    def object_user_matrix(self) -> sp.csr_matrix:
        """Binary adjacency transposed, shape (num_objects, num_users)."""
        data = np.ones(self.num_links, dtype=np.float64)
        mat = sp.csr_matrix(
            (data, self.object_indices.astype(np.int32, copy=True), self.object_indptr),
            shape=(self.num_objects, self.num_users),
        )
        return mat

    def __repr__(self):
        return (f"BipartiteGraph(num_users={self.num_users}, "
                f"num_objects={self.num_objects}, num_links={self.num_links})")


def as_link_array(links) -> np.ndarray:
    """Coerce ``links`` into a validated (k, 2) int64 array of (user, object).

    Accepts a sequence of pairs, an ndarray, or a scipy sparse matrix whose
    rows are users and columns objects (nonzero entries become links).
    """
    if sp.issparse(links):
        coo = links.tocoo()
        return np.column_stack([coo.row.astype(np.int64), coo.col.astype(np.int64)])
    arr = np.asarray(links)
    if arr.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected a (k, 2) array of links, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        cast = arr.astype(np.int64)
        if not np.array_equal(cast, arr):
            raise ValueError("link indices must be integers")
        arr = cast
    if arr.min() < 0:
        raise ValueError("link indices must be non-negative")
    return arr.astype(np.int64, copy=False)


def build_graph(links, num_users: int | None = None,
                num_objects: int | None = None) -> BipartiteGraph:
    """Build an immutable graph from (user, object) index pairs.

    Duplicate links collapse to a single link. Explicit ``num_users`` /
    ``num_objects`` may enlarge the graph beyond the largest index seen,
    which leaves trailing zero-degree nodes in place.
    """
    arr = as_link_array(links)
    if arr.shape[0] == 0:
        m = int(num_users or 0)
        n = int(num_objects or 0)
        return BipartiteGraph(
            num_users=m, num_objects=n,
            user_indptr=np.zeros(m + 1, dtype=np.int64),
            user_indices=np.empty(0, dtype=np.int64),
            object_indptr=np.zeros(n + 1, dtype=np.int64),
            object_indices=np.empty(0, dtype=np.int64),
        )
    arr = np.unique(arr, axis=0)  # dedup + lexicographic (user, object) order
    users, objs = arr[:, 0], arr[:, 1]
    m = int(users.max()) + 1
    n = int(objs.max()) + 1
    if num_users is not None:
        if num_users < m:
            raise ValueError(f"num_users={num_users} below largest user index {m - 1}")
        m = int(num_users)
    if num_objects is not None:
        if num_objects < n:
            raise ValueError(f"num_objects={num_objects} below largest object index {n - 1}")
        n = int(num_objects)

    user_indptr = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(np.bincount(users, minlength=m), out=user_indptr[1:])
    # arr is sorted by (user, object), so the object column is already grouped
    # by user with each group ascending.
    user_indices = objs.copy()

    order = np.lexsort((users, objs))
    object_indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(objs, minlength=n), out=object_indptr[1:])
    object_indices = users[order]

    return BipartiteGraph(
        num_users=m, num_objects=n,
        user_indptr=user_indptr, user_indices=user_indices,
        object_indptr=object_indptr, object_indices=object_indices,
    )


def sparsity(graph: BipartiteGraph) -> float:
    """Link density q / (m * n). Undefined on an empty side of the graph."""
    if graph.num_users == 0 or graph.num_objects == 0:
        raise EmptyGraphError("sparsity is undefined for a graph with no users or no objects")
    return graph.num_links / (graph.num_users * graph.num_objects)
