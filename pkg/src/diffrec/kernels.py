"""Diffusion kernels on bipartite graphs and the scoring machinery around them.

Every kernel here defines an object-to-object resource transfer matrix W.
Scoring a user means placing one unit of resource on each collected object
and reading off the redistributed amounts: ``scores = W @ f`` where ``f`` is
the user's binary collection vector.

The whole family factors into three diagonal weightings around the two-hop
adjacency walk::

    W[t, s] = target_w[t] * source_w[s] * sum_l a[l, t] * a[l, s] * user_w[l]

with ``a`` the binary user-object adjacency and ``l`` running over users.
Degree-exponent kernels use pure powers of object degree on both hops and
``1 / k_l`` in the middle; the preferential kernel replaces the middle
normalization with each user's total preferential weight. Keeping every
implementation on these shared vectors is what makes the sparse per-user
path and the dense reference matrix agree to rounding error.

Mass diffusion corresponds to exponents (0, 1), heat conduction to (1, 0),
and the balanced kernel applies the same exponent on both hops, which makes
W symmetric.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .errors import ColdStartError, OracleCapError
from .graph import BipartiteGraph

__all__ = [
    "DegreeKernel", "PreferentialKernel", "Kernel",
    "mass_diffusion", "heat_conduction", "hybrid",
    "biased_heat_conduction", "balanced_diffusion", "preferential_diffusion",
    "resolve_kernel", "kernel_params", "kernel_label",
    "degree_power", "propagation_weights",
    "PropagationWeights", "KernelScorer", "ScoreVector", "RecommendationList",
    "score_user", "dense_transfer_matrix", "recommend",
    "DENSE_ORACLE_CAP",
]

# Dense transfer matrices are quadratic in the object count; above this size
# they stop being a debugging aid and start being a memory problem.
DENSE_ORACLE_CAP = 2000


@dataclass(frozen=True)
class DegreeKernel:
    """Two-exponent degree-normalized diffusion kernel.

    ``target_exp`` is the exponent applied to the degree of the object being
    scored (the averaging side: 1 recovers heat conduction) and
    ``source_exp`` the exponent applied to the degree of the object the
    resource starts from (the spreading side: 1 recovers mass diffusion)::

        W[t, s] = k_t ** -target_exp * k_s ** -source_exp
                  * sum_l a[l, t] * a[l, s] / k_l
    """

    target_exp: float
    source_exp: float


@dataclass(frozen=True)
class PreferentialKernel:
    """Degree-preferential diffusion kernel.

    Each user redistributes resource to their collected objects in proportion
    to ``k ** exponent`` instead of uniformly::

        W[t, s] = k_t ** exponent / k_s * sum_l a[l, t] * a[l, s] / M_l

    where ``M_l`` is user ``l``'s total preferential weight
    ``sum_r a[l, r] * k_r ** exponent``. Negative exponents push resource
    toward low-degree objects; ``exponent = 0`` reduces to mass diffusion.

    With ``constant_norm=True`` the per-user normalization treats the
    preferential factor as a constant of the redistribution, which cancels
    it exactly and collapses the kernel back to mass diffusion. It exists
    for compatibility with implementations that normalize that way.
    """

    exponent: float
    constant_norm: bool = False

    def __post_init__(self):
        if not -1.0 <= self.exponent <= 0.0:
            raise ValueError(
                f"preferential exponent must lie in [-1, 0], got {self.exponent}")


Kernel = Union[DegreeKernel, PreferentialKernel]


def mass_diffusion() -> DegreeKernel:
    """Random-walk spreading: each object splits its resource over its users."""
    return DegreeKernel(target_exp=0.0, source_exp=1.0)


def heat_conduction() -> DegreeKernel:
    """Averaging process: each object receives the mean of its users' resource."""
    return DegreeKernel(target_exp=1.0, source_exp=0.0)


def hybrid(mix: float) -> DegreeKernel:
    """Interpolation between heat conduction (``mix=0``) and mass diffusion (``mix=1``)."""
    return DegreeKernel(target_exp=1.0 - mix, source_exp=mix)


def biased_heat_conduction(exponent: float) -> DegreeKernel:
    """Heat conduction with a tunable averaging exponent; ``exponent=1`` is plain HC."""
    return DegreeKernel(target_exp=exponent, source_exp=0.0)


def balanced_diffusion(exponent: float) -> DegreeKernel:
    """Symmetric kernel applying the same degree exponent on both hops."""
    return DegreeKernel(target_exp=exponent, source_exp=exponent)


def preferential_diffusion(exponent: float, constant_norm: bool = False) -> PreferentialKernel:
    return PreferentialKernel(exponent=exponent, constant_norm=constant_norm)


_FAMILY_BUILDERS = {
    "md": mass_diffusion,
    "hc": heat_conduction,
    "hhp": hybrid,
    "bhc": biased_heat_conduction,
    "bd": balanced_diffusion,
    "pd": preferential_diffusion,
}

#: Families that take a single scalar parameter, in canonical order.
PARAMETRIC_FAMILIES = ("hhp", "bhc", "bd", "pd")


def resolve_kernel(kernel, param: float | None = None,
                   a: float | None = None, b: float | None = None) -> Kernel:
    """Turn a kernel name (plus parameter) or kernel instance into a kernel.

    Names: ``md``, ``hc`` (no parameter), ``hhp``, ``bhc``, ``bd``, ``pd``
    (scalar ``param``), and ``general`` (explicit exponents ``a``, ``b`` for
    the target and source hops).
    """
    if isinstance(kernel, (DegreeKernel, PreferentialKernel)):
        if param is not None or a is not None or b is not None:
            raise ValueError("parameters are not accepted alongside a kernel instance")
        return kernel
    if not isinstance(kernel, str):
        raise TypeError(f"kernel must be a name or kernel instance, got {type(kernel)!r}")
    name = kernel.lower()
    if name == "general":
        if a is None or b is None:
            raise ValueError("kernel 'general' requires both exponents a and b")
        return DegreeKernel(target_exp=float(a), source_exp=float(b))
    if name not in _FAMILY_BUILDERS:
        valid = ", ".join(sorted(_FAMILY_BUILDERS) + ["general"])
        raise ValueError(f"unknown kernel {kernel!r}; valid names: {valid}")
    if name in ("md", "hc"):
        if param is not None:
            raise ValueError(f"kernel {name!r} takes no parameter")
        return _FAMILY_BUILDERS[name]()
    if param is None:
        raise ValueError(f"kernel {name!r} requires a parameter")
    return _FAMILY_BUILDERS[name](float(param))


def kernel_params(kernel: Kernel) -> dict:
    """Serializable description of a kernel, stable across runs."""
    if isinstance(kernel, PreferentialKernel):
        return {"kind": "preferential", "exponent": kernel.exponent,
                "constant_norm": kernel.constant_norm}
    if isinstance(kernel, DegreeKernel):
        return {"kind": "degree", "target_exp": kernel.target_exp,
                "source_exp": kernel.source_exp}
    raise TypeError(f"unsupported kernel type {type(kernel)!r}")


def kernel_label(kernel: Kernel) -> str:
    """Short human-readable kernel name, preferring the family spelling."""
    if isinstance(kernel, PreferentialKernel):
        label = f"pd({kernel.exponent:g})"
        return label + "[constant_norm]" if kernel.constant_norm else label
    a, b = kernel.target_exp, kernel.source_exp
    if (a, b) == (0.0, 1.0):
        return "md"
    if (a, b) == (1.0, 0.0):
        return "hc"
    if a == b:
        return f"bd({a:g})"
    if b == 0.0:
        return f"bhc({a:g})"
    if a + b == 1.0:
        return f"hhp({b:g})"
    return f"general(a={a:g},b={b:g})"


def degree_power(degrees, exponent: float) -> np.ndarray:
    """Elementwise ``degrees ** exponent`` with zero degrees pinned to zero.

    Zero-degree nodes carry no resource, so their weight is zero regardless
    of the exponent sign; ``exponent == 0`` returns all ones so that unused
    hops stay neutral. Every kernel path funnels through this helper, which
    keeps preset identities exact.
    """
    deg = np.asarray(degrees, dtype=np.float64)
    if exponent == 0.0:
        return np.ones_like(deg)
    out = np.zeros_like(deg)
    np.power(deg, exponent, out=out, where=deg > 0)
    return out


class PropagationWeights(NamedTuple):
    """Per-node diagonal weights of the factored transfer matrix."""

    source: np.ndarray  # per object, first hop
    user: np.ndarray    # per user, middle normalization
    target: np.ndarray  # per object, second hop


def propagation_weights(graph: BipartiteGraph, kernel: Kernel) -> PropagationWeights:
    """Compute the three diagonal weight vectors for ``kernel`` on ``graph``."""
    ko = graph.object_degrees
    ku = graph.user_degrees
    if isinstance(kernel, DegreeKernel):
        return PropagationWeights(
            source=degree_power(ko, -kernel.source_exp),
            user=degree_power(ku, -1.0),
            target=degree_power(ko, -kernel.target_exp),
        )
    if isinstance(kernel, PreferentialKernel):
        if kernel.constant_norm:
            # The constant per-user normalization cancels the preferential
            # factor on the target hop exactly, leaving mass diffusion.
            return PropagationWeights(
                source=degree_power(ko, -1.0),
                user=degree_power(ku, -1.0),
                target=np.ones(graph.num_objects, dtype=np.float64),
            )
        pref = degree_power(ko, kernel.exponent)
        totals = graph.user_object_matrix @ pref  # per user: sum of k**eps over collection
        user = np.zeros_like(totals)
        np.divide(1.0, totals, out=user, where=totals > 0)
        return PropagationWeights(source=degree_power(ko, -1.0), user=user, target=pref)
    raise TypeError(f"unsupported kernel type {type(kernel)!r}")


class ScoreVector(NamedTuple):
    """Scores for every object from one user's viewpoint."""

    user: int
    scores: np.ndarray
    kernel: Kernel


class RecommendationList(NamedTuple):
    """Top-ranked previously uncollected objects for one user."""

    user: int
    items: np.ndarray
    length: int


class KernelScorer:
    """Reusable scorer for one (graph, kernel) pair.

    Precomputes the propagation weights and the middle-and-target scaled
    adjacency once, so that scoring a user costs one sparse two-hop walk
    over their neighborhood. Build one of these whenever more than a couple
    of users will be scored with the same kernel.
    """

    def __init__(self, graph: BipartiteGraph, kernel: Kernel):
        self.graph = graph
        self.kernel = kernel
        self.weights = propagation_weights(graph, kernel)
        adj = graph.user_object_matrix
        rows = np.repeat(np.arange(graph.num_users), graph.user_degrees)
        scaled = adj.copy()
        scaled.data = self.weights.user[rows] * self.weights.target[adj.indices]
        self._scaled = scaled  # diag(user_w) @ A @ diag(target_w)
        self._obj_user = graph.object_user_matrix

    def score(self, user: int) -> np.ndarray:
        """Raw score array over all objects for ``user``."""
        objs = self.graph.objects_of(user)
        if objs.size == 0:
            raise ColdStartError(f"user {user} has no collected objects to diffuse from")
        # Resource leaves the collected objects weighted by the source hop,
        # pools at users, then flows back through the scaled adjacency.
        pooled = self._obj_user[objs].T @ self.weights.source[objs]
        return self._scaled.T @ pooled

    def score_vector(self, user: int) -> ScoreVector:
        return ScoreVector(user=user, scores=self.score(user), kernel=self.kernel)

    def recommend(self, user: int, length: int) -> RecommendationList:
        return recommend(self.score_vector(user), self.graph, length)


def score_user(graph: BipartiteGraph, user: int, kernel: Kernel) -> ScoreVector:
    """Score every object for one user. One-shot convenience around KernelScorer."""
    return KernelScorer(graph, kernel).score_vector(user)


def dense_transfer_matrix(graph: BipartiteGraph, kernel: Kernel,
                          cap: int = DENSE_ORACLE_CAP) -> np.ndarray:
    """Materialize the full object-to-object transfer matrix.

    Reference implementation for tests and small-graph inspection; refuses
    graphs above ``cap`` objects. ``scores == W @ f`` reproduces the sparse
    path to rounding error.
    """
    if graph.num_objects > cap:
        raise OracleCapError(
            f"dense transfer matrix capped at {cap} objects, graph has {graph.num_objects}")
    w = propagation_weights(graph, kernel)
    adj = graph.user_object_matrix.toarray()
    gram = adj.T @ (adj * w.user[:, None])  # gram[t, s] = sum_l a[l,t] a[l,s] user_w[l]
    return w.target[:, None] * gram * w.source[None, :]


def recommend(scores: ScoreVector, graph: BipartiteGraph, length: int) -> RecommendationList:
    """Rank previously uncollected objects by descending score.

    Ties break toward the lower object index. The list is truncated when
    fewer than ``length`` uncollected objects exist.
    """
    if length < 1:
        raise ValueError(f"recommendation length must be positive, got {length}")
    user = scores.user
    collected = graph.objects_of(user)
    mask = np.ones(graph.num_objects, dtype=bool)
    mask[collected] = False
    candidates = np.nonzero(mask)[0]
    # argsort on negated scores is stable, so equal scores keep the
    # ascending candidate order.
    order = np.argsort(-scores.scores[candidates], kind="stable")
    items = candidates[order[:length]]
    return RecommendationList(user=user, items=items, length=length)
