"""Ranking-based evaluation of diffusion kernels on a train/test split.

Conventions shared by every metric here:

* A user qualifies for evaluation when they have at least one training link
  (so they can be scored at all) and at least one test link (so there is
  something to find). Test links of users with an empty training side are
  skipped and counted, never silently dropped.
* Rankings run over the user's previously uncollected objects only, in
  descending score order with ties broken toward the lower object index.
* The ranking score of a test link is its rank divided by the number of
  uncollected objects, so 0 is best and 1 is worst; lists for the list-based
  metrics are the top ``length`` entries of the same ranking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .datasets import SplitDataset, SplitInfo
from .errors import EmptyEvaluationError
from .kernels import Kernel, KernelScorer, RecommendationList

__all__ = [
    "LinkRank", "RankingResult", "ranking_score",
    "precision_enhancement", "hamming_distance", "self_information",
    "DegreeBin", "DegreeBinCurve", "degree_binned_ranking_score",
    "MetricsReport", "EvaluationResult", "evaluate_kernel",
]


class LinkRank(NamedTuple):
    """Rank outcome of a single test link."""

    user: int
    obj: int
    rank_fraction: float
    obj_degree: int  # training-side degree of the object


@dataclass(frozen=True)
class RankingResult:
    score: float
    links: tuple
    users_evaluated: int
    links_skipped: int


def _score_fn(scorer):
    return scorer.score if isinstance(scorer, KernelScorer) else scorer


def _rank_user(scores: np.ndarray, collected: np.ndarray, num_objects: int):
    """Rank uncollected objects; returns (candidates, positions, order).

    ``candidates`` is ascending; ``positions[i]`` is the 1-based rank of
    ``candidates[i]``; ``order`` sorts candidates by rank.
    """
    mask = np.ones(num_objects, dtype=bool)
    mask[collected] = False
    candidates = np.nonzero(mask)[0]
    order = np.argsort(-scores[candidates], kind="stable")
    positions = np.empty(candidates.size, dtype=np.int64)
    positions[order] = np.arange(1, candidates.size + 1)
    return candidates, positions, order


def _test_link_fractions(candidates, positions, test_objs):
    idx = np.searchsorted(candidates, test_objs)
    if idx.size and (np.any(idx >= candidates.size)
                     or np.any(candidates[np.minimum(idx, candidates.size - 1)] != test_objs)):
        raise ValueError("test link points at an object already collected in training")
    return positions[idx] / candidates.size


def ranking_score(ds: SplitDataset, scorer) -> RankingResult:
    """Mean relative rank of held-out links, lower is better.

    ``scorer`` is a KernelScorer or any callable mapping a user index to a
    score array over all objects.
    """
    score = _score_fn(scorer)
    train, test = ds.train, ds.test
    records = []
    skipped = 0
    users = 0
    for user in range(train.num_users):
        test_objs = test.objects_of(user)
        if test_objs.size == 0:
            continue
        if train.user_degrees[user] == 0:
            skipped += int(test_objs.size)
            continue
        candidates, positions, _ = _rank_user(
            score(user), train.objects_of(user), train.num_objects)
        fractions = _test_link_fractions(candidates, positions, test_objs)
        degrees = train.object_degrees[test_objs]
        records.extend(
            LinkRank(user, int(o), float(f), int(d))
            for o, f, d in zip(test_objs, fractions, degrees))
        users += 1
    if not records:
        raise EmptyEvaluationError("no test link belongs to a user with training links")
    mean = sum(r.rank_fraction for r in records) / len(records)
    return RankingResult(score=mean, links=tuple(records),
                         users_evaluated=users, links_skipped=skipped)


def _as_list_dict(lists) -> dict:
    if isinstance(lists, dict):
        return lists
    return {rl.user: rl for rl in lists}


def precision_enhancement(ds: SplitDataset, lists, length: int) -> float:
    """Mean precision relative to random guessing over qualifying users.

    For each user the top-``length`` hit count is compared against the
    expectation of a uniformly random list, ``length * k_test / n``.
    """
    lists = _as_list_dict(lists)
    train, test = ds.train, ds.test
    n = train.num_objects
    total = 0.0
    users = 0
    for user in range(train.num_users):
        k_test = test.user_degrees[user]
        if k_test == 0 or train.user_degrees[user] == 0:
            continue
        if user not in lists:
            raise ValueError(f"no recommendation list supplied for qualifying user {user}")
        items = lists[user].items[:length]
        hits = int(np.isin(items, test.objects_of(user), assume_unique=True).sum())
        total += (n * hits) / (length * k_test)
        users += 1
    if users == 0:
        raise EmptyEvaluationError("no qualifying user to average precision over")
    return total / users


def hamming_distance(lists, length: int, num_objects: int | None = None) -> float:
    """Mean pairwise dissimilarity of recommendation lists, 1 = fully distinct.

    For each user pair the overlap of their top-``length`` lists is counted;
    the distance of a pair is ``1 - overlap / length``.
    """
    lists = _as_list_dict(lists)
    arrays = [lists[user].items[:length] for user in sorted(lists)]
    if len(arrays) < 2:
        raise EmptyEvaluationError("hamming distance needs at least two lists")
    if num_objects is None:
        num_objects = max(int(a.max()) for a in arrays if a.size) + 1
    # Pairwise overlaps as one indicator-matrix product. Entries are small
    # integers, exact in float32, so the result does not depend on how the
    # BLAS partitions the work.
    indicator = np.zeros((len(arrays), num_objects), dtype=np.float32)
    for row, items in enumerate(arrays):
        indicator[row, items] = 1.0
    overlaps = indicator @ indicator.T
    iu = np.triu_indices(len(arrays), k=1)
    return float(np.mean(1.0 - overlaps[iu] / np.float64(length)))


def self_information(graph, lists, length: int) -> float:
    """Mean surprisal of recommended objects, in bits.

    An object collected by ``k`` of the ``m`` users carries ``log2(m / k)``
    bits. Entries with zero training degree are excluded (their surprisal is
    undefined under the training popularity model).
    """
    lists = _as_list_dict(lists)
    m = graph.num_users
    values = []
    for user in sorted(lists):
        items = lists[user].items[:length]
        degrees = graph.object_degrees[items]
        kept = degrees[degrees > 0]
        if kept.size:
            values.append(np.log2(m / kept))
    if not values:
        raise EmptyEvaluationError("no recommended object has a training degree")
    pooled = np.concatenate(values)
    return float(pooled.mean())


class DegreeBin(NamedTuple):
    index: int
    lower: float
    upper: float
    mean_rank: float | None  # None marks a populated=0 bin, kept in place
    link_count: int


@dataclass(frozen=True)
class DegreeBinCurve:
    coefficient: float
    log_base: float | None  # None = natural log
    bins: tuple


def degree_binned_ranking_score(links, log_base: float | None = None) -> DegreeBinCurve:
    """Group per-link ranking scores into logarithmic object-degree bins.

    Bin ``x`` covers training degrees in ``[a*(x*x - x), a*(x*x + x))`` with
    ``a = log(5) / 2`` in the chosen base (natural by default), which makes
    bin widths grow linearly on a log-degree axis. Empty bins stay in the
    curve with a None mean so downstream plots keep their x positions.
    """
    if log_base is None:
        coefficient = 0.5 * math.log(5.0)
    else:
        if log_base <= 1.0:
            raise ValueError(f"log base must exceed 1, got {log_base}")
        coefficient = 0.5 * (math.log(5.0) / math.log(log_base))
    links = list(links)
    if not links:
        raise EmptyEvaluationError("no link ranks to bin")
    degrees = np.array([l.obj_degree for l in links], dtype=np.float64)
    fractions = np.array([l.rank_fraction for l in links], dtype=np.float64)
    max_degree = degrees.max()
    bins = []
    x = 1
    while True:
        lower = coefficient * (x * x - x)
        upper = coefficient * (x * x + x)
        if lower > max_degree:
            break
        inside = (degrees >= lower) & (degrees < upper)
        count = int(inside.sum())
        mean = float(fractions[inside].mean()) if count else None
        bins.append(DegreeBin(index=x, lower=lower, upper=upper,
                              mean_rank=mean, link_count=count))
        x += 1
    return DegreeBinCurve(coefficient=coefficient, log_base=log_base, bins=tuple(bins))


@dataclass(frozen=True)
class MetricsReport:
    """All four headline metrics for one kernel on one split."""

    kernel: Kernel
    length: int
    ranking_score: float
    precision_enhancement: float
    hamming: float
    self_information: float
    users_evaluated: int
    links_evaluated: int
    links_skipped: int
    split: SplitInfo


@dataclass(frozen=True)
class EvaluationResult:
    report: MetricsReport
    link_ranks: tuple
    lists: dict


def evaluate_kernel(ds: SplitDataset, kernel: Kernel, length: int = 20) -> EvaluationResult:
    """Score one kernel on a split: headline metrics plus per-link ranks.

    Each qualifying user is scored exactly once; the ranking metrics and the
    top-``length`` lists both derive from that single ranking.
    """
    if length < 1:
        raise ValueError(f"list length must be positive, got {length}")
    scorer = KernelScorer(ds.train, kernel)
    train, test = ds.train, ds.test
    records = []
    lists: dict = {}
    skipped = 0
    for user in range(train.num_users):
        test_objs = test.objects_of(user)
        if test_objs.size == 0:
            continue
        if train.user_degrees[user] == 0:
            skipped += int(test_objs.size)
            continue
        candidates, positions, order = _rank_user(
            scorer.score(user), train.objects_of(user), train.num_objects)
        fractions = _test_link_fractions(candidates, positions, test_objs)
        degrees = train.object_degrees[test_objs]
        records.extend(
            LinkRank(user, int(o), float(f), int(d))
            for o, f, d in zip(test_objs, fractions, degrees))
        lists[user] = RecommendationList(
            user=user, items=candidates[order[:length]], length=length)
    if not records:
        raise EmptyEvaluationError("no test link belongs to a user with training links")

    rank_mean = sum(r.rank_fraction for r in records) / len(records)
    report = MetricsReport(
        kernel=kernel, length=length,
        ranking_score=rank_mean,
        precision_enhancement=precision_enhancement(ds, lists, length),
        hamming=hamming_distance(lists, length, num_objects=train.num_objects),
        self_information=self_information(train, lists, length),
        users_evaluated=len(lists),
        links_evaluated=len(records),
        links_skipped=skipped,
        split=ds.describe(),
    )
    return EvaluationResult(report=report, link_ranks=tuple(records), lists=lists)
