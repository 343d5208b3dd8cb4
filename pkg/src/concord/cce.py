"""Compromise-order search.

Scores every common order of the choices by how many adjacent swaps each
participant needs to reach it from their own ranking.  The score combines the
mean swap count (total compromise) with the population standard deviation
(how unevenly the compromise is spread); the full search returns every order
tying the minimal score.
"""

from __future__ import annotations

import heapq
import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

from .model import (
    ValidatedProfile,
    Weights,
    inversion_count,
    require_complete,
)

DEFAULT_MAX_CHOICES = 10
HARD_MAX_CHOICES = 12
TIE_TOLERANCE = 1e-9


class SearchLimitError(ValueError):
    """The choice count exceeds the configured full-search limit."""


@dataclass(frozen=True)
class OrderScore:
    order: tuple[str, ...]
    r: tuple[int, ...]  # per-participant swap counts, profile order
    mu: float
    sigma: float
    score: float


@dataclass(frozen=True)
class CceResult:
    best: tuple[OrderScore, ...]  # all orders tying the minimum
    consensus_choices: tuple[str, ...]  # distinct heads of best orders
    weights: Weights
    explored: int
    # Minimal score achievable by an order led by each choice; drives the
    # candidate widening in the sublation step.
    head_best: Mapping[str, float]


def _stats(r: Sequence[int], weights: Weights) -> tuple[float, float, float]:
    m = len(r)
    mu = sum(r) / m
    sigma = math.sqrt(sum((x - mu) ** 2 for x in r) / m)
    return mu, sigma, weights.w_mu * mu + weights.w_sigma * sigma


def score_order(
    vp: ValidatedProfile, order: Sequence[str], weights: Weights = Weights()
) -> OrderScore:
    """Score a single candidate common order against every ballot."""
    require_complete(vp)
    if sorted(order) != sorted(vp.choice_ids):
        raise ValueError("order must be a permutation of the profile's choices")
    r = []
    for p in vp.participants:
        assert p.ballot is not None
        rule = vp.rank[p.id]
        r.append(inversion_count([rule[cid] for cid in order]))
    mu, sigma, score = _stats(r, weights)
    return OrderScore(order=tuple(order), r=tuple(r), mu=mu, sigma=sigma, score=score)


def _check_limit(vp: ValidatedProfile, max_choices: int | None) -> None:
    limit = DEFAULT_MAX_CHOICES if max_choices is None else max_choices
    if limit > HARD_MAX_CHOICES:
        raise SearchLimitError(
            f"full search is capped at {HARD_MAX_CHOICES} choices"
        )
    if vp.n > limit:
        raise SearchLimitError(
            f"{vp.n} choices exceed the full-search limit of {limit}; "
            "reduce choices or raise the limit explicitly"
        )
    if vp.n > DEFAULT_MAX_CHOICES:
        warnings.warn(
            f"full search over {vp.n}! orders will be slow", RuntimeWarning
        )


def _iter_scored(vp: ValidatedProfile, weights: Weights):
    rules = []
    for p in vp.participants:
        assert p.ballot is not None
        rules.append(vp.rank[p.id])
    for perm in itertools.permutations(vp.choice_ids):
        r = tuple(inversion_count([rule[cid] for cid in perm]) for rule in rules)
        mu, sigma, score = _stats(r, weights)
        yield OrderScore(order=perm, r=r, mu=mu, sigma=sigma, score=score)


def search_full(
    vp: ValidatedProfile,
    weights: Weights = Weights(),
    max_choices: int | None = None,
) -> CceResult:
    """Evaluate all n! orders and return every one tying the minimal score.

    Ties within TIE_TOLERANCE are all kept, sorted by (score, order).  The
    result also records, per choice, the best score among orders led by it.
    """
    require_complete(vp)
    _check_limit(vp, max_choices)
    best: list[OrderScore] = []
    best_score = math.inf
    head_best: dict[str, float] = {}
    explored = 0
    for entry in _iter_scored(vp, weights):
        explored += 1
        head = entry.order[0]
        if entry.score < head_best.get(head, math.inf):
            head_best[head] = entry.score
        if entry.score < best_score - TIE_TOLERANCE:
            best_score = entry.score
            best = [entry]
        elif entry.score <= best_score + TIE_TOLERANCE:
            best_score = min(best_score, entry.score)
            best.append(entry)
    best = [e for e in best if e.score <= best_score + TIE_TOLERANCE]
    best.sort(key=lambda e: (e.score, e.order))
    return CceResult(
        best=tuple(best),
        consensus_choices=consensus_choices_of(best),
        weights=weights,
        explored=explored,
        head_best=head_best,
    )


def consensus_choices_of(best: Sequence[OrderScore]) -> tuple[str, ...]:
    """Distinct first-ranked choices of the best orders, in list order."""
    seen: list[str] = []
    for entry in best:
        if entry.order[0] not in seen:
            seen.append(entry.order[0])
    return tuple(seen)


def consensus_choices(result: CceResult) -> tuple[str, ...]:
    return consensus_choices_of(result.best)


def score_table(
    vp: ValidatedProfile,
    weights: Weights = Weights(),
    limit: int = 10,
    max_choices: int | None = None,
) -> list[OrderScore]:
    """The *limit* lowest-scoring orders, ascending by (score, order)."""
    require_complete(vp)
    _check_limit(vp, max_choices)
    if limit < 1:
        raise ValueError("limit must be positive")
    return heapq.nsmallest(
        limit, _iter_scored(vp, weights), key=lambda e: (e.score, e.order)
    )


def ranked_heads(result: CceResult) -> tuple[str, ...]:
    """Choices ordered by the best score of any order they lead (ties by id)."""
    return tuple(
        sorted(result.head_best, key=lambda c: (result.head_best[c], c))
    )
