"""Permissible-range analysis.

Each participant accepts the top ``permit_count`` choices of their ranking.
When no choice lies in everyone's accepted prefix, we look for the choices
that can be brought into every prefix with the least total widening, where
widening participant i's prefix by l_i ranks costs l_i.  The minimal total
cost of admitting a given choice has a closed form: sum over participants of
max(0, rank_i(choice) - permit_count_i).  A literal enumeration over widening
vectors is kept as an independent test oracle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

from .model import ProfileError, ValidatedProfile, require_complete


class TableTooLargeError(ValueError):
    """The requested expansion table exceeds the configured row cap."""


class OracleGuardError(ValueError):
    """The enumeration oracle's search space guard was exceeded."""


@dataclass(frozen=True)
class ExpansionRow:
    """One widening vector with the accepted prefixes and their intersection."""

    expansion: tuple[int, ...]  # l_i per participant, in profile order
    total: int
    permissible_sets: tuple[tuple[str, ...], ...]  # top-(k_i + l_i) prefixes
    intersection: frozenset[str]


@dataclass(frozen=True)
class PmaResult:
    consensus_choices: tuple[str, ...]  # id-sorted
    total_expansion: int
    witnesses: Mapping[str, tuple[int, ...]]  # choice id -> minimal widening vector
    immediate: bool  # true iff the un-widened prefixes already intersect


def _prefixes(vp: ValidatedProfile, extra: Sequence[int]) -> list[tuple[str, ...]]:
    sets = []
    for p, l in zip(vp.participants, extra):
        assert p.ballot is not None
        sets.append(p.ballot.ranking[: p.ballot.permit_count + l])
    return sets


def base_intersection(vp: ValidatedProfile) -> frozenset[str]:
    """Choices inside every participant's un-widened accepted prefix."""
    require_complete(vp)
    result: set[str] | None = None
    for p in vp.participants:
        assert p.ballot is not None
        prefix = set(p.ballot.ranking[: p.ballot.permit_count])
        result = prefix if result is None else result & prefix
    assert result is not None
    return frozenset(result)


def expansion_cost(vp: ValidatedProfile, choice: str) -> int:
    """Minimal total widening that places *choice* in every accepted prefix."""
    require_complete(vp)
    if choice not in vp.choice_ids:
        raise KeyError(choice)
    cost = 0
    for p in vp.participants:
        assert p.ballot is not None
        cost += max(0, vp.rank[p.id][choice] - p.ballot.permit_count)
    return cost


def witness_vector(vp: ValidatedProfile, choice: str) -> tuple[int, ...]:
    """Componentwise-minimal widening vector admitting *choice* everywhere."""
    vec = []
    for p in vp.participants:
        assert p.ballot is not None
        vec.append(max(0, vp.rank[p.id][choice] - p.ballot.permit_count))
    return tuple(vec)


def analyze(vp: ValidatedProfile) -> PmaResult:
    """Find the consensusable choices with minimal total widening.

    If the base prefixes already intersect, those choices are returned at
    cost zero.  Otherwise every choice attaining the minimal widening cost
    is returned, each with its minimal widening vector as witness.  Ties are
    all kept, ordered by choice id.
    """
    require_complete(vp)
    base = base_intersection(vp)
    if base:
        choices = tuple(sorted(base))
        zero = (0,) * vp.m
        return PmaResult(
            consensus_choices=choices,
            total_expansion=0,
            witnesses={c: zero for c in choices},
            immediate=True,
        )
    costs = {cid: expansion_cost(vp, cid) for cid in vp.choice_ids}
    best = min(costs.values())
    winners = tuple(sorted(c for c, cost in costs.items() if cost == best))
    return PmaResult(
        consensus_choices=winners,
        total_expansion=best,
        witnesses={c: witness_vector(vp, c) for c in winners},
        immediate=False,
    )


def cost_tiers(vp: ValidatedProfile) -> list[tuple[int, tuple[str, ...]]]:
    """All choices grouped by widening cost, ascending; ids sorted in a tier."""
    require_complete(vp)
    costs: dict[int, list[str]] = {}
    for cid in vp.choice_ids:
        costs.setdefault(expansion_cost(vp, cid), []).append(cid)
    return [(cost, tuple(sorted(ids))) for cost, ids in sorted(costs.items())]


def _expansion_vectors(
    vp: ValidatedProfile, max_total: int
) -> Iterator[tuple[int, ...]]:
    """Widening vectors with sum <= max_total, by (total, lexicographic)."""
    bounds = []
    for p in vp.participants:
        assert p.ballot is not None
        bounds.append(vp.n - p.ballot.permit_count)
    vectors = [
        vec
        for vec in itertools.product(*(range(b + 1) for b in bounds))
        if sum(vec) <= max_total
    ]
    vectors.sort(key=lambda v: (sum(v), v))
    return iter(vectors)


def expansion_table(
    vp: ValidatedProfile, max_total: int, row_cap: int = 10_000
) -> list[ExpansionRow]:
    """Enumerate every widening vector with total <= max_total.

    Rows are ordered by (total, lexicographic vector).  Intended for display;
    raises TableTooLargeError when more than *row_cap* rows would result.
    """
    require_complete(vp)
    rows: list[ExpansionRow] = []
    for vec in _expansion_vectors(vp, max_total):
        if len(rows) >= row_cap:
            raise TableTooLargeError(
                f"expansion table exceeds {row_cap} rows; lower max_total"
            )
        sets = _prefixes(vp, vec)
        inter: set[str] = set(sets[0])
        for s in sets[1:]:
            inter &= set(s)
        rows.append(
            ExpansionRow(
                expansion=vec,
                total=sum(vec),
                permissible_sets=tuple(sets),
                intersection=frozenset(inter),
            )
        )
    return rows


def oracle_analyze(vp: ValidatedProfile, guard: int = 1_000_000) -> PmaResult:
    """Literal enumeration oracle: widen by increasing total until non-empty.

    Returns every choice appearing in any non-empty intersection at the
    minimal total.  Independent of analyze(); test use only.
    """
    require_complete(vp)
    bounds = []
    for p in vp.participants:
        assert p.ballot is not None
        bounds.append(vp.n - p.ballot.permit_count)
    space = 1
    for b in bounds:
        space *= b + 1
        if space > guard:
            raise OracleGuardError(f"search space exceeds {guard} vectors")

    by_total: dict[int, list[tuple[int, ...]]] = {}
    for vec in itertools.product(*(range(b + 1) for b in bounds)):
        by_total.setdefault(sum(vec), []).append(vec)

    for total in sorted(by_total):
        found: set[str] = set()
        for vec in by_total[total]:
            sets = _prefixes(vp, vec)
            inter = set(sets[0])
            for s in sets[1:]:
                inter &= set(s)
            found |= inter
        if found:
            return PmaResult(
                consensus_choices=tuple(sorted(found)),
                total_expansion=total,
                witnesses={c: witness_vector(vp, c) for c in sorted(found)},
                immediate=(total == 0),
            )
    raise ProfileError(["no widening admits any choice (unreachable for valid profiles)"])
