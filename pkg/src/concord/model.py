"""Core domain types, profile validation, and ranking-distance primitives.

A profile bundles the choice set with every participant's strict ranking and
the count of top choices they currently permit.  The ranking-distance
primitives (rule substitution, inversion counting, Kendall distance) are the
shared basis for both the permissible-range analysis and the compromise-order
search.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence


class ProfileError(ValueError):
    """A profile violates one or more structural invariants.

    Carries every violation found, not just the first.
    """

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class Choice:
    id: str
    label: str
    # Empty tuple means an original choice; a non-empty tuple lists the ids
    # of the choices this one was synthesized from.
    sources: tuple[str, ...] = ()

    @property
    def is_sublated(self) -> bool:
        return bool(self.sources)


@dataclass(frozen=True)
class Ballot:
    ranking: tuple[str, ...]  # most-preferred first, full strict order
    permit_count: int  # number of top-ranked choices the participant accepts


@dataclass(frozen=True)
class Participant:
    id: str
    display_name: str
    ballot: Ballot | None = None


@dataclass(frozen=True)
class Profile:
    choices: tuple[Choice, ...]
    participants: tuple[Participant, ...]

    @property
    def choice_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.choices)


@dataclass(frozen=True)
class Weights:
    """Score weights: score = w_mu * mean + w_sigma * stddev."""

    w_mu: float = 1.0
    w_sigma: float = 1.0

    def __post_init__(self) -> None:
        if self.w_mu < 0 or self.w_sigma < 0:
            raise ValueError("weights must be non-negative")
        if self.w_mu + self.w_sigma == 0:
            raise ValueError("at least one weight must be positive")


@dataclass(frozen=True)
class ValidatedProfile:
    """A profile that passed validation, with rank lookup tables attached.

    ``rank[pid][cid]`` is 1-based: the position of choice ``cid`` in
    participant ``pid``'s ranking.
    """

    profile: Profile
    n: int
    m: int
    rank: Mapping[str, Mapping[str, int]] = field(repr=False)

    @property
    def choices(self) -> tuple[Choice, ...]:
        return self.profile.choices

    @property
    def choice_ids(self) -> tuple[str, ...]:
        return self.profile.choice_ids

    @property
    def participants(self) -> tuple[Participant, ...]:
        return self.profile.participants

    def ballot_of(self, participant_id: str) -> Ballot:
        for p in self.profile.participants:
            if p.id == participant_id:
                assert p.ballot is not None
                return p.ballot
        raise KeyError(participant_id)


def profile_violations(profile: Profile) -> list[str]:
    """Collect every invariant violation in *profile* (empty list if valid).

    A valid profile needs at least one choice and one participant, unique
    ids throughout, every ballot a full permutation of the choice set, and
    every permit count in [1, n].
    """
    violations: list[str] = []
    choice_ids = [c.id for c in profile.choices]
    id_set = set(choice_ids)
    n = len(choice_ids)

    if n == 0:
        violations.append("profile has no choices")
    for cid in choice_ids:
        if not cid:
            violations.append("empty choice id")
    seen: set[str] = set()
    for cid in choice_ids:
        if cid in seen:
            violations.append(f"duplicate choice id {cid!r}")
        seen.add(cid)
    for c in profile.choices:
        # Source ids are provenance and may point at a previous generation's
        # pool; membership is enforced when the synthesis is created.
        if c.sources and len(set(c.sources)) < 2:
            violations.append(
                f"sublated choice {c.id!r} needs >= 2 distinct sources"
            )

    if not profile.participants:
        violations.append("profile has no participants")
    seen = set()
    for p in profile.participants:
        if p.id in seen:
            violations.append(f"duplicate participant id {p.id!r}")
        seen.add(p.id)

    for p in profile.participants:
        if p.ballot is None:
            continue
        b = p.ballot
        if sorted(b.ranking) != sorted(choice_ids):
            violations.append(
                f"participant {p.id!r}: ranking is not a permutation of the "
                "choice set"
            )
        if not 1 <= b.permit_count <= max(n, 1):
            violations.append(
                f"participant {p.id!r}: permit_count {b.permit_count} "
                f"outside [1, {n}]"
            )
    return violations


def validate_profile(profile: Profile) -> ValidatedProfile:
    """Validate *profile* and attach rank lookup tables.

    Raises ProfileError listing every violation if the profile is invalid.
    Participants without a submitted ballot are allowed here; operations
    that need complete ballots check via require_complete().
    """
    violations = profile_violations(profile)
    if violations:
        raise ProfileError(violations)
    rank: dict[str, dict[str, int]] = {}
    for p in profile.participants:
        if p.ballot is not None:
            rank[p.id] = {cid: j for j, cid in enumerate(p.ballot.ranking, start=1)}
    return ValidatedProfile(
        profile=profile,
        n=len(profile.choices),
        m=len(profile.participants),
        rank=rank,
    )


def require_complete(vp: ValidatedProfile) -> None:
    """Raise ProfileError unless every participant has submitted a ballot."""
    missing = [p.id for p in vp.participants if p.ballot is None]
    if missing:
        raise ProfileError([f"participant {pid!r} has not submitted a ballot" for pid in missing])


def apply_rule(
    ballot_ranking: Sequence[str], order: Sequence[str]
) -> tuple[int, ...]:
    """Renumber *order* through the substitution rule built from *ballot_ranking*.

    The rule maps the ballot's first choice to 1, its second to 2, and so on;
    applying it to the ballot itself yields (1, ..., n).
    """
    if sorted(ballot_ranking) != sorted(order) or len(set(ballot_ranking)) != len(
        ballot_ranking
    ):
        raise ValueError("ballot_ranking and order must be permutations of the same choice set")
    rule = {cid: j for j, cid in enumerate(ballot_ranking, start=1)}
    return tuple(rule[cid] for cid in order)


def inversion_count(sequence: Sequence[int]) -> int:
    """Number of inverted pairs (i < j with s_i > s_j) in a permutation of 1..n.

    Equals the minimal number of adjacent transpositions needed to sort the
    sequence ascending.  O(n log n) merge counting.
    """
    n = len(sequence)
    if sorted(sequence) != list(range(1, n + 1)):
        raise ValueError("sequence must be a permutation of 1..n")
    return _merge_count(list(sequence))


def _merge_count(items: list[int]) -> int:
    if len(items) <= 1:
        return 0
    mid = len(items) // 2
    left, right = items[:mid], items[mid:]
    count = _merge_count(left) + _merge_count(right)
    i = j = k = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            items[k] = left[i]
            i += 1
        else:
            items[k] = right[j]
            j += 1
            count += len(left) - i
        k += 1
    items[k:] = left[i:] or right[j:]
    return count


def kendall_distance(
    ballot_ranking: Sequence[str], order: Sequence[str]
) -> int:
    """Minimal adjacent-swap count between two strict rankings (symmetric)."""
    return inversion_count(apply_rule(ballot_ranking, order))


# ---------------------------------------------------------------------------
# Profile file format (JSON)

_CHOICE_KEYS = {"id", "label", "origin"}
_PARTICIPANT_KEYS = {"id", "name", "ranking", "permit_count"}


def profile_from_dict(doc: object) -> Profile:
    """Parse the JSON profile document shape into a Profile.

    Unknown fields are rejected.  Raises ProfileError on schema problems;
    the result is parsed but not yet validated.
    """
    problems: list[str] = []
    if not isinstance(doc, dict):
        raise ProfileError(["profile document must be a JSON object"])
    unknown = set(doc) - {"choices", "participants"}
    if unknown:
        problems.append(f"unknown top-level fields {sorted(unknown)}")
    choices: list[Choice] = []
    for idx, entry in enumerate(doc.get("choices", [])):
        if not isinstance(entry, dict):
            problems.append(f"choices[{idx}] is not an object")
            continue
        unknown = set(entry) - _CHOICE_KEYS
        if unknown:
            problems.append(f"choices[{idx}]: unknown fields {sorted(unknown)}")
        cid = entry.get("id")
        label = entry.get("label", "")
        if not isinstance(cid, str):
            problems.append(f"choices[{idx}]: missing string 'id'")
            continue
        origin = entry.get("origin", "original")
        sources: tuple[str, ...] = ()
        if origin == "original":
            pass
        elif isinstance(origin, dict) and set(origin) == {"sublated"}:
            sources = tuple(origin["sublated"])
        else:
            problems.append(f"choices[{idx}]: bad origin {origin!r}")
        choices.append(Choice(id=cid, label=str(label), sources=sources))
    participants: list[Participant] = []
    for idx, entry in enumerate(doc.get("participants", [])):
        if not isinstance(entry, dict):
            problems.append(f"participants[{idx}] is not an object")
            continue
        unknown = set(entry) - _PARTICIPANT_KEYS
        if unknown:
            problems.append(f"participants[{idx}]: unknown fields {sorted(unknown)}")
        pid = entry.get("id")
        if not isinstance(pid, str):
            problems.append(f"participants[{idx}]: missing string 'id'")
            continue
        ranking = entry.get("ranking")
        permit = entry.get("permit_count")
        if not isinstance(ranking, list) or not all(
            isinstance(x, str) for x in ranking
        ):
            problems.append(f"participants[{idx}]: 'ranking' must be a list of ids")
            continue
        if not isinstance(permit, int) or isinstance(permit, bool):
            problems.append(f"participants[{idx}]: 'permit_count' must be an integer")
            continue
        participants.append(
            Participant(
                id=pid,
                display_name=str(entry.get("name", pid)),
                ballot=Ballot(ranking=tuple(ranking), permit_count=permit),
            )
        )
    if problems:
        raise ProfileError(problems)
    return Profile(choices=tuple(choices), participants=tuple(participants))


def profile_to_dict(profile: Profile) -> dict:
    """Inverse of profile_from_dict for participants with submitted ballots."""
    doc: dict = {"choices": [], "participants": []}
    for c in profile.choices:
        entry: dict = {"id": c.id, "label": c.label}
        entry["origin"] = {"sublated": list(c.sources)} if c.sources else "original"
        doc["choices"].append(entry)
    for p in profile.participants:
        if p.ballot is None:
            continue
        doc["participants"].append(
            {
                "id": p.id,
                "name": p.display_name,
                "ranking": list(p.ballot.ranking),
                "permit_count": p.ballot.permit_count,
            }
        )
    return doc


def load_profile(path: str | Path) -> ValidatedProfile:
    """Load, parse, and validate a profile JSON file."""
    raw = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ProfileError([f"invalid JSON: {exc}"]) from exc
    vp = validate_profile(profile_from_dict(doc))
    require_complete(vp)
    return vp
