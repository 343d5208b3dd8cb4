"""Facilitation state machine for the composite consensus-building process.

The flow: permissible-range analysis, discussion; failing consensus, the
compromise-order search, discussion; failing that, rounds of sublated-choice
creation over a widening candidate pool, each followed by discussion.  When
sublated choices are adopted as new options, the session restarts with a
fresh choice set and new ballots.

States are immutable; every operation returns a new SessionState.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Sequence

from . import cce, pma
from .model import (
    Ballot,
    Choice,
    Participant,
    Profile,
    ProfileError,
    ValidatedProfile,
    Weights,
    require_complete,
    validate_profile,
)


class PhaseKind(enum.Enum):
    DRAFT = "draft"
    PMA_DISCUSSION = "pma_discussion"
    CCE_READY = "cce_ready"
    CCE_DISCUSSION = "cce_discussion"
    SCC_ROUND = "scc_round"
    SCC_DISCUSSION = "scc_discussion"
    CONCLUDED = "concluded"
    RESTARTED = "restarted"


@dataclass(frozen=True)
class Phase:
    kind: PhaseKind
    round: int | None = None  # sublation round, 1-based
    choice: str | None = None  # concluding choice

    def __str__(self) -> str:
        if self.kind in (PhaseKind.SCC_ROUND, PhaseKind.SCC_DISCUSSION):
            return f"{self.kind.value}({self.round})"
        if self.kind is PhaseKind.CONCLUDED:
            return f"concluded({self.choice})"
        return self.kind.value


DRAFT = Phase(PhaseKind.DRAFT)

_DISCUSSION_KINDS = (
    PhaseKind.PMA_DISCUSSION,
    PhaseKind.CCE_DISCUSSION,
    PhaseKind.SCC_DISCUSSION,
)


class PhaseError(RuntimeError):
    """Operation attempted in a phase that does not allow it."""


@dataclass(frozen=True)
class DiscussionOutcome:
    consensus: bool
    choice: str | None = None  # required iff consensus
    note: str = ""


@dataclass(frozen=True)
class SccCandidates:
    round: int
    from_pma: tuple[str, ...]
    from_cce: tuple[str, ...]
    union: tuple[str, ...]
    exhausted: bool  # every analyzed choice is already a candidate


@dataclass(frozen=True)
class SessionState:
    generation: int
    profile: ValidatedProfile
    phase: Phase
    pma: pma.PmaResult | None = None
    cce: cce.CceResult | None = None
    outcomes: tuple[tuple[Phase, DiscussionOutcome], ...] = ()
    sublated: tuple[Choice, ...] = ()

    @property
    def current_choices(self) -> tuple[Choice, ...]:
        """Choice pool the group can currently conclude on."""
        return self.profile.choices + self.sublated

    def current_choice_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.current_choices)


def draft(profile: ValidatedProfile, generation: int = 1) -> SessionState:
    """A session awaiting ballots (initially or after a restart)."""
    return SessionState(generation=generation, profile=profile, phase=DRAFT)


def start(
    profile: ValidatedProfile, prior: SessionState | None = None
) -> SessionState:
    """Run the permissible-range analysis and enter its discussion phase.

    With *prior* given (a post-restart draft), the session's generation and
    history carry over; *profile* supplies the fresh ballots.
    """
    require_complete(profile)
    result = pma.analyze(profile)
    if prior is None:
        return SessionState(
            generation=1,
            profile=profile,
            phase=Phase(PhaseKind.PMA_DISCUSSION),
            pma=result,
        )
    if prior.phase.kind is not PhaseKind.DRAFT:
        raise PhaseError(f"cannot start from phase {prior.phase}")
    return replace(
        prior,
        profile=profile,
        phase=Phase(PhaseKind.PMA_DISCUSSION),
        pma=result,
        cce=None,
    )


def record_outcome(state: SessionState, outcome: DiscussionOutcome) -> SessionState:
    """Record a discussion outcome and advance along the process graph."""
    kind = state.phase.kind
    if kind not in _DISCUSSION_KINDS:
        raise PhaseError(f"phase {state.phase} is not a discussion phase")
    if outcome.consensus:
        if outcome.choice is None:
            raise ValueError("a consensus outcome must name a choice")
        if outcome.choice not in state.current_choice_ids():
            raise ValueError(f"unknown choice {outcome.choice!r}")
        next_phase = Phase(PhaseKind.CONCLUDED, choice=outcome.choice)
    elif kind is PhaseKind.PMA_DISCUSSION:
        next_phase = Phase(PhaseKind.CCE_READY)
    elif kind is PhaseKind.CCE_DISCUSSION:
        next_phase = Phase(PhaseKind.SCC_ROUND, round=1)
    else:
        assert state.phase.round is not None
        next_phase = Phase(PhaseKind.SCC_ROUND, round=state.phase.round + 1)
    return replace(
        state,
        phase=next_phase,
        outcomes=state.outcomes + ((state.phase, outcome),),
    )


def run_cce(
    state: SessionState,
    weights: Weights = Weights(),
    max_choices: int | None = None,
) -> SessionState:
    """Run the compromise-order search and enter its discussion phase."""
    if state.phase.kind is not PhaseKind.CCE_READY:
        raise PhaseError(f"phase {state.phase} does not allow the compromise search")
    result = cce.search_full(state.profile, weights, max_choices=max_choices)
    return replace(state, cce=result, phase=Phase(PhaseKind.CCE_DISCUSSION))


def scc_candidates(state: SessionState) -> SccCandidates:
    """Candidate choices to synthesize from, widening with each round.

    Round r takes the choices in the r cheapest widening-cost tiers, plus
    the first r+1 distinct choices ranked by the best score of any common
    order they lead (the head of the optimal order first, then the next
    distinct head by score, matching the facilitator's "first place and
    second place" reading).
    """
    if state.phase.kind not in (PhaseKind.SCC_ROUND, PhaseKind.SCC_DISCUSSION):
        raise PhaseError(f"phase {state.phase} has no sublation candidates")
    assert state.phase.round is not None and state.cce is not None
    r = state.phase.round
    tiers = pma.cost_tiers(state.profile)
    from_pma: list[str] = []
    for _, ids in tiers[:r]:
        from_pma.extend(ids)
    from_cce = cce.ranked_heads(state.cce)[: r + 1]
    union = list(from_pma)
    for cid in from_cce:
        if cid not in union:
            union.append(cid)
    return SccCandidates(
        round=r,
        from_pma=tuple(from_pma),
        from_cce=tuple(from_cce),
        union=tuple(union),
        exhausted=set(union) == set(state.profile.choice_ids),
    )


def add_sublated_choice(
    state: SessionState, label: str, sources: Sequence[str]
) -> SessionState:
    """Append a facilitator-authored synthesis of >= 2 candidate choices."""
    if state.phase.kind not in (PhaseKind.SCC_ROUND, PhaseKind.SCC_DISCUSSION):
        raise PhaseError(f"phase {state.phase} does not allow sublated choices")
    candidates = scc_candidates(state).union
    src = list(dict.fromkeys(sources))
    if len(src) < 2:
        raise ValueError("a sublated choice needs at least 2 distinct sources")
    outside = [s for s in src if s not in candidates]
    if outside:
        raise ValueError(f"sources {outside} are not current candidates")
    labels = {c.label for c in state.current_choices}
    if label in labels:
        raise ValueError(f"duplicate choice label {label!r}")
    new_id = f"s{state.generation}-{len(state.sublated) + 1}"
    choice = Choice(id=new_id, label=label, sources=tuple(src))
    assert state.phase.round is not None
    return replace(
        state,
        sublated=state.sublated + (choice,),
        phase=Phase(PhaseKind.SCC_DISCUSSION, round=state.phase.round),
    )


def restart_with_sublated(
    state: SessionState, retain: Sequence[str] = ()
) -> SessionState:
    """Open a new generation over the sublated choices plus retained ones.

    Ballots are not carried over; participants re-rank the new choice set.
    """
    if state.phase.kind is not PhaseKind.SCC_DISCUSSION:
        raise PhaseError(f"phase {state.phase} does not allow a restart")
    if not state.sublated:
        raise PhaseError("no sublated choices to restart with")
    pool: list[Choice] = []
    by_id = {c.id: c for c in state.current_choices}
    unknown = [cid for cid in retain if cid not in by_id]
    if unknown:
        raise ValueError(f"cannot retain unknown choices {unknown}")
    for cid in retain:
        if by_id[cid] not in pool:
            pool.append(by_id[cid])
    for c in state.sublated:
        if c not in pool:
            pool.append(c)
    if len(pool) < 2:
        raise ValueError("a restarted session needs at least 2 choices")
    profile = validate_profile(
        Profile(
            choices=tuple(pool),
            participants=tuple(
                Participant(id=p.id, display_name=p.display_name, ballot=None)
                for p in state.profile.participants
            ),
        )
    )
    return replace(
        state,
        generation=state.generation + 1,
        profile=profile,
        phase=DRAFT,
        pma=None,
        cce=None,
        sublated=(),
    )


def submit_ballot(
    state: SessionState, participant_id: str, ranking: Sequence[str], permit_count: int
) -> SessionState:
    """Attach a ballot to a draft-phase session, revalidating the profile."""
    if state.phase.kind is not PhaseKind.DRAFT:
        raise PhaseError(f"phase {state.phase} does not accept ballots")
    ids = [p.id for p in state.profile.participants]
    if participant_id not in ids:
        raise KeyError(participant_id)
    participants = tuple(
        replace(p, ballot=Ballot(ranking=tuple(ranking), permit_count=permit_count))
        if p.id == participant_id
        else p
        for p in state.profile.participants
    )
    profile = validate_profile(
        Profile(choices=state.profile.choices, participants=participants)
    )
    return replace(state, profile=profile)
