"""Append-only session events, durable JSONL storage, and replay.

Each session is one JSONL file of events with gap-free sequence numbers.
The materialized session state is always the fold of the log through the
process-engine operations, so replaying a log after a restart reproduces the
exact pre-shutdown state.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace as dc_replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from . import process
from .model import (
    Ballot,
    Choice,
    Participant,
    Profile,
    ProfileError,
    Weights,
    validate_profile,
)
from .process import PhaseError, PhaseKind, SessionState

KINDS = (
    "session_created",
    "choice_added",
    "participant_added",
    "ballot_submitted",
    "analysis_run",
    "outcome_recorded",
    "sublated_added",
    "restarted",
)


class LogError(ValueError):
    """A session log is missing, has gaps, or holds corrupt lines."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


@dataclass(frozen=True)
class Event:
    seq: int
    timestamp: str  # UTC ISO-8601
    kind: str
    payload: dict

    def to_json(self) -> str:
        return json.dumps(
            {
                "seq": self.seq,
                "timestamp": self.timestamp,
                "kind": self.kind,
                "payload": self.payload,
            },
            separators=(",", ":"),
            sort_keys=True,
        )


def make_event(seq: int, kind: str, payload: dict) -> Event:
    if kind not in KINDS:
        raise ValueError(f"unknown event kind {kind!r}")
    return Event(
        seq=seq,
        timestamp=datetime.now(timezone.utc).isoformat(),
        kind=kind,
        payload=payload,
    )


def parse_log(text: str) -> list[Event]:
    """Parse a JSONL session log, verifying gap-free sequence numbers."""
    events: list[Event] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise LogError(f"corrupt event ({exc.msg})", line=lineno) from exc
        try:
            event = Event(
                seq=int(doc["seq"]),
                timestamp=str(doc["timestamp"]),
                kind=str(doc["kind"]),
                payload=dict(doc["payload"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise LogError(f"malformed event: {exc}", line=lineno) from exc
        if event.kind not in KINDS:
            raise LogError(f"unknown event kind {event.kind!r}", line=lineno)
        if event.seq != len(events) + 1:
            raise LogError(
                f"sequence gap: expected {len(events) + 1}, found {event.seq}",
                line=lineno,
            )
        events.append(event)
    if not events or events[0].kind != "session_created":
        raise LogError("missing session_created event")
    return events


@dataclass(frozen=True)
class Fold:
    """Materialized view of a session log.

    Before the first analysis of a generation the engine state is a draft;
    choices, participants, and ballots accumulate here until the profile is
    complete and analysis starts.
    """

    session_id: str
    seq: int = 0
    choices: tuple[Choice, ...] = ()
    participants: tuple[tuple[str, str], ...] = ()  # (id, display name)
    ballots: dict = field(default_factory=dict)  # participant id -> Ballot
    state: SessionState | None = None
    idempotency_keys: frozenset[str] = frozenset()
    # Full-search size override; configuration, not part of the log.
    cce_limit: int | None = None

    def phase(self) -> process.Phase:
        if self.state is None:
            return process.DRAFT
        return self.state.phase

    def in_draft(self) -> bool:
        return self.state is None or self.state.phase.kind is PhaseKind.DRAFT

    def build_profile(self) -> Profile:
        """Assemble the draft profile from accumulated parts."""
        if self.state is not None:
            # Post-restart draft: the engine state already carries the pool.
            choices = self.state.profile.choices
            roster = [
                (p.id, p.display_name) for p in self.state.profile.participants
            ]
        else:
            choices = self.choices
            roster = list(self.participants)
        return Profile(
            choices=choices,
            participants=tuple(
                Participant(id=pid, display_name=name, ballot=self.ballots.get(pid))
                for pid, name in roster
            ),
        )

    def apply(self, event: Event) -> "Fold":
        """Apply one event, returning the next fold (self is unchanged)."""
        if event.seq != self.seq + 1:
            raise LogError(
                f"sequence gap: expected {self.seq + 1}, found {event.seq}"
            )
        nxt = self._dispatch(event)
        keys = self.idempotency_keys
        key = event.payload.get("idempotency_key")
        if key:
            keys = keys | {key}
        return dc_replace(nxt, seq=event.seq, idempotency_keys=keys)

    def _dispatch(self, event: Event) -> "Fold":
        p = event.payload
        kind = event.kind
        if kind == "session_created":
            if self.seq != 0:
                raise LogError("session_created must be the first event")
            return self
        if kind == "choice_added":
            if self.state is not None:
                raise PhaseError("choices can only be added before the first analysis")
            if any(c.id == p["choice_id"] for c in self.choices):
                raise ValueError(f"duplicate choice id {p['choice_id']!r}")
            return dc_replace(
                self,
                choices=self.choices
                + (Choice(id=p["choice_id"], label=p["label"]),),
            )
        if kind == "participant_added":
            if self.state is not None:
                raise PhaseError(
                    "participants can only be added before the first analysis"
                )
            if any(pid == p["participant_id"] for pid, _ in self.participants):
                raise ValueError(f"duplicate participant id {p['participant_id']!r}")
            return dc_replace(
                self,
                participants=self.participants
                + ((p["participant_id"], p["name"]),),
            )
        if kind == "ballot_submitted":
            if not self.in_draft():
                raise PhaseError(f"phase {self.phase()} does not accept ballots")
            pid = p["participant_id"]
            ballot = Ballot(
                ranking=tuple(p["ranking"]), permit_count=int(p["permit_count"])
            )
            if self.state is not None:
                state = process.submit_ballot(
                    self.state, pid, ballot.ranking, ballot.permit_count
                )
                return dc_replace(self, state=state)
            if pid not in {i for i, _ in self.participants}:
                raise KeyError(pid)
            ballots = dict(self.ballots)
            ballots[pid] = ballot
            candidate = dc_replace(self, ballots=ballots)
            # Surface invariant violations at submission time.
            validate_profile(candidate.build_profile())
            return candidate
        if kind == "analysis_run":
            if p["analysis"] == "pma":
                if not self.in_draft():
                    raise PhaseError(f"phase {self.phase()} cannot rerun the analysis")
                if self.state is None:
                    vp = validate_profile(self.build_profile())
                else:
                    # Post-restart drafts carry their ballots in the engine state.
                    vp = self.state.profile
                state = process.start(vp, prior=self.state)
                return dc_replace(self, state=state, ballots={})
            if p["analysis"] == "cce":
                state = self._require_state()
                weights = Weights(
                    w_mu=float(p.get("w_mu", 1.0)),
                    w_sigma=float(p.get("w_sigma", 1.0)),
                )
                return dc_replace(
                    self,
                    state=process.run_cce(
                        state, weights, max_choices=self.cce_limit
                    ),
                )
            raise ValueError(f"unknown analysis {p['analysis']!r}")
        if kind == "outcome_recorded":
            state = self._require_state()
            outcome = process.DiscussionOutcome(
                consensus=bool(p["consensus"]),
                choice=p.get("choice_id"),
                note=str(p.get("note", "")),
            )
            return dc_replace(self, state=process.record_outcome(state, outcome))
        if kind == "sublated_added":
            state = self._require_state()
            return dc_replace(
                self,
                state=process.add_sublated_choice(
                    state, p["label"], list(p["sources"])
                ),
            )
        if kind == "restarted":
            state = self._require_state()
            state = process.restart_with_sublated(state, list(p.get("retain", ())))
            return dc_replace(self, state=state, ballots={})
        raise LogError(f"unknown event kind {kind!r}")

    def _require_state(self) -> SessionState:
        if self.state is None:
            raise PhaseError("session is still in draft; run the analysis first")
        return self.state


def replay(
    session_id: str, events: Sequence[Event], cce_limit: int | None = None
) -> Fold:
    """Deterministic fold of a full event log."""
    fold = Fold(session_id=session_id, cce_limit=cce_limit)
    for event in events:
        fold = fold.apply(event)
    return fold


class SessionLog:
    """Durable JSONL log for one session."""

    def __init__(self, path: Path):
        self.path = path

    def append(self, event: Event) -> None:
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(event.to_json() + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def read(self) -> list[Event]:
        if not self.path.exists():
            raise LogError(f"no log at {self.path}")
        return parse_log(self.path.read_text(encoding="utf-8"))


def load_fold(session_id: str, path: Path, cce_limit: int | None = None) -> Fold:
    return replay(session_id, SessionLog(path).read(), cce_limit=cce_limit)
