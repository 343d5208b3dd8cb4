"""HTTP/JSON session service.

Thin FastAPI layer over the engine: every mutation validates against the
current fold, appends exactly one event to the session's JSONL log (flushed
before acknowledging), and returns the updated materialized view.  Mutations
within a session are serialized by a per-session lock; reads see the latest
materialized fold.
"""

from __future__ import annotations

import threading
import uuid
from pathlib import Path

from fastapi import FastAPI, Header, HTTPException, Query
from pydantic import BaseModel, Field

from . import cce, events, pma, process
from .cce import SearchLimitError
from .model import ProfileError, Weights
from .process import PhaseError, PhaseKind


# ---------------------------------------------------------------------------
# Request / response models

class CreateSessionResponse(BaseModel):
    session_id: str


class AddChoiceRequest(BaseModel):
    label: str = Field(min_length=1)


class AddChoiceResponse(BaseModel):
    choice_id: str


class AddParticipantRequest(BaseModel):
    name: str = Field(min_length=1)


class AddParticipantResponse(BaseModel):
    participant_id: str


class BallotRequest(BaseModel):
    ranking: list[str]
    permit_count: int


class CceRequest(BaseModel):
    w_mu: float = 1.0
    w_sigma: float = 1.0


class OutcomeRequest(BaseModel):
    consensus: bool
    choice_id: str | None = None
    note: str = ""


class SublatedRequest(BaseModel):
    label: str = Field(min_length=1)
    sources: list[str]


class RestartRequest(BaseModel):
    retain: list[str] = Field(default_factory=list)


class ChoiceView(BaseModel):
    id: str
    label: str
    origin: str  # "original" or "sublated"
    sources: list[str] = Field(default_factory=list)


class ParticipantView(BaseModel):
    id: str
    name: str
    ballot_submitted: bool


class PhaseView(BaseModel):
    kind: str
    round: int | None = None
    choice: str | None = None


class PmaView(BaseModel):
    consensus_choices: list[str]
    total_expansion: int
    witnesses: dict[str, list[int]]
    immediate: bool


class OrderScoreView(BaseModel):
    order: list[str]
    r: list[int]
    mu: float
    sigma: float
    score: float


class CceView(BaseModel):
    best: list[OrderScoreView]
    consensus_choices: list[str]
    w_mu: float
    w_sigma: float
    explored: int


class OutcomeView(BaseModel):
    phase: PhaseView
    consensus: bool
    choice_id: str | None
    note: str


class SessionView(BaseModel):
    session_id: str
    generation: int
    phase: PhaseView
    choices: list[ChoiceView]
    participants: list[ParticipantView]
    pma: PmaView | None = None
    cce: CceView | None = None
    outcomes: list[OutcomeView]
    sublated: list[ChoiceView]
    seq: int


class ExpansionRowView(BaseModel):
    expansion: list[int]
    total: int
    permissible_sets: list[list[str]]
    intersection: list[str]


class PmaTableView(BaseModel):
    rows: list[ExpansionRowView]


class SccView(BaseModel):
    round: int
    from_pma: list[str]
    from_cce: list[str]
    union: list[str]
    exhausted: bool


# ---------------------------------------------------------------------------
# View assembly

def _phase_view(phase: process.Phase) -> PhaseView:
    return PhaseView(kind=phase.kind.value, round=phase.round, choice=phase.choice)


def _choice_view(c) -> ChoiceView:
    return ChoiceView(
        id=c.id,
        label=c.label,
        origin="sublated" if c.sources else "original",
        sources=list(c.sources),
    )


def _pma_view(result: pma.PmaResult) -> PmaView:
    return PmaView(
        consensus_choices=list(result.consensus_choices),
        total_expansion=result.total_expansion,
        witnesses={c: list(v) for c, v in result.witnesses.items()},
        immediate=result.immediate,
    )


def _order_view(entry: cce.OrderScore) -> OrderScoreView:
    return OrderScoreView(
        order=list(entry.order),
        r=list(entry.r),
        mu=entry.mu,
        sigma=entry.sigma,
        score=entry.score,
    )


def _cce_view(result: cce.CceResult) -> CceView:
    return CceView(
        best=[_order_view(e) for e in result.best],
        consensus_choices=list(result.consensus_choices),
        w_mu=result.weights.w_mu,
        w_sigma=result.weights.w_sigma,
        explored=result.explored,
    )


def session_view(fold: events.Fold) -> SessionView:
    state = fold.state
    if state is None:
        choices = list(fold.choices)
        participants = [
            ParticipantView(id=pid, name=name, ballot_submitted=pid in fold.ballots)
            for pid, name in fold.participants
        ]
        generation = 1
        outcomes: list[OutcomeView] = []
        sublated: list = []
        pma_v = cce_v = None
    else:
        choices = list(state.current_choices)
        in_draft = state.phase.kind is PhaseKind.DRAFT
        participants = [
            ParticipantView(
                id=p.id,
                name=p.display_name,
                ballot_submitted=(
                    (p.id in fold.ballots or p.ballot is not None)
                    if in_draft
                    else True
                ),
            )
            for p in state.profile.participants
        ]
        generation = state.generation
        outcomes = [
            OutcomeView(
                phase=_phase_view(ph),
                consensus=o.consensus,
                choice_id=o.choice,
                note=o.note,
            )
            for ph, o in state.outcomes
        ]
        sublated = list(state.sublated)
        pma_v = _pma_view(state.pma) if state.pma else None
        cce_v = _cce_view(state.cce) if state.cce else None
    return SessionView(
        session_id=fold.session_id,
        generation=generation,
        phase=_phase_view(fold.phase()),
        choices=[_choice_view(c) for c in choices],
        participants=participants,
        pma=pma_v,
        cce=cce_v,
        outcomes=outcomes,
        sublated=[_choice_view(c) for c in sublated],
        seq=fold.seq,
    )


# ---------------------------------------------------------------------------
# Session manager

class SessionManager:
    """Loads, caches, and mutates session folds with a per-session lock."""

    def __init__(self, data_dir: Path, cce_limit: int | None = None):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.cce_limit = cce_limit
        self._folds: dict[str, events.Fold] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def _log(self, session_id: str) -> events.SessionLog:
        return events.SessionLog(self.data_dir / f"{session_id}.jsonl")

    def lock(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(session_id, threading.Lock())

    def create(self) -> events.Fold:
        session_id = uuid.uuid4().hex[:12]
        with self.lock(session_id):
            event = events.make_event(1, "session_created", {"session_id": session_id})
            fold = events.Fold(
                session_id=session_id, cce_limit=self.cce_limit
            ).apply(event)
            self._log(session_id).append(event)
            self._folds[session_id] = fold
        return fold

    def get(self, session_id: str) -> events.Fold:
        fold = self._folds.get(session_id)
        if fold is not None:
            return fold
        path = self.data_dir / f"{session_id}.jsonl"
        if not path.exists():
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        with self.lock(session_id):
            fold = self._folds.get(session_id)
            if fold is None:
                fold = events.load_fold(session_id, path, cce_limit=self.cce_limit)
                self._folds[session_id] = fold
        return fold

    def mutate(
        self, session_id: str, kind: str, payload: dict, idempotency_key: str | None
    ) -> events.Fold:
        return self.mutate_with(
            session_id, kind, lambda fold: payload, idempotency_key
        )[0]

    def mutate_with(
        self, session_id: str, kind: str, payload_fn, idempotency_key: str | None
    ) -> tuple[events.Fold, dict]:
        """Apply one event atomically: validate, persist, then publish.

        *payload_fn* builds the payload from the current fold under the
        session lock, so server-assigned ids cannot race.
        """
        with self.lock(session_id):
            fold = self.get(session_id)
            payload = payload_fn(fold)
            if idempotency_key:
                if idempotency_key in fold.idempotency_keys:
                    return fold, payload
                payload = dict(payload, idempotency_key=idempotency_key)
            event = events.make_event(fold.seq + 1, kind, payload)
            candidate = fold.apply(event)  # raises before anything is persisted
            self._log(session_id).append(event)
            self._folds[session_id] = candidate
            return candidate, payload


def _http_error(exc: Exception) -> HTTPException:
    if isinstance(exc, PhaseError):
        return HTTPException(status_code=409, detail=str(exc))
    if isinstance(exc, ProfileError):
        return HTTPException(status_code=422, detail=exc.violations)
    if isinstance(exc, KeyError):
        return HTTPException(status_code=404, detail=f"unknown id {exc.args[0]!r}")
    if isinstance(exc, (ValueError, SearchLimitError)):
        return HTTPException(status_code=400, detail=str(exc))
    raise exc


# ---------------------------------------------------------------------------
# App factory

def create_app(data_dir: str | Path, cce_limit: int | None = None) -> FastAPI:
    app = FastAPI(title="concord", version="0.1.0")
    manager = SessionManager(Path(data_dir), cce_limit=cce_limit)
    app.state.manager = manager

    def mutate(session_id: str, kind: str, payload: dict, key: str | None):
        try:
            return manager.mutate(session_id, kind, payload, key)
        except HTTPException:
            raise
        except Exception as exc:  # mapped to HTTP status below
            raise _http_error(exc) from exc

    def mutate_with(session_id: str, kind: str, payload_fn, key: str | None):
        try:
            return manager.mutate_with(session_id, kind, payload_fn, key)
        except HTTPException:
            raise
        except Exception as exc:
            raise _http_error(exc) from exc

    @app.post("/sessions", response_model=CreateSessionResponse, status_code=201)
    def create_session() -> CreateSessionResponse:
        fold = manager.create()
        return CreateSessionResponse(session_id=fold.session_id)

    @app.get("/sessions/{session_id}", response_model=SessionView)
    def get_session(session_id: str) -> SessionView:
        return session_view(manager.get(session_id))

    @app.post("/sessions/{session_id}/choices", response_model=AddChoiceResponse)
    def add_choice(
        session_id: str,
        body: AddChoiceRequest,
        idempotency_key: str | None = Header(default=None),
    ) -> AddChoiceResponse:
        _, payload = mutate_with(
            session_id,
            "choice_added",
            lambda fold: {
                "choice_id": f"c{len(fold.choices) + 1}",
                "label": body.label,
            },
            idempotency_key,
        )
        return AddChoiceResponse(choice_id=payload["choice_id"])

    @app.post(
        "/sessions/{session_id}/participants", response_model=AddParticipantResponse
    )
    def add_participant(
        session_id: str,
        body: AddParticipantRequest,
        idempotency_key: str | None = Header(default=None),
    ) -> AddParticipantResponse:
        _, payload = mutate_with(
            session_id,
            "participant_added",
            lambda fold: {
                "participant_id": f"p{len(fold.participants) + 1}",
                "name": body.name,
            },
            idempotency_key,
        )
        return AddParticipantResponse(participant_id=payload["participant_id"])

    @app.put(
        "/sessions/{session_id}/ballots/{participant_id}",
        response_model=SessionView,
    )
    def put_ballot(
        session_id: str,
        participant_id: str,
        body: BallotRequest,
        idempotency_key: str | None = Header(default=None),
    ) -> SessionView:
        fold = mutate(
            session_id,
            "ballot_submitted",
            {
                "participant_id": participant_id,
                "ranking": body.ranking,
                "permit_count": body.permit_count,
            },
            idempotency_key,
        )
        return session_view(fold)

    @app.post("/sessions/{session_id}/start", response_model=SessionView)
    def start_analysis(
        session_id: str,
        idempotency_key: str | None = Header(default=None),
    ) -> SessionView:
        fold = mutate(session_id, "analysis_run", {"analysis": "pma"}, idempotency_key)
        return session_view(fold)

    @app.post("/sessions/{session_id}/cce", response_model=SessionView)
    def run_cce(
        session_id: str,
        body: CceRequest,
        idempotency_key: str | None = Header(default=None),
    ) -> SessionView:
        fold = mutate(
            session_id,
            "analysis_run",
            {"analysis": "cce", "w_mu": body.w_mu, "w_sigma": body.w_sigma},
            idempotency_key,
        )
        return session_view(fold)

    @app.get("/sessions/{session_id}/pma", response_model=PmaView)
    def get_pma(session_id: str) -> PmaView:
        fold = manager.get(session_id)
        if fold.state is None or fold.state.pma is None:
            raise HTTPException(status_code=409, detail="analysis has not run")
        return _pma_view(fold.state.pma)

    @app.get("/sessions/{session_id}/pma/table", response_model=PmaTableView)
    def get_pma_table(
        session_id: str, max_total: int = Query(default=0, ge=0)
    ) -> PmaTableView:
        fold = manager.get(session_id)
        if fold.state is None or fold.state.pma is None:
            raise HTTPException(status_code=409, detail="analysis has not run")
        try:
            rows = pma.expansion_table(fold.state.profile, max_total)
        except pma.TableTooLargeError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return PmaTableView(
            rows=[
                ExpansionRowView(
                    expansion=list(r.expansion),
                    total=r.total,
                    permissible_sets=[list(s) for s in r.permissible_sets],
                    intersection=sorted(r.intersection),
                )
                for r in rows
            ]
        )

    @app.get("/sessions/{session_id}/cce", response_model=list[OrderScoreView])
    def get_cce_table(
        session_id: str, limit: int = Query(default=10, ge=1)
    ) -> list[OrderScoreView]:
        fold = manager.get(session_id)
        if fold.state is None or fold.state.cce is None:
            raise HTTPException(status_code=409, detail="the compromise search has not run")
        try:
            rows = cce.score_table(
                fold.state.profile,
                fold.state.cce.weights,
                limit=limit,
                max_choices=manager.cce_limit,
            )
        except SearchLimitError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return [_order_view(e) for e in rows]

    @app.get("/sessions/{session_id}/scc", response_model=SccView)
    def get_scc(session_id: str) -> SccView:
        fold = manager.get(session_id)
        if fold.state is None:
            raise HTTPException(status_code=409, detail="session is still in draft")
        try:
            cands = process.scc_candidates(fold.state)
        except PhaseError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return SccView(
            round=cands.round,
            from_pma=list(cands.from_pma),
            from_cce=list(cands.from_cce),
            union=list(cands.union),
            exhausted=cands.exhausted,
        )

    @app.post("/sessions/{session_id}/outcome", response_model=SessionView)
    def record_outcome(
        session_id: str,
        body: OutcomeRequest,
        idempotency_key: str | None = Header(default=None),
    ) -> SessionView:
        fold = mutate(
            session_id,
            "outcome_recorded",
            {
                "consensus": body.consensus,
                "choice_id": body.choice_id,
                "note": body.note,
            },
            idempotency_key,
        )
        return session_view(fold)

    @app.post("/sessions/{session_id}/sublated", response_model=SessionView)
    def add_sublated(
        session_id: str,
        body: SublatedRequest,
        idempotency_key: str | None = Header(default=None),
    ) -> SessionView:
        fold = mutate(
            session_id,
            "sublated_added",
            {"label": body.label, "sources": body.sources},
            idempotency_key,
        )
        return session_view(fold)

    @app.post("/sessions/{session_id}/restart", response_model=SessionView)
    def restart(
        session_id: str,
        body: RestartRequest,
        idempotency_key: str | None = Header(default=None),
    ) -> SessionView:
        fold = mutate(
            session_id, "restarted", {"retain": body.retain}, idempotency_key
        )
        return session_view(fold)

    return app
