import { ApiClient, Session } from "./api.js";

export type Role = "facilitator" | "participant";

export type Action =
  | "add_choice"
  | "add_participant"
  | "submit_ballot"
  | "start"
  | "conclude"
  | "no_consensus"
  | "run_cce"
  | "add_sublated"
  | "restart";

/** Pending ballot edits: a full ordering plus the permissibility divider. */
export interface BallotDraft {
  ranking: string[];
  divider: number; // permit_count; the line sits after this many rows
}

export interface SublatedDraft {
  label: string;
  sources: string[];
}

/**
 * Actions the engine accepts in each phase.  The facilitator UI must enable
 * exactly these; the server remains the arbiter and a 409 means the phase
 * moved underneath us.
 */
export function legalActions(session: Session, role: Role): Action[] {
  const kind = session.phase.kind;
  if (kind === "draft") {
    if (role === "participant") return ["submit_ballot"];
    // The choice/participant roster is only editable in the first draft;
    // a post-restart draft carries its pool from the previous generation.
    const firstDraft = session.generation === 1 && session.outcomes.length === 0;
    return firstDraft ? ["add_choice", "add_participant", "start"] : ["start"];
  }
  if (role === "participant") return [];
  switch (kind) {
    case "pma_discussion":
      return ["conclude", "no_consensus"];
    case "cce_ready":
      return ["run_cce"];
    case "cce_discussion":
      return ["conclude", "no_consensus"];
    case "scc_round":
      return ["add_sublated"];
    case "scc_discussion":
      return ["add_sublated", "conclude", "no_consensus", "restart"];
    default:
      return [];
  }
}

/** Client-side mirror of the server's ballot rule; the server re-checks. */
export function ballotProblems(draft: BallotDraft, choiceIds: string[]): string[] {
  const problems: string[] = [];
  const seen = new Set(draft.ranking);
  for (const id of choiceIds) {
    if (!seen.has(id)) problems.push(`choice ${id} is unranked`);
  }
  if (draft.ranking.length !== choiceIds.length || seen.size !== draft.ranking.length) {
    problems.push("ranking must list every choice exactly once");
  }
  if (draft.divider < 1 || draft.divider > draft.ranking.length) {
    problems.push("the permissibility divider must sit between rank 1 and n");
  }
  return problems;
}

export class ViewModel {
  session: Session | null = null;
  ballotDraft: BallotDraft | null = null;
  sublatedDraft: SublatedDraft = { label: "", sources: [] };
  lastError: string | null = null;

  constructor(
    public api: ApiClient,
    public sessionId: string,
    public role: Role,
    public participantId: string | null = null,
  ) {}

  actions(): Action[] {
    return this.session ? legalActions(this.session, this.role) : [];
  }

  async refresh(): Promise<Session> {
    const session = await this.api.getSession(this.sessionId);
    // A phase change invalidates stale composition state but never a ballot
    // the participant is still editing.
    if (this.session && this.session.phase.kind !== session.phase.kind) {
      this.sublatedDraft = { label: "", sources: [] };
    }
    this.session = session;
    return session;
  }

  editBallot(): BallotDraft {
    if (!this.session) throw new Error("no session loaded");
    if (!this.ballotDraft) {
      const ids = this.session.choices.map((c) => c.id);
      this.ballotDraft = { ranking: ids, divider: Math.max(1, ids.length - 1) };
    }
    return this.ballotDraft;
  }

  moveChoice(from: number, to: number): void {
    const draft = this.editBallot();
    if (to < 0 || to >= draft.ranking.length) return;
    const [moved] = draft.ranking.splice(from, 1);
    draft.ranking.splice(to, 0, moved!);
  }

  async submitBallot(): Promise<void> {
    if (!this.session || !this.ballotDraft || !this.participantId) {
      throw new Error("nothing to submit");
    }
    const problems = ballotProblems(
      this.ballotDraft,
      this.session.choices.map((c) => c.id),
    );
    if (problems.length) throw new Error(problems.join("; "));
    this.session = await this.api.putBallot(
      this.sessionId,
      this.participantId,
      this.ballotDraft.ranking,
      this.ballotDraft.divider,
    );
    this.ballotDraft = null;
  }

  toggleSource(choiceId: string): void {
    const sources = this.sublatedDraft.sources;
    const at = sources.indexOf(choiceId);
    if (at >= 0) sources.splice(at, 1);
    else sources.push(choiceId);
  }

  canSubmitSublated(): boolean {
    return (
      this.sublatedDraft.label.trim().length > 0 &&
      new Set(this.sublatedDraft.sources).size >= 2
    );
  }
}

/** Refetch the session on a fixed cadence; small groups, stateless reads. */
export class Poller {
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private vm: ViewModel,
    private onUpdate: (session: Session) => void,
    private intervalMs = 2000,
  ) {}

  start(): void {
    this.stop();
    this.timer = setInterval(() => void this.tick(), this.intervalMs);
  }

  async tick(): Promise<void> {
    const before = this.vm.session?.seq;
    try {
      const session = await this.vm.refresh();
      if (session.seq !== before) this.onUpdate(session);
    } catch {
      // transient fetch failure; next tick retries and edits survive
    }
  }

  stop(): void {
    if (this.timer !== null) clearInterval(this.timer);
    this.timer = null;
  }
}
