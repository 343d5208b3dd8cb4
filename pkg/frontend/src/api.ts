import { z } from "zod";

// Typed client for the session service. Every response is parsed against a
// schema so a drifting server shows up as a loud error, not a blank widget.

export const PhaseView = z.object({
  kind: z.enum([
    "draft",
    "pma_discussion",
    "cce_ready",
    "cce_discussion",
    "scc_round",
    "scc_discussion",
    "concluded",
    "restarted",
  ]),
  round: z.number().int().nullable(),
  choice: z.string().nullable(),
});

export const ChoiceView = z.object({
  id: z.string(),
  label: z.string(),
  origin: z.enum(["original", "sublated"]),
  sources: z.array(z.string()),
});

export const ParticipantView = z.object({
  id: z.string(),
  name: z.string(),
  ballot_submitted: z.boolean(),
});

export const PmaView = z.object({
  consensus_choices: z.array(z.string()),
  total_expansion: z.number().int(),
  witnesses: z.record(z.array(z.number().int())),
  immediate: z.boolean(),
});

export const OrderScoreView = z.object({
  order: z.array(z.string()),
  r: z.array(z.number().int()),
  mu: z.number(),
  sigma: z.number(),
  score: z.number(),
});

export const CceView = z.object({
  best: z.array(OrderScoreView),
  consensus_choices: z.array(z.string()),
  w_mu: z.number(),
  w_sigma: z.number(),
  explored: z.number().int(),
});

export const OutcomeView = z.object({
  phase: PhaseView,
  consensus: z.boolean(),
  choice_id: z.string().nullable(),
  note: z.string(),
});

export const SessionView = z.object({
  session_id: z.string(),
  generation: z.number().int(),
  phase: PhaseView,
  choices: z.array(ChoiceView),
  participants: z.array(ParticipantView),
  pma: PmaView.nullable(),
  cce: CceView.nullable(),
  outcomes: z.array(OutcomeView),
  sublated: z.array(ChoiceView),
  seq: z.number().int(),
});

export const SccView = z.object({
  round: z.number().int(),
  from_pma: z.array(z.string()),
  from_cce: z.array(z.string()),
  union: z.array(z.string()),
  exhausted: z.boolean(),
});

export type Phase = z.infer<typeof PhaseView>;
export type Choice = z.infer<typeof ChoiceView>;
export type Participant = z.infer<typeof ParticipantView>;
export type Pma = z.infer<typeof PmaView>;
export type OrderScore = z.infer<typeof OrderScoreView>;
export type Cce = z.infer<typeof CceView>;
export type Session = z.infer<typeof SessionView>;
export type Scc = z.infer<typeof SccView>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: unknown,
  ) {
    super(`api error ${status}`);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchFn: typeof fetch = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const res = await this.fetchFn(`${this.baseUrl}${path}`, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    const body = res.status === 204 ? null : await res.json();
    if (!res.ok) {
      throw new ApiError(res.status, (body as { detail?: unknown })?.detail);
    }
    return body;
  }

  async createSession(): Promise<string> {
    const body = await this.request("/sessions", { method: "POST" });
    return z.object({ session_id: z.string() }).parse(body).session_id;
  }

  async getSession(id: string): Promise<Session> {
    return SessionView.parse(await this.request(`/sessions/${id}`));
  }

  async addChoice(id: string, label: string): Promise<string> {
    const body = await this.request(`/sessions/${id}/choices`, {
      method: "POST",
      body: JSON.stringify({ label }),
    });
    return z.object({ choice_id: z.string() }).parse(body).choice_id;
  }

  async addParticipant(id: string, name: string): Promise<string> {
    const body = await this.request(`/sessions/${id}/participants`, {
      method: "POST",
      body: JSON.stringify({ name }),
    });
    return z.object({ participant_id: z.string() }).parse(body).participant_id;
  }

  async putBallot(
    id: string,
    participantId: string,
    ranking: string[],
    permitCount: number,
  ): Promise<Session> {
    const body = await this.request(`/sessions/${id}/ballots/${participantId}`, {
      method: "PUT",
      body: JSON.stringify({ ranking, permit_count: permitCount }),
    });
    return SessionView.parse(body);
  }

  async start(id: string): Promise<Session> {
    return SessionView.parse(
      await this.request(`/sessions/${id}/start`, { method: "POST" }),
    );
  }

  async runCce(id: string, wMu: number, wSigma: number): Promise<Session> {
    const body = await this.request(`/sessions/${id}/cce`, {
      method: "POST",
      body: JSON.stringify({ w_mu: wMu, w_sigma: wSigma }),
    });
    return SessionView.parse(body);
  }

  async cceTable(id: string, limit: number): Promise<OrderScore[]> {
    const body = await this.request(`/sessions/${id}/cce?limit=${limit}`);
    return z.array(OrderScoreView).parse(body);
  }

  async scc(id: string): Promise<Scc> {
    return SccView.parse(await this.request(`/sessions/${id}/scc`));
  }

  async recordOutcome(
    id: string,
    consensus: boolean,
    choiceId: string | null = null,
    note = "",
  ): Promise<Session> {
    const body = await this.request(`/sessions/${id}/outcome`, {
      method: "POST",
      body: JSON.stringify({ consensus, choice_id: choiceId, note }),
    });
    return SessionView.parse(body);
  }

  async addSublated(id: string, label: string, sources: string[]): Promise<Session> {
    const body = await this.request(`/sessions/${id}/sublated`, {
      method: "POST",
      body: JSON.stringify({ label, sources }),
    });
    return SessionView.parse(body);
  }

  async restart(id: string, retain: string[]): Promise<Session> {
    const body = await this.request(`/sessions/${id}/restart`, {
      method: "POST",
      body: JSON.stringify({ retain }),
    });
    return SessionView.parse(body);
  }
}
