import { Session } from "../src/api.js";

export function draftSession(overrides: Partial<Session> = {}): Session {
  const choiceIds = ["c1", "c2", "c3", "c4", "c5", "c6", "c7"];
  return {
    session_id: "s1",
    generation: 1,
    phase: { kind: "draft", round: null, choice: null },
    choices: choiceIds.map((id) => ({
      id,
      label: `Option ${id}`,
      origin: "original",
      sources: [],
    })),
    participants: [
      { id: "p1", name: "Pat", ballot_submitted: false },
      { id: "p2", name: "Sam", ballot_submitted: false },
    ],
    pma: null,
    cce: null,
    outcomes: [],
    sublated: [],
    seq: 10,
    ...overrides,
  };
}

/** A fetch stub that records requests and replays canned JSON responses. */
export function fetchStub(
  respond: (url: string, init?: RequestInit) => { status?: number; body: unknown },
) {
  const calls: { url: string; init?: RequestInit }[] = [];
  const fn = async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    calls.push({ url, init });
    const { status = 200, body } = respond(url, init);
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { fn: fn as typeof fetch, calls };
}
