// @vitest-environment happy-dom
// @vitest-environment-options { "url": "http://127.0.0.1:8931" }

import { spawn, ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ViewModel } from "../src/state.js";
import { num } from "../src/ui/dom.js";
import { renderSccWorkspace } from "../src/ui/scc.js";
import { renderStepper } from "../src/ui/stepper.js";

// Scripted run of the divided seven-choice scenario against the real HTTP
// service: ballots -> widening card -> no consensus -> compromise table ->
// no consensus -> synthesis workspace -> compose -> conclude.  Every number
// on screen must equal the API payload byte for byte.

const PORT = 8931;
const BASE = `http://127.0.0.1:${PORT}`;

const SERVER_SCRIPT = `
import sys
import uvicorn
from concord.service import create_app

uvicorn.run(
    create_app(sys.argv[1]),
    host="127.0.0.1",
    port=int(sys.argv[2]),
    log_level="warning",
)
`;

let server: ChildProcess;

async function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function waitForServer(): Promise<void> {
  for (let attempt = 0; attempt < 100; attempt++) {
    try {
      const res = await fetch(`${BASE}/openapi.json`);
      if (res.ok) return;
    } catch {
      // not up yet
    }
    await sleep(200);
  }
  throw new Error("server did not come up");
}

interface FixtureProfile {
  choices: { id: string; label: string }[];
  participants: { name: string; ranking: string[]; permit_count: number }[];
}

function loadDividedFixture(): FixtureProfile {
  const path = join(__dirname, "..", "..", "fixtures", "divided.json");
  return JSON.parse(readFileSync(path, "utf-8"));
}

beforeAll(async () => {
  const dataDir = mkdtempSync(join(tmpdir(), "concord-e2e-"));
  server = spawn("python3", ["-c", SERVER_SCRIPT, dataDir, String(PORT)], {
    stdio: "ignore",
  });
  await waitForServer();
});

afterAll(() => {
  server?.kill();
});

describe("console end to end", () => {
  it("walks the divided scenario with server-exact numbers", async () => {
    const api = new ApiClient(BASE);
    const sessionId = await api.createSession();
    const vm = new ViewModel(api, sessionId, "facilitator");
    const stepperBox = document.createElement("div");
    const sccBox = document.createElement("div");
    const render = () => renderStepper(stepperBox, vm, render);

    // roster and ballots, mapping fixture ids to server-assigned ids
    const fixture = loadDividedFixture();
    const cid = new Map<string, string>();
    for (const choice of fixture.choices) {
      cid.set(choice.id, await api.addChoice(sessionId, choice.label));
    }
    for (const participant of fixture.participants) {
      const pid = await api.addParticipant(sessionId, participant.name);
      await api.putBallot(
        sessionId,
        pid,
        participant.ranking.map((c) => cid.get(c)!),
        participant.permit_count,
      );
    }

    // widening analysis card
    await api.start(sessionId);
    await vm.refresh();
    render();
    expect(vm.session!.phase.kind).toBe("pma_discussion");
    let raw = await (await fetch(`${BASE}/sessions/${sessionId}`)).text();
    const rawTotal = /"total_expansion":([^,}]+)/.exec(raw)![1]!;
    const card = stepperBox.querySelector(".pma-card")!;
    expect(card.querySelector(".pma-consensus")!.textContent).toContain(
      `total widening of ${rawTotal}`,
    );
    expect(rawTotal).toBe(num(vm.session!.pma!.total_expansion));
    const witness = card.querySelector(`[data-choice="${cid.get("1")}"]`)!;
    expect(witness.textContent).toContain("widens by 1");

    // the stepper's no-consensus button advances the phase
    (stepperBox.querySelector(".act-no-consensus") as HTMLButtonElement).click();
    for (let i = 0; i < 50 && vm.session!.phase.kind !== "cce_ready"; i++) {
      await sleep(100);
      await vm.refresh();
    }
    expect(vm.session!.phase.kind).toBe("cce_ready");
    render();

    // run the compromise search from the ready phase
    (stepperBox.querySelector(".act-cce") as HTMLButtonElement).click();
    for (let i = 0; i < 50 && vm.session!.phase.kind !== "cce_discussion"; i++) {
      await sleep(100);
      await vm.refresh();
    }
    expect(vm.session!.phase.kind).toBe("cce_discussion");
    render();

    // table head shows the server's bytes for r, mu, sigma, score
    raw = await (await fetch(`${BASE}/sessions/${sessionId}`)).text();
    const rawMu = /"mu":([^,}]+)/.exec(raw)![1]!;
    const rawSigma = /"sigma":([^,}]+)/.exec(raw)![1]!;
    const rawScore = /"score":([^,}]+)/.exec(raw)![1]!;
    const rawR = /"r":\[([^\]]+)\]/.exec(raw)![1]!;
    const headRow = stepperBox.querySelector(".cce-row")!;
    expect(headRow.querySelector(".cce-mu")!.textContent).toBe(rawMu);
    expect(headRow.querySelector(".cce-sigma")!.textContent).toBe(rawSigma);
    expect(headRow.querySelector(".cce-score")!.textContent).toBe(rawScore);
    const rCells = [...headRow.querySelectorAll(".r-cell")].map((c) => c.textContent);
    expect(rCells.join(",")).toBe(rawR);
    expect(Number(rawScore)).toBeCloseTo(9.548, 3);

    // no consensus again: synthesis round 1
    (stepperBox.querySelector(".act-no-consensus") as HTMLButtonElement).click();
    for (let i = 0; i < 50 && vm.session!.phase.kind !== "scc_round"; i++) {
      await sleep(100);
      await vm.refresh();
    }
    expect(vm.session!.phase.kind).toBe("scc_round");

    // workspace lists (1), (4), (6) with provenance badges
    const scc = await api.scc(sessionId);
    expect(scc.union).toEqual([cid.get("1"), cid.get("4"), cid.get("6")]);
    const renderScc = () => renderSccWorkspace(sccBox, vm, scc, renderScc);
    renderScc();
    const shown = [...sccBox.querySelectorAll(".scc-candidate")].map((li) =>
      li.getAttribute("data-choice"),
    );
    expect(shown).toEqual([cid.get("1"), cid.get("4"), cid.get("6")]);
    expect(sccBox.querySelector(`[data-choice="${cid.get("1")}"] .badge-pma`)).not.toBeNull();
    expect(sccBox.querySelector(`[data-choice="${cid.get("4")}"] .badge-cce`)).not.toBeNull();

    // compose a sublated choice from all three candidates
    vm.sublatedDraft.label =
      "Phase out dependence while funding alternative-energy research";
    vm.toggleSource(cid.get("1")!);
    vm.toggleSource(cid.get("4")!);
    vm.toggleSource(cid.get("6")!);
    renderScc();
    const submit = sccBox.querySelector(".scc-submit") as HTMLButtonElement;
    expect(submit.hasAttribute("disabled")).toBe(false);
    submit.click();
    for (let i = 0; i < 50 && vm.session!.phase.kind !== "scc_discussion"; i++) {
      await sleep(100);
      await vm.refresh();
    }
    expect(vm.session!.phase.kind).toBe("scc_discussion");
    expect(vm.session!.sublated.length).toBe(1);
    const sublatedId = vm.session!.sublated[0]!.id;

    // conclude on the synthesis
    render();
    const picker = stepperBox.querySelector(".conclude-choice") as HTMLSelectElement;
    picker.value = sublatedId;
    (stepperBox.querySelector(".act-conclude") as HTMLButtonElement).click();
    for (let i = 0; i < 50 && vm.session!.phase.kind !== "concluded"; i++) {
      await sleep(100);
      await vm.refresh();
    }
    expect(vm.session!.phase.kind).toBe("concluded");
    expect(vm.session!.phase.choice).toBe(sublatedId);
    render();
    expect(stepperBox.querySelector(".summary-choice")!.textContent).toContain(
      "alternative-energy",
    );
    expect(stepperBox.querySelectorAll(".actions button").length).toBe(0);
  });

  it("weight (1,0) reorders the table to the pure-mean ranking from the server", async () => {
    const api = new ApiClient(BASE);
    const sessionId = await api.createSession();
    const fixture = loadDividedFixture();
    const cid = new Map<string, string>();
    for (const choice of fixture.choices) {
      cid.set(choice.id, await api.addChoice(sessionId, choice.label));
    }
    for (const participant of fixture.participants) {
      const pid = await api.addParticipant(sessionId, participant.name);
      await api.putBallot(
        sessionId,
        pid,
        participant.ranking.map((c) => cid.get(c)!),
        participant.permit_count,
      );
    }
    await api.start(sessionId);
    await api.recordOutcome(sessionId, false);
    const session = await api.runCce(sessionId, 1, 0);
    // pure-mean scoring: the displayed score equals the displayed mu
    for (const entry of session.cce!.best) {
      expect(num(entry.score)).toBe(num(entry.mu));
    }
    expect(session.cce!.w_sigma).toBe(0);
  });
});
