import { Session } from "../api.js";
import { Action, ViewModel } from "../state.js";
import { clear, el, num } from "./dom.js";

const PHASE_STEPS = [
  "draft",
  "pma_discussion",
  "cce_ready",
  "cce_discussion",
  "scc_round",
  "scc_discussion",
  "concluded",
] as const;

function phaseLabel(session: Session): string {
  const { kind, round, choice } = session.phase;
  if (kind === "scc_round" || kind === "scc_discussion") return `${kind} (round ${round})`;
  if (kind === "concluded") return `concluded (${choice})`;
  return kind;
}

function renderPmaCard(session: Session, labels: Map<string, string>): HTMLElement {
  const pma = session.pma!;
  const card = el("section", { class: "pma-card" }, [
    el("h3", {}, ["Widening analysis"]),
    el("p", { class: "pma-consensus" }, [
      pma.immediate
        ? "Already acceptable to everyone: "
        : `Acceptable after a total widening of ${num(pma.total_expansion)}: `,
      pma.consensus_choices.map((c) => labels.get(c) ?? c).join(", "),
    ]),
  ]);
  const who = el("ul", { class: "pma-witnesses" });
  for (const choiceId of pma.consensus_choices) {
    const vector = pma.witnesses[choiceId] ?? [];
    const stretchers = session.participants
      .map((p, i) => ({ name: p.name, by: vector[i] ?? 0 }))
      .filter((w) => w.by > 0);
    who.append(
      el("li", { "data-choice": choiceId }, [
        `${labels.get(choiceId) ?? choiceId}: `,
        stretchers.length
          ? stretchers.map((w) => `${w.name} widens by ${num(w.by)}`).join(", ")
          : "no one needs to widen",
      ]),
    );
  }
  card.append(who);
  return card;
}

function renderCceTable(session: Session, labels: Map<string, string>): HTMLElement {
  const cce = session.cce!;
  const header = el("tr", {}, [
    el("th", {}, ["order"]),
    ...session.participants.map((p) => el("th", {}, [`r(${p.name})`])),
    el("th", {}, ["mu"]),
    el("th", {}, ["sigma"]),
    el("th", {}, ["score"]),
  ]);
  const maxR = Math.max(1, ...cce.best.flatMap((e) => e.r));
  const body = cce.best.map((entry) =>
    el("tr", { class: "cce-row" }, [
      el("td", { class: "cce-order" }, [
        entry.order.map((c) => labels.get(c) ?? c).join(" > "),
      ]),
      ...entry.r.map((r) =>
        el("td", {
          class: "r-cell",
          // heatmap shading by replacement count, server values untouched
          style: `--heat:${r / maxR}`,
        }, [num(r)]),
      ),
      el("td", { class: "cce-mu" }, [num(entry.mu)]),
      el("td", { class: "cce-sigma" }, [num(entry.sigma)]),
      el("td", { class: "cce-score" }, [num(entry.score)]),
    ]),
  );
  return el("section", { class: "cce-card" }, [
    el("h3", {}, ["Compromise search"]),
    el("p", { class: "cce-weights" }, [
      `weights mu=${num(cce.w_mu)} sigma=${num(cce.w_sigma)}, `,
      `${num(cce.explored)} orders searched`,
    ]),
    el("table", { class: "cce-table" }, [header, ...body]),
  ]);
}

/**
 * Facilitator stepper: the current phase in a step diagram, the analysis
 * cards, and exactly the legal next actions.  Weight inputs re-run the
 * search when the engine allows it (before the discussion opens).
 */
export function renderStepper(
  container: HTMLElement,
  vm: ViewModel,
  onChanged: () => void,
): void {
  clear(container);
  const session = vm.session;
  if (!session) return;
  const labels = new Map(session.choices.map((c) => [c.id, c.label]));
  const actions = new Set<Action>(vm.actions());

  const steps = el("ol", { class: "steps" });
  for (const step of PHASE_STEPS) {
    steps.append(
      el("li", { class: step === session.phase.kind ? "step current" : "step" }, [step]),
    );
  }
  container.append(
    el("h2", { class: "phase" }, [phaseLabel(session)]),
    steps,
  );

  if (session.pma) container.append(renderPmaCard(session, labels));
  if (session.cce) container.append(renderCceTable(session, labels));

  const bar = el("div", { class: "actions" });
  const act = async (fn: () => Promise<unknown>) => {
    try {
      await fn();
      vm.lastError = null;
    } catch {
      // stale phase or validation failure: refetch, the server decides
      await vm.refresh().catch(() => undefined);
    }
    onChanged();
  };

  if (actions.has("start")) {
    const button = el("button", { class: "act-start", type: "button" }, [
      "Run widening analysis",
    ]);
    button.addEventListener("click", () => void act(() => vm.api.start(vm.sessionId)));
    bar.append(button);
  }
  if (actions.has("run_cce")) {
    const wMu = el("input", { class: "w-mu", type: "number", step: "0.1", value: "1" });
    const wSigma = el("input", { class: "w-sigma", type: "number", step: "0.1", value: "1" });
    const button = el("button", { class: "act-cce", type: "button" }, [
      "Search compromise orders",
    ]);
    button.addEventListener("click", () =>
      void act(() => vm.api.runCce(vm.sessionId, Number(wMu.value), Number(wSigma.value))),
    );
    bar.append(
      el("label", {}, ["w_mu ", wMu]),
      el("label", {}, ["w_sigma ", wSigma]),
      button,
    );
  }
  if (actions.has("conclude")) {
    const picker = el("select", { class: "conclude-choice" });
    for (const choice of session.choices) {
      picker.append(el("option", { value: choice.id }, [choice.label]));
    }
    const button = el("button", { class: "act-conclude", type: "button" }, [
      "Consensus on selected choice",
    ]);
    button.addEventListener("click", () =>
      void act(() => vm.api.recordOutcome(vm.sessionId, true, picker.value)),
    );
    bar.append(picker, button);
  }
  if (actions.has("no_consensus")) {
    const next =
      session.phase.kind === "pma_discussion"
        ? "No consensus, explore compromises"
        : session.phase.kind === "cce_discussion"
          ? "No consensus, synthesize choices"
          : "Widen candidates";
    const button = el("button", { class: "act-no-consensus", type: "button" }, [next]);
    button.addEventListener("click", () =>
      void act(() => vm.api.recordOutcome(vm.sessionId, false)),
    );
    bar.append(button);
  }
  container.append(bar);

  if (session.phase.kind === "concluded") {
    container.append(
      el("section", { class: "summary" }, [
        el("h3", {}, ["Concluded"]),
        el("p", { class: "summary-choice" }, [
          "Agreed choice: ",
          labels.get(session.phase.choice ?? "") ?? String(session.phase.choice),
        ]),
        el("p", { class: "summary-rounds" }, [
          `${session.outcomes.length} discussion rounds over `,
          `${session.generation} generation(s)`,
        ]),
      ]),
    );
  }
}
