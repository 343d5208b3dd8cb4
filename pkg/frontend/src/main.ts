import { ApiClient } from "./api.js";
import { Poller, ViewModel } from "./state.js";
import { renderBallotEditor } from "./ui/ballot.js";
import { clear, el } from "./ui/dom.js";
import { renderSccWorkspace } from "./ui/scc.js";
import { renderStepper } from "./ui/stepper.js";

/** Wire the console into a page: role picker, then the live session view. */
export function mount(root: HTMLElement, baseUrl: string): void {
  clear(root);
  const params = new URLSearchParams(window.location.search);
  const sessionId = params.get("session");
  const role = params.get("role") === "participant" ? "participant" : "facilitator";
  const participantId = params.get("participant");

  if (!sessionId) {
    const button = el("button", { class: "new-session", type: "button" }, [
      "Start a new session",
    ]);
    button.addEventListener("click", async () => {
      const id = await new ApiClient(baseUrl).createSession();
      window.location.search = `?session=${id}`;
    });
    root.append(el("h1", {}, ["concord"]), button);
    return;
  }

  const vm = new ViewModel(new ApiClient(baseUrl), sessionId, role, participantId);
  const stepperBox = el("div", { class: "stepper" });
  const ballotBox = el("div", { class: "ballot" });
  const sccBox = el("div", { class: "scc" });
  root.append(el("h1", {}, ["concord"]), stepperBox, ballotBox, sccBox);

  const rerender = () => {
    const session = vm.session;
    if (!session) return;
    renderStepper(stepperBox, vm, rerender);
    if (role === "participant" && session.phase.kind === "draft" && participantId) {
      renderBallotEditor(ballotBox, vm, rerender);
    } else {
      clear(ballotBox);
    }
    const kind = session.phase.kind;
    if (role === "facilitator" && (kind === "scc_round" || kind === "scc_discussion")) {
      void vm.api
        .scc(sessionId)
        .then((scc) => renderSccWorkspace(sccBox, vm, scc, rerender))
        .catch(() => clear(sccBox));
    } else {
      clear(sccBox);
    }
  };

  const poller = new Poller(vm, rerender);
  void vm.refresh().then(rerender);
  poller.start();
}
