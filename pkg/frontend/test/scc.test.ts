import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient, Scc } from "../src/api.js";
import { ViewModel } from "../src/state.js";
import { renderSccWorkspace } from "../src/ui/scc.js";
import { draftSession, fetchStub } from "./helpers.js";

const SCC: Scc = {
  round: 1,
  from_pma: ["c1"],
  from_cce: ["c4", "c6"],
  union: ["c1", "c4", "c6"],
  exhausted: false,
};

function workspace() {
  const { fn, calls } = fetchStub(() => ({ body: draftSession() }));
  const vm = new ViewModel(new ApiClient("http://api", fn), "s1", "facilitator");
  vm.session = draftSession({
    phase: { kind: "scc_round", round: 1, choice: null },
  });
  const container = document.createElement("div");
  const render = () => renderSccWorkspace(container, vm, SCC, render);
  render();
  return { vm, container, calls, render };
}

describe("synthesis workspace", () => {
  beforeEach(() => {
    document.body.innerHTML = "";
  });

  it("lists the candidate union with provenance badges", () => {
    const { container } = workspace();
    const items = [...container.querySelectorAll(".scc-candidate")];
    expect(items.map((li) => li.getAttribute("data-choice"))).toEqual([
      "c1",
      "c4",
      "c6",
    ]);
    expect(items[0]!.querySelector(".badge-pma")).not.toBeNull();
    expect(items[0]!.querySelector(".badge-cce")).toBeNull();
    expect(items[1]!.querySelector(".badge-cce")).not.toBeNull();
  });

  it("submit stays disabled with fewer than two sources", () => {
    const { vm, container, render } = workspace();
    vm.sublatedDraft.label = "Synthesis";
    render();
    let submit = container.querySelector(".scc-submit") as HTMLButtonElement;
    expect(submit.hasAttribute("disabled")).toBe(true);

    vm.toggleSource("c1");
    render();
    submit = container.querySelector(".scc-submit") as HTMLButtonElement;
    expect(submit.hasAttribute("disabled")).toBe(true);

    vm.toggleSource("c4");
    render();
    submit = container.querySelector(".scc-submit") as HTMLButtonElement;
    expect(submit.hasAttribute("disabled")).toBe(false);
  });

  it("submit requires a non-empty label", () => {
    const { vm, container, render } = workspace();
    vm.toggleSource("c1");
    vm.toggleSource("c4");
    vm.sublatedDraft.label = "   ";
    render();
    const submit = container.querySelector(".scc-submit") as HTMLButtonElement;
    expect(submit.hasAttribute("disabled")).toBe(true);
  });

  it("posts label and selected sources", async () => {
    const { vm, container, calls, render } = workspace();
    vm.toggleSource("c1");
    vm.toggleSource("c4");
    vm.sublatedDraft.label = "Promote both";
    render();
    (container.querySelector(".scc-submit") as HTMLButtonElement).click();
    await new Promise((resolve) => setTimeout(resolve, 0));
    const post = calls.find((c) => c.url.endsWith("/sublated"));
    expect(post).toBeDefined();
    expect(JSON.parse(post!.init!.body as string)).toEqual({
      label: "Promote both",
      sources: ["c1", "c4"],
    });
  });
});
