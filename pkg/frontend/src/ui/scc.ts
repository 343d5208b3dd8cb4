import { Scc } from "../api.js";
import { ViewModel } from "../state.js";
import { clear, el } from "./dom.js";

/**
 * Synthesis workspace: the candidate union with provenance badges, source
 * selection, and a free-text composition field.  Submitting needs a label
 * and at least two distinct sources; "widen candidates" is the stepper's
 * no-consensus action and lives there.
 */
export function renderSccWorkspace(
  container: HTMLElement,
  vm: ViewModel,
  scc: Scc,
  onChanged: () => void,
): void {
  clear(container);
  const session = vm.session;
  if (!session) return;
  const labels = new Map(session.choices.map((c) => [c.id, c.label]));
  const fromPma = new Set(scc.from_pma);
  const fromCce = new Set(scc.from_cce);

  const list = el("ul", { class: "scc-candidates" });
  for (const choiceId of scc.union) {
    const badges: HTMLElement[] = [];
    if (fromPma.has(choiceId)) {
      badges.push(el("span", { class: "badge badge-pma" }, ["widening"]));
    }
    if (fromCce.has(choiceId)) {
      badges.push(el("span", { class: "badge badge-cce" }, ["compromise"]));
    }
    const checkbox = el("input", {
      type: "checkbox",
      class: "scc-source",
      "data-choice": choiceId,
      ...(vm.sublatedDraft.sources.includes(choiceId) ? { checked: "" } : {}),
    });
    checkbox.addEventListener("change", () => {
      vm.toggleSource(choiceId);
      onChanged();
    });
    list.append(
      el("li", { class: "scc-candidate", "data-choice": choiceId }, [
        checkbox,
        el("span", { class: "scc-label" }, [labels.get(choiceId) ?? choiceId]),
        ...badges,
      ]),
    );
  }

  const labelInput = el("textarea", {
    class: "scc-composition",
    placeholder: "Describe the synthesized choice",
  });
  labelInput.value = vm.sublatedDraft.label;
  labelInput.addEventListener("input", () => {
    vm.sublatedDraft.label = labelInput.value;
    onChanged();
  });

  const submit = el("button", { class: "scc-submit", type: "button" }, [
    "Add synthesized choice",
  ]);
  if (!vm.canSubmitSublated()) submit.setAttribute("disabled", "");
  const errorBox = el("p", { class: "error", hidden: "" });
  submit.addEventListener("click", async () => {
    try {
      await vm.api.addSublated(
        vm.sessionId,
        vm.sublatedDraft.label.trim(),
        vm.sublatedDraft.sources,
      );
      vm.sublatedDraft = { label: "", sources: [] };
      await vm.refresh();
      onChanged();
    } catch (err) {
      errorBox.textContent = err instanceof Error ? err.message : String(err);
      errorBox.removeAttribute("hidden");
    }
  });

  container.append(
    el("h3", {}, [`Synthesis round ${scc.round}`]),
    scc.exhausted
      ? el("p", { class: "scc-exhausted" }, ["every choice is already a candidate"])
      : "",
    list,
    labelInput,
    submit,
    errorBox,
  );
}
