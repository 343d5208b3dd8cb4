import { ViewModel } from "../state.js";
import { clear, el } from "./dom.js";

/**
 * Ballot editor: a drag-to-rank list of all choices with a permissibility
 * divider after rank k.  Submits {ranking, permit_count: k}; server-side
 * validation errors render inline without losing local edits.
 */
export function renderBallotEditor(
  container: HTMLElement,
  vm: ViewModel,
  onSubmitted: () => void,
): void {
  clear(container);
  if (!vm.session) return;
  const draft = vm.editBallot();
  const labels = new Map(vm.session.choices.map((c) => [c.id, c.label]));

  const list = el("ol", { class: "ballot-list" });
  draft.ranking.forEach((choiceId, index) => {
    const row = el("li", { class: "ballot-row", draggable: "true", "data-choice": choiceId }, [
      el("span", { class: "ballot-label" }, [labels.get(choiceId) ?? choiceId]),
      el("button", { class: "move-up", type: "button", title: "move up" }, ["↑"]),
      el("button", { class: "move-down", type: "button", title: "move down" }, ["↓"]),
    ]);
    row.querySelector(".move-up")!.addEventListener("click", () => {
      vm.moveChoice(index, index - 1);
      renderBallotEditor(container, vm, onSubmitted);
    });
    row.querySelector(".move-down")!.addEventListener("click", () => {
      vm.moveChoice(index, index + 1);
      renderBallotEditor(container, vm, onSubmitted);
    });
    row.addEventListener("dragstart", (event) => {
      (event as DragEvent).dataTransfer?.setData("text/plain", String(index));
    });
    row.addEventListener("dragover", (event) => event.preventDefault());
    row.addEventListener("drop", (event) => {
      event.preventDefault();
      const from = Number((event as DragEvent).dataTransfer?.getData("text/plain"));
      if (!Number.isNaN(from)) {
        vm.moveChoice(from, index);
        renderBallotEditor(container, vm, onSubmitted);
      }
    });
    list.append(row);
    if (index + 1 === draft.divider) {
      list.append(
        el("li", { class: "divider", "data-divider": String(draft.divider) }, [
          "permissible above this line",
        ]),
      );
    }
  });

  const dividerInput = el("input", {
    type: "range",
    class: "divider-slider",
    min: "1",
    max: String(draft.ranking.length),
    value: String(draft.divider),
  });
  dividerInput.addEventListener("input", () => {
    draft.divider = Number(dividerInput.value);
    renderBallotEditor(container, vm, onSubmitted);
  });

  const errorBox = el("p", { class: "error", hidden: "" });
  const submit = el("button", { class: "submit-ballot", type: "button" }, [
    "Submit ballot",
  ]);
  submit.addEventListener("click", async () => {
    try {
      await vm.submitBallot();
      onSubmitted();
    } catch (err) {
      errorBox.textContent = err instanceof Error ? err.message : String(err);
      errorBox.removeAttribute("hidden");
    }
  });

  container.append(
    el("h2", {}, ["Your ballot"]),
    list,
    el("label", {}, ["Permissible through rank ", dividerInput]),
    submit,
    errorBox,
  );
}
