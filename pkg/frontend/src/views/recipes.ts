// Recipe editor: compose worker/robot steps, reorder them, submit to
// the gateway. The recipe list always rerenders from the snapshot.

import { api, ApiError } from "../api.js";
import { byId, clear, el, flash } from "../dom.js";
import type { StepBody, Store } from "../model.js";

interface EditorState {
  steps: StepBody[];
  editing: string | null; // recipe being updated, null = creating
}

const state: EditorState = { steps: [], editing: null };

export function initRecipes(store: Store): void {
  const nameInput = byId<HTMLInputElement>("recipe-name");
  const addButton = byId<HTMLButtonElement>("recipe-add-step");
  const saveButton = byId<HTMLButtonElement>("recipe-save");
  const resetButton = byId<HTMLButtonElement>("recipe-reset");
  const message = byId<HTMLElement>("recipe-message");

  addButton.addEventListener("click", () => {
    state.steps.push({ kind: "worker", task_name: "", description: "" });
    renderEditor(store);
  });

  resetButton.addEventListener("click", () => {
    state.steps = [];
    state.editing = null;
    nameInput.value = "";
    nameInput.disabled = false;
    renderEditor(store);
  });

  saveButton.addEventListener("click", async () => {
    const name = state.editing ?? nameInput.value.trim();
    if (!name) {
      flash(message, "recipe needs a name");
      return;
    }
    const steps = state.steps.filter((s) => s.task_name.trim() !== "");
    if (steps.length === 0) {
      flash(message, "recipe needs at least one step");
      return;
    }
    try {
      if (state.editing) {
        await api.updateRecipe(name, steps);
      } else {
        await api.createRecipe(name, steps);
      }
      flash(message, `saved ${name}`, "ok");
      state.steps = [];
      state.editing = null;
      nameInput.value = "";
      nameInput.disabled = false;
      renderEditor(store);
    } catch (error) {
      flash(message, error instanceof ApiError ? error.message : String(error));
    }
  });

  store.subscribe(() => renderList(store));
  renderEditor(store);
}

function renderEditor(store: Store): void {
  const rows = byId<HTMLElement>("recipe-steps");
  clear(rows);
  const profiles = store.snapshot?.robot.profiles ?? [];
  state.steps.forEach((step, index) => {
    const row = el("div", "step-row");

    const kind = document.createElement("select");
    for (const option of ["worker", "robot"]) {
      const opt = document.createElement("option");
      opt.value = option;
      opt.textContent = option;
      if (step.kind === option) opt.selected = true;
      kind.appendChild(opt);
    }
    kind.addEventListener("change", () => {
      step.kind = kind.value as StepBody["kind"];
      renderEditor(store);
    });
    row.appendChild(kind);

    const task = document.createElement("input");
    task.placeholder = step.kind === "robot" ? "taught task" : "task name";
    task.value = step.task_name;
    task.setAttribute("list", "profile-options");
    task.addEventListener("input", () => (step.task_name = task.value));
    row.appendChild(task);

    if (step.kind === "robot") {
      const arm = document.createElement("select");
      for (const option of ["Right", "Left"]) {
        const opt = document.createElement("option");
        opt.value = option;
        opt.textContent = option;
        if ((step.arm ?? "Right") === option) opt.selected = true;
        arm.appendChild(opt);
      }
      arm.addEventListener("change", () => (step.arm = arm.value));
      step.arm = step.arm ?? "Right";
      row.appendChild(arm);
    } else {
      step.arm = null;
    }

    const description = document.createElement("input");
    description.placeholder = "description";
    description.value = step.description ?? "";
    description.addEventListener("input", () => (step.description = description.value));
    row.appendChild(description);

    const up = el("button", "mini", "↑") as HTMLButtonElement;
    up.disabled = index === 0;
    up.addEventListener("click", () => {
      [state.steps[index - 1], state.steps[index]] = [state.steps[index], state.steps[index - 1]];
      renderEditor(store);
    });
    row.appendChild(up);

    const down = el("button", "mini", "↓") as HTMLButtonElement;
    down.disabled = index === state.steps.length - 1;
    down.addEventListener("click", () => {
      [state.steps[index + 1], state.steps[index]] = [state.steps[index], state.steps[index + 1]];
      renderEditor(store);
    });
    row.appendChild(down);

    const remove = el("button", "mini danger", "✕") as HTMLButtonElement;
    remove.addEventListener("click", () => {
      state.steps.splice(index, 1);
      renderEditor(store);
    });
    row.appendChild(remove);

    rows.appendChild(row);
  });

  const datalist = byId<HTMLElement>("profile-options");
  clear(datalist);
  for (const profile of profiles) {
    const opt = document.createElement("option");
    opt.value = profile;
    datalist.appendChild(opt);
  }
}

function renderList(store: Store): void {
  const list = byId<HTMLElement>("recipe-list");
  const message = byId<HTMLElement>("recipe-message");
  const nameInput = byId<HTMLInputElement>("recipe-name");
  clear(list);
  const recipes = store.snapshot?.recipes ?? {};
  for (const [name, steps] of Object.entries(recipes)) {
    const card = el("div", "card");
    card.appendChild(el("div", "card-title", name));
    const body = el("ol", "steps");
    for (const step of steps) {
      const label = step.kind === "robot" ? `${step.task_name} (robot ${step.arm})` : `${step.task_name} (worker)`;
      body.appendChild(el("li", "", `${label} — ${step.description ?? ""}`));
    }
    card.appendChild(body);

    const actions = el("div", "card-actions");
    const edit = el("button", "mini", "edit") as HTMLButtonElement;
    edit.addEventListener("click", () => {
      state.editing = name;
      state.steps = steps.map((s) => ({ ...s }));
      nameInput.value = name;
      nameInput.disabled = true;
      renderEditor(store);
    });
    actions.appendChild(edit);

    const del = el("button", "mini danger", "delete") as HTMLButtonElement;
    del.addEventListener("click", async () => {
      try {
        await api.deleteRecipe(name);
      } catch (error) {
        flash(message, error instanceof ApiError ? error.message : String(error));
      }
    });
    actions.appendChild(del);
    card.appendChild(actions);
    list.appendChild(card);
  }
  if (Object.keys(recipes).length === 0) {
    list.appendChild(el("div", "empty", "no recipes yet"));
  }
}
