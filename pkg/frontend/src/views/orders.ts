// Order monitor: enqueue orders, watch the queue, the current/next task
// card, and the blocked banner with resolve/abort controls.

import { api, ApiError } from "../api.js";
import { byId, clear, el, flash, onClickOnce } from "../dom.js";
import type { Store } from "../model.js";

export function initOrders(store: Store): void {
  const select = byId<HTMLSelectElement>("order-recipe");
  const startButton = byId<HTMLButtonElement>("order-start");
  const resolveButton = byId<HTMLButtonElement>("order-resolve");
  const abortButton = byId<HTMLButtonElement>("order-abort");
  const message = byId<HTMLElement>("order-message");

  onClickOnce(startButton, async () => {
    if (!select.value) {
      flash(message, "pick a recipe first");
      return;
    }
    try {
      const reply = await api.enqueueOrder(select.value);
      flash(message, `queued ${reply.order_id}`, "ok");
    } catch (error) {
      flash(message, error instanceof ApiError ? error.message : String(error));
    }
  });

  onClickOnce(resolveButton, async () => {
    try {
      await api.resolveOrder();
      flash(message, "resolved", "ok");
    } catch (error) {
      flash(message, error instanceof ApiError ? error.message : String(error));
    }
  });

  onClickOnce(abortButton, async () => {
    try {
      await api.abortOrder();
      flash(message, "aborted", "ok");
    } catch (error) {
      flash(message, error instanceof ApiError ? error.message : String(error));
    }
  });

  store.subscribe(() => render(store));
}

function render(store: Store): void {
  const snapshot = store.snapshot;
  if (!snapshot) return;

  const select = byId<HTMLSelectElement>("order-recipe");
  const current = select.value;
  clear(select);
  for (const name of Object.keys(snapshot.recipes)) {
    const option = document.createElement("option");
    option.value = name;
    option.textContent = name;
    if (name === current) option.selected = true;
    select.appendChild(option);
  }

  const banner = byId<HTMLElement>("order-blocked");
  if (snapshot.blocked_text) {
    banner.textContent = `blocked: ${snapshot.blocked_text}`;
    banner.classList.add("visible");
  } else {
    banner.textContent = "";
    banner.classList.remove("visible");
  }

  const table = byId<HTMLElement>("order-table");
  clear(table);
  const header = el("tr");
  for (const column of ["order", "recipe", "status", "step", "enqueued", "finished"]) {
    header.appendChild(el("th", "", column));
  }
  table.appendChild(header);
  for (const order of snapshot.orders) {
    const row = el("tr", `status-${order.status.toLowerCase()}`);
    row.appendChild(el("td", "", order.order_id));
    row.appendChild(el("td", "", order.recipe));
    row.appendChild(el("td", "status", order.status));
    row.appendChild(el("td", "", String(order.current_step)));
    row.appendChild(el("td", "", `${order.enqueued_at} ms`));
    row.appendChild(el("td", "", order.finished_at === null ? "—" : `${order.finished_at} ms`));
    table.appendChild(row);
  }

  const currentCard = byId<HTMLElement>("view-current");
  const nextCard = byId<HTMLElement>("view-next");
  const view = snapshot.view;
  if (view.current) {
    const c = view.current as Record<string, unknown>;
    const arm = c.arm ? ` ${c.arm}` : "";
    currentCard.textContent = `${c.task_name} (${c.kind}${arm}) — ${c.description ?? ""}`;
  } else {
    currentCard.textContent = "idle";
  }
  nextCard.textContent = view.next ?? "—";
}
