// Worker panel: registration, availability, the live task card, the
// seven-button gesture pad (with the developer frame-mode toggle that
// routes presses through the raw classifier path), and the constraint
// box. Each pad press issues exactly one API call.

import { api, ApiError } from "../api.js";
import { byId, clear, el, flash, onClickOnce } from "../dom.js";
import { syntheticFrame } from "../frames.js";
import type { Store } from "../model.js";

const GESTURES = ["Pick", "Place", "SwipeRight", "SwipeLeft",
                  "LeanBackward", "LeanForward", "Tool"];

export function initWorker(store: Store): void {
  const registerButton = byId<HTMLButtonElement>("worker-register");
  const deregisterButton = byId<HTMLButtonElement>("worker-deregister");
  const availabilityButton = byId<HTMLButtonElement>("worker-availability");
  const constraintButton = byId<HTMLButtonElement>("worker-constraint-send");
  const message = byId<HTMLElement>("worker-message");

  onClickOnce(registerButton, async () => {
    const workerId = byId<HTMLInputElement>("worker-id").value.trim();
    const location = byId<HTMLInputElement>("worker-location").value.trim();
    const caps = byId<HTMLInputElement>("worker-caps").value
      .split(",").map((c) => c.trim()).filter(Boolean);
    if (!workerId || !location) {
      flash(message, "worker id and location required");
      return;
    }
    try {
      await api.registerWorker(workerId, location, caps);
      flash(message, `registered ${workerId}`, "ok");
    } catch (error) {
      flash(message, error instanceof ApiError ? error.message : String(error));
    }
  });

  onClickOnce(deregisterButton, async () => {
    try {
      await api.deregisterWorker();
      flash(message, "deregistered", "ok");
    } catch (error) {
      flash(message, error instanceof ApiError ? error.message : String(error));
    }
  });

  onClickOnce(availabilityButton, async () => {
    const available = store.snapshot?.worker.available ?? false;
    try {
      await api.setAvailability(!available);
    } catch (error) {
      flash(message, error instanceof ApiError ? error.message : String(error));
    }
  });

  onClickOnce(constraintButton, async () => {
    const box = byId<HTMLTextAreaElement>("worker-constraint");
    const text = box.value.trim();
    if (!text) {
      flash(message, "constraint text is empty");
      return;
    }
    try {
      await api.submitConstraint(text);
      box.value = "";
      flash(message, "constraint reported", "ok");
    } catch (error) {
      flash(message, error instanceof ApiError ? error.message : String(error));
    }
  });

  const pad = byId<HTMLElement>("gesture-pad");
  for (const gesture of GESTURES) {
    const button = el("button", "pad", gesture) as HTMLButtonElement;
    onClickOnce(button, async () => {
      const frameMode = byId<HTMLInputElement>("frame-mode").checked;
      try {
        let result: { result: string };
        if (frameMode) {
          result = await api.injectFrame(syntheticFrame(gesture));
        } else {
          const tool = gesture === "Tool"
            ? byId<HTMLInputElement>("worker-tool").value.trim() || undefined
            : undefined;
          result = await api.injectGesture(gesture, tool);
        }
        flash(message, `${gesture}: ${result.result}`, "ok");
      } catch (error) {
        flash(message, error instanceof ApiError ? error.message : String(error));
      }
    });
    pad.appendChild(button);
  }

  store.subscribe(() => render(store));
}

function render(store: Store): void {
  const snapshot = store.snapshot;
  if (!snapshot) return;
  const worker = snapshot.worker;

  const badge = byId<HTMLElement>("worker-badge");
  if (!worker.registered) {
    badge.textContent = "not registered";
    badge.className = "badge off";
  } else if (worker.available) {
    badge.textContent = `${worker.worker_id} available`;
    badge.className = "badge on";
  } else {
    badge.textContent = `${worker.worker_id} unavailable`;
    badge.className = "badge warn";
  }

  byId<HTMLButtonElement>("worker-availability").textContent =
    worker.available ? "set unavailable" : "set available";

  const card = byId<HTMLElement>("worker-task-card");
  clear(card);
  if (worker.task) {
    card.appendChild(el("div", "card-title", worker.task.task_name));
    card.appendChild(el("div", "", worker.task.description));
    card.appendChild(el("div", `task-status s-${worker.task.status.toLowerCase()}`,
                        worker.task.status));
  } else {
    card.appendChild(el("div", "empty", "no task assigned"));
  }
  byId<HTMLElement>("worker-display").textContent = worker.display || "—";
}
