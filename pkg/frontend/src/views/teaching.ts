// Teaching wizard: drives the four confirmed phases (init, start, stop,
// save) with a visible tick per confirm, a demo guide-motion queue and a
// jog button while recording.

import { api, ApiError } from "../api.js";
import { byId, flash, onClickOnce } from "../dom.js";
import type { Store } from "../model.js";

const PHASES = ["Init", "Recording", "Stopped", "Saved"] as const;

let jogCount = 0;

export function initTeaching(store: Store): void {
  const message = byId<HTMLElement>("teach-message");

  onClickOnce(byId<HTMLButtonElement>("teach-guide"), async () => {
    const arm = byId<HTMLSelectElement>("teach-arm").value;
    const points = [0, 300, 600].map((t, i) => ({
      t_offset: t,
      joints: Array(7).fill(0.1 * (i + 1)),
    }));
    try {
      await api.teachGuide(arm, points);
      flash(message, `queued demo motion for ${arm} arm`, "ok");
    } catch (error) {
      flash(message, error instanceof ApiError ? error.message : String(error));
    }
  });

  onClickOnce(byId<HTMLButtonElement>("teach-init"), async () => {
    const task = byId<HTMLInputElement>("teach-task").value.trim();
    const arm = byId<HTMLSelectElement>("teach-arm").value;
    if (!task) {
      flash(message, "task name required");
      return;
    }
    jogCount = 0;
    await phase(message, () => api.teachInit(task, arm));
  });

  onClickOnce(byId<HTMLButtonElement>("teach-start"), () =>
    phase(message, () => api.teachPhase("start")));
  onClickOnce(byId<HTMLButtonElement>("teach-stop"), () =>
    phase(message, () => api.teachPhase("stop")));
  onClickOnce(byId<HTMLButtonElement>("teach-save"), () =>
    phase(message, () => api.teachPhase("save")));
  onClickOnce(byId<HTMLButtonElement>("teach-abort"), () =>
    phase(message, () => api.teachPhase("abort")));

  onClickOnce(byId<HTMLButtonElement>("teach-jog"), async () => {
    jogCount += 1;
    const joints = Array(7).fill(Math.sin(jogCount) * 0.5);
    try {
      await api.teachJog(joints);
      flash(message, `jogged waypoint ${jogCount}`, "ok");
    } catch (error) {
      flash(message, error instanceof ApiError ? error.message : String(error));
    }
  });

  store.subscribe(() => render(store));
}

async function phase(message: HTMLElement, call: () => Promise<unknown>): Promise<void> {
  try {
    await call();
  } catch (error) {
    flash(message, error instanceof ApiError ? error.message : String(error));
  }
}

function render(store: Store): void {
  const teaching = store.snapshot?.teaching;
  if (!teaching) return;
  const reached = teaching.phase === null ? -1 : PHASES.indexOf(teaching.phase as any);
  PHASES.forEach((name, index) => {
    const tick = byId<HTMLElement>(`phase-${name.toLowerCase()}`);
    const done = index <= reached;
    tick.className = `phase ${done ? "done" : ""}`;
    tick.textContent = `${done ? "✓" : "○"} ${name}`;
  });
  const status = byId<HTMLElement>("teach-status");
  if (teaching.active) {
    status.textContent = `teaching ${teaching.task_name} (${teaching.arm} arm)`;
  } else if (teaching.task_name) {
    status.textContent = `last session: ${teaching.task_name} → ${teaching.phase ?? "aborted"}`;
  } else {
    status.textContent = "no session";
  }
  byId<HTMLButtonElement>("teach-jog").disabled = teaching.phase !== "Recording";
}
