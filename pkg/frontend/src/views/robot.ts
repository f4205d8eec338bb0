// Robot panel: per-arm mode and task, the display mirror, and the
// taught-profile library.

import { byId, clear, el } from "../dom.js";
import type { Store } from "../model.js";

export function initRobot(store: Store): void {
  store.subscribe(() => render(store));
}

function render(store: Store): void {
  const snapshot = store.snapshot;
  if (!snapshot) return;
  const robot = snapshot.robot;

  const alive = byId<HTMLElement>("robot-alive");
  alive.textContent = robot.alive ? "online" : "offline";
  alive.className = `badge ${robot.alive ? "on" : "off"}`;

  byId<HTMLElement>("robot-display").textContent = robot.display || "—";

  const arms = byId<HTMLElement>("robot-arms");
  clear(arms);
  for (const [name, arm] of Object.entries(robot.arms)) {
    const card = el("div", `arm mode-${arm.mode.toLowerCase()}`);
    card.appendChild(el("div", "card-title", `${name} arm`));
    card.appendChild(el("div", "", arm.mode + (arm.current_task ? ` · ${arm.current_task}` : "")));
    const joints = arm.joints.map((j) => j.toFixed(2)).join(" ");
    card.appendChild(el("div", "joints", joints));
    arms.appendChild(card);
  }

  const profiles = byId<HTMLElement>("robot-profiles");
  clear(profiles);
  for (const profile of robot.profiles) {
    profiles.appendChild(el("li", "", profile));
  }
  if (robot.profiles.length === 0) {
    profiles.appendChild(el("li", "empty", "no taught tasks"));
  }
}
