// Boot: fetch the first snapshot, open the push stream, wire up panels.
// The stream re-sends a full snapshot on every (re)connect, so the view
// always converges back to server state.

import { api } from "./api.js";
import { byId } from "./dom.js";
import { Store } from "./model.js";
import { connectStream } from "./stream.js";
import { initOrders } from "./views/orders.js";
import { initRecipes } from "./views/recipes.js";
import { initRobot } from "./views/robot.js";
import { initSniffer } from "./views/sniffer.js";
import { initTeaching } from "./views/teaching.js";
import { initWorker } from "./views/worker.js";

async function boot(): Promise<void> {
  const store = new Store();
  store.subscribe(() => {
    const badge = byId<HTMLElement>("connection");
    badge.textContent = store.connected ? "live" : "reconnecting…";
    badge.className = `badge ${store.connected ? "on" : "warn"}`;
    if (store.snapshot) {
      byId<HTMLElement>("clock").textContent = `${store.snapshot.time_ms} ms`;
    }
  });

  initRecipes(store);
  initOrders(store);
  initWorker(store);
  initTeaching(store);
  initRobot(store);
  initSniffer(store);

  store.apply({ type: "snapshot", data: await api.snapshot() });
  connectStream(store);
}

boot().catch((error) => {
  const badge = document.getElementById("connection");
  if (badge) badge.textContent = `gateway unreachable: ${error}`;
});
