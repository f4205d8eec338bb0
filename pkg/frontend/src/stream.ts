// Push-channel wiring: one EventSource; the server always sends a full
// snapshot first, so every (re)connect rehydrates the whole view.

import type { PushEvent, Store } from "./model.js";

export function connectStream(store: Store, url = "/events"): EventSource {
  const source = new EventSource(url);
  source.onopen = () => store.setConnected(true);
  source.onerror = () => store.setConnected(false);
  source.onmessage = (event) => {
    let parsed: PushEvent;
    try {
      parsed = JSON.parse(event.data) as PushEvent;
    } catch {
      return;
    }
    store.apply(parsed);
  };
  return source;
}
