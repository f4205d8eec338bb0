// Live message lane: one arrow row per bus message in arrival order,
// append-only, colored by conversation.

import { byId, el } from "../dom.js";
import { conversationHue, shortAgent } from "../model.js";
import type { MessageEvent_, Store } from "../model.js";

let renderedUpTo = 0;

export function initSniffer(store: Store): void {
  store.subscribe(() => render(store));
}

export function arrowLabel(message: MessageEvent_): string {
  const receivers = message.receivers.map(shortAgent).join(",");
  return `${shortAgent(message.sender)} → ${receivers}`;
}

function render(store: Store): void {
  const lane = byId<HTMLElement>("sniffer-lane");
  const fresh = store.messages.filter((m) => m.global_seq > renderedUpTo);
  for (const message of fresh) {
    const row = el("div", "arrow");
    row.style.borderLeftColor = `hsl(${conversationHue(message.conversation_id)} 70% 55%)`;
    row.appendChild(el("span", "seq", `#${message.global_seq}`));
    row.appendChild(el("span", `performative p-${message.performative}`,
                       message.performative));
    row.appendChild(el("span", "route", arrowLabel(message)));
    row.appendChild(el("span", "conv", message.conversation_id));
    const summary = message.content.text ?? message.content.task_name ?? "";
    row.appendChild(el("span", "summary", summary));
    lane.appendChild(row);
    renderedUpTo = message.global_seq;
  }
  if (fresh.length > 0) {
    lane.scrollTop = lane.scrollHeight;
  }
}
