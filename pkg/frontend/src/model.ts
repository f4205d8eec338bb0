// View model: everything on screen derives from the gateway snapshot
// plus push events. The store keeps no client-side business state, so a
// page refresh always reproduces exactly what the server reports.

export interface StepBody {
  kind: "worker" | "robot";
  task_name: string;
  arm?: string | null;
  description?: string;
}

export interface WorkerTask {
  order_id: string;
  step_index: number;
  task_name: string;
  description: string;
  status: "Waiting" | "InProgress" | "Paused" | "Done";
  assigned_at: number;
  done_at: number | null;
}

export interface OrderRow {
  order_id: string;
  recipe: string;
  status: "Queued" | "Running" | "Blocked" | "Completed" | "Failed";
  current_step: number;
  enqueued_at: number;
  started_at: number | null;
  finished_at: number | null;
}

export interface Snapshot {
  time_ms: number;
  worker: {
    registered: boolean;
    available: boolean;
    worker_id: string | null;
    location: string | null;
    capabilities: string[];
    task: WorkerTask | null;
    display: string;
  };
  robot: {
    arms: Record<string, { mode: string; current_task: string | null; joints: number[] }>;
    display: string;
    profiles: string[];
    alive: boolean;
  };
  recipes: Record<string, StepBody[]>;
  orders: OrderRow[];
  blocked_text: string | null;
  constraints: { text: string; stamp: number; resolved: boolean }[];
  view: { current: Record<string, unknown> | null; next: string | null };
  worker_status: string;
  teaching: {
    active: boolean;
    session_id: string | null;
    task_name: string | null;
    arm: string | null;
    phase: string | null;
  };
}

export interface MessageEvent_ {
  type: "message";
  global_seq: number;
  performative: string;
  sender: string;
  receivers: string[];
  conversation_id: string;
  content_kind: string;
  content: Record<string, string>;
  delivered_at: number;
}

export interface SnapshotEvent {
  type: "snapshot";
  data: Snapshot;
}

export type PushEvent = MessageEvent_ | SnapshotEvent;

export type Listener = () => void;

export class Store {
  snapshot: Snapshot | null = null;
  messages: MessageEvent_[] = [];
  connected = false;
  private listeners: Listener[] = [];

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  setConnected(connected: boolean): void {
    this.connected = connected;
    this.notify();
  }

  apply(event: PushEvent): void {
    if (event.type === "snapshot") {
      this.snapshot = event.data;
    } else if (event.type === "message") {
      // the lane is append-only; drop duplicates a reconnect might replay
      const last = this.messages[this.messages.length - 1];
      if (last === undefined || event.global_seq > last.global_seq) {
        this.messages.push(event);
      }
    }
    this.notify();
  }
}

// stable per-conversation hue for the sniffer lane
export function conversationHue(conversationId: string): number {
  let hash = 0;
  for (let i = 0; i < conversationId.length; i++) {
    hash = (hash * 31 + conversationId.charCodeAt(i)) | 0;
  }
  return ((hash % 360) + 360) % 360;
}

export function shortAgent(address: string): string {
  return address.split("@")[0];
}
