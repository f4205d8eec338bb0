// Typed client for the gateway HTTP API. Every call returns the parsed
// body; non-2xx responses throw ApiError with the server's detail text
// so views can surface it inline.

import type { Snapshot, StepBody } from "./model.js";

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function call<T>(path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(path, init);
  let body: any = null;
  try {
    body = await response.json();
  } catch {
    body = null;
  }
  if (!response.ok) {
    const detail = body && body.detail ? String(body.detail) : `HTTP ${response.status}`;
    throw new ApiError(response.status, detail);
  }
  return body as T;
}

function post<T>(path: string, payload?: unknown): Promise<T> {
  return call<T>(path, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: payload === undefined ? "{}" : JSON.stringify(payload),
  });
}

export const api = {
  snapshot: () => call<Snapshot>("/snapshot"),

  createRecipe: (name: string, steps: StepBody[]) =>
    post("/recipes", { name, steps }),
  updateRecipe: (name: string, steps: StepBody[]) =>
    call(`/recipes/${encodeURIComponent(name)}`, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ steps }),
    }),
  deleteRecipe: (name: string) =>
    call(`/recipes/${encodeURIComponent(name)}`, { method: "DELETE" }),

  enqueueOrder: (recipe: string) =>
    post<{ order_id: string }>("/orders", { recipe }),
  resolveOrder: () => post("/orders/resolve"),
  abortOrder: () => post("/orders/abort"),

  registerWorker: (workerId: string, location: string, capabilities: string[]) =>
    post("/worker/register", { worker_id: workerId, location, capabilities }),
  deregisterWorker: () => post("/worker/deregister"),
  setAvailability: (available: boolean) => post("/worker/availability", { available }),
  submitConstraint: (text: string) => post("/worker/constraint", { text }),

  injectGesture: (gesture: string, tool?: string) =>
    post<{ result: string }>("/gestures", tool ? { gesture, tool } : { gesture }),
  injectFrame: (frame: Record<string, unknown>) =>
    post<{ result: string }>("/frames", frame),

  teachInit: (task: string, arm: string) => post("/teaching/init", { task, arm }),
  teachPhase: (phase: "start" | "stop" | "save" | "abort") =>
    post<{ result: string }>(`/teaching/${phase}`),
  teachGuide: (arm: string, points: { t_offset: number; joints: number[] }[]) =>
    post(`/teaching/guide/${arm}`, { points }),
  teachJog: (joints: number[], tOffset?: number) =>
    post("/teaching/jog", tOffset === undefined
      ? { joints }
      : { joints, t_offset: tOffset }),
};

export type Api = typeof api;
