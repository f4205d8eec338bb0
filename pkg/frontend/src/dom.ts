// Tiny DOM helpers shared by the view modules.

export function byId<T extends HTMLElement>(id: string): T {
  const element = document.getElementById(id);
  if (!element) throw new Error(`missing element #${id}`);
  return element as T;
}

export function el(tag: string, className = "", text = ""): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

export function clear(node: HTMLElement): void {
  while (node.firstChild) node.removeChild(node.firstChild);
}

// shows an error message inline for a few seconds
export function flash(target: HTMLElement, text: string, kind: "ok" | "err" = "err"): void {
  target.textContent = text;
  target.className = `flash ${kind}`;
  if (text) {
    window.setTimeout(() => {
      if (target.textContent === text) {
        target.textContent = "";
        target.className = "flash";
      }
    }, 6000);
  }
}

// wraps an async click handler so a press can never double-fire
export function onClickOnce(button: HTMLButtonElement, handler: () => Promise<void>): void {
  button.addEventListener("click", async () => {
    if (button.disabled) return;
    button.disabled = true;
    try {
      await handler();
    } finally {
      button.disabled = false;
    }
  });
}
