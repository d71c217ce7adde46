import type { EditEvent } from "./types.js";

// Event positions count unicode scalar values, not UTF-16 code units, so all
// buffer arithmetic goes through code-point arrays.

export function toScalars(text: string): string[] {
  return Array.from(text);
}

export function applyEvent(buffer: string, ev: EditEvent): string {
  if (ev.kind === "insert") {
    const chars = toScalars(buffer);
    if (ev.pos === undefined || ev.pos < 0 || ev.pos > chars.length) {
      throw new Error(`insert out of bounds at seq ${ev.seq}`);
    }
    chars.splice(ev.pos, 0, ...toScalars(ev.text ?? ""));
    return chars.join("");
  }
  if (ev.kind === "delete") {
    const chars = toScalars(buffer);
    const len = ev.len ?? 0;
    if (ev.pos === undefined || ev.pos < 0 || ev.pos + len > chars.length) {
      throw new Error(`delete out of bounds at seq ${ev.seq}`);
    }
    chars.splice(ev.pos, len);
    return chars.join("");
  }
  return buffer;
}

export function replay(initial: string, events: readonly EditEvent[]): string {
  let buffer = initial;
  for (const ev of events) buffer = applyEvent(buffer, ev);
  return buffer;
}
