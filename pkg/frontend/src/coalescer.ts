import type { EditEvent } from "./types.js";
import { toScalars } from "./replay.js";

/**
 * Minimal insert/delete events turning `base` into `current`: one common
 * prefix/suffix diff, emitted as at most one delete followed by one insert.
 * Sequence numbers continue from `seqStart`.
 */
export function diffEvents(
  base: string,
  current: string,
  seqStart: number,
  timestamp: number,
): EditEvent[] {
  if (base === current) return [];
  const a = toScalars(base);
  const b = toScalars(current);
  let prefix = 0;
  while (prefix < a.length && prefix < b.length && a[prefix] === b[prefix]) prefix++;
  let endA = a.length;
  let endB = b.length;
  while (endA > prefix && endB > prefix && a[endA - 1] === b[endB - 1]) {
    endA--;
    endB--;
  }
  const events: EditEvent[] = [];
  let seq = seqStart;
  if (endA > prefix) {
    events.push({ seq: seq++, t: timestamp, kind: "delete", pos: prefix, len: endA - prefix });
  }
  if (endB > prefix) {
    events.push({
      seq: seq++,
      t: timestamp,
      kind: "insert",
      pos: prefix,
      text: b.slice(prefix, endB).join(""),
    });
  }
  return events;
}

/**
 * Keystroke coalescer: buffers raw input snapshots and emits the buffer
 * delta as events once the burst window closes. Works from buffer
 * snapshots, so it needs no native input events (textarea `input` is
 * enough).
 */
export class InputCoalescer {
  private base: string;
  private current: string;
  private burstStartedAt: number | null = null;

  constructor(
    initial: string,
    private readonly burstMs: number = 500,
  ) {
    this.base = initial;
    this.current = initial;
  }

  get buffer(): string {
    return this.current;
  }

  get dirty(): boolean {
    return this.base !== this.current;
  }

  /** Record a new buffer snapshot; returns flushed events when the burst
   * window elapsed since the first unflushed change. */
  update(text: string, now: number, nextSeq: () => number): EditEvent[] {
    this.current = text;
    if (this.burstStartedAt === null && this.dirty) {
      this.burstStartedAt = now;
      return [];
    }
    if (this.burstStartedAt !== null && now - this.burstStartedAt >= this.burstMs) {
      return this.flush(now, nextSeq);
    }
    return [];
  }

  /** Emit the pending delta unconditionally (save, blur, finalize). */
  flush(now: number, nextSeq: () => number): EditEvent[] {
    if (!this.dirty) {
      this.burstStartedAt = null;
      return [];
    }
    const seqStart = nextSeq();
    const events = diffEvents(this.base, this.current, seqStart, now);
    // reserve the extra seq when the delta needs two events
    for (let i = 1; i < events.length; i++) nextSeq();
    this.base = this.current;
    this.burstStartedAt = null;
    return events;
  }
}
