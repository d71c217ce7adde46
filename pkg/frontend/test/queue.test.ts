import { describe, expect, it } from "vitest";

import { EventQueue, type AckTransport, type QueueStorage } from "../src/queue.js";
import type { EditEvent } from "../src/types.js";

function ev(seq: number): EditEvent {
  return { seq, t: seq * 10, kind: "insert", pos: 0, text: "x" };
}

class RecordingServer implements AckTransport {
  stored: EditEvent[] = [];
  failures: boolean[] = [];
  seqGaps = 0;

  constructor(private failurePlan: number[] = []) {}

  async send(events: EditEvent[]): Promise<number> {
    // deterministic fault injection: drop the Nth requests entirely or
    // accept them but lose the acknowledgement
    const call = this.failures.length;
    this.failures.push(false);
    const mode = this.failurePlan[call] ?? 0;
    if (mode === 1) throw new Error("connection refused");

    const last = this.stored.length ? this.stored[this.stored.length - 1]!.seq : 0;
    if (events[0]!.seq > last + 1) {
      this.seqGaps += 1;
      throw new Error("SeqGap");
    }
    for (const e of events) {
      if (e.seq > last) {
        const tail = this.stored.length ? this.stored[this.stored.length - 1]!.seq : 0;
        if (e.seq !== tail + 1) {
          this.seqGaps += 1;
          throw new Error("SeqGap");
        }
        this.stored.push(e);
      }
    }
    if (mode === 2) throw new Error("response lost after delivery");
    return this.stored[this.stored.length - 1]!.seq;
  }
}

const instant = () => Promise.resolve();

describe("EventQueue", () => {
  it("drains pending events in order", async () => {
    const server = new RecordingServer();
    const queue = new EventQueue(server, undefined, { sleep: instant });
    queue.enqueue([ev(1), ev(2), ev(3)]);
    await queue.drain();
    expect(server.stored.map((e) => e.seq)).toEqual([1, 2, 3]);
    expect(queue.pendingCount).toBe(0);
  });

  it("retries dropped requests without gaps", async () => {
    const server = new RecordingServer([1, 1, 0]); // first two calls refused
    const queue = new EventQueue(server, undefined, { sleep: instant });
    queue.enqueue([ev(1), ev(2)]);
    await queue.drain();
    expect(server.stored.map((e) => e.seq)).toEqual([1, 2]);
    expect(server.seqGaps).toBe(0);
  });

  it("survives lost acknowledgements through server-side dedup", async () => {
    const server = new RecordingServer([2, 0]); // delivered but ack lost, then retried
    const queue = new EventQueue(server, undefined, { sleep: instant });
    queue.enqueue([ev(1), ev(2)]);
    await queue.drain();
    expect(server.stored.map((e) => e.seq)).toEqual([1, 2]);
    expect(server.seqGaps).toBe(0);
  });

  it("rejects enqueueing out-of-order seqs", () => {
    const queue = new EventQueue(new RecordingServer());
    queue.enqueue([ev(5)]);
    expect(() => queue.enqueue([ev(4)])).toThrow(/does not extend/);
  });

  it("gives up after maxAttempts consecutive failures", async () => {
    const server = new RecordingServer([1, 1, 1, 1, 1, 1]);
    const queue = new EventQueue(server, undefined, { sleep: instant, maxAttempts: 3 });
    queue.enqueue([ev(1)]);
    await expect(queue.drain()).rejects.toThrow(/refused/);
  });

  it("persists the pending tail across reloads", async () => {
    let saved: EditEvent[] = [];
    const storage: QueueStorage = {
      save: (events) => {
        saved = [...events];
      },
      load: () => [...saved],
    };
    const refusing = new RecordingServer([1, 1, 1]);
    const before = new EventQueue(refusing, storage, { sleep: instant, maxAttempts: 2 });
    before.enqueue([ev(1), ev(2)]);
    await expect(before.drain()).rejects.toThrow();
    expect(saved.length).toBe(2);

    // "page reload": a fresh queue over the same storage delivers the tail
    const server = new RecordingServer();
    const after = new EventQueue(server, storage, { sleep: instant });
    expect(after.pendingCount).toBe(2);
    await after.drain();
    expect(server.stored.map((e) => e.seq)).toEqual([1, 2]);
    expect(saved.length).toBe(0);
  });

  it("shares a single drain loop between concurrent callers", async () => {
    const server = new RecordingServer();
    const queue = new EventQueue(server, undefined, { sleep: instant });
    queue.enqueue([ev(1), ev(2), ev(3), ev(4)]);
    await Promise.all([queue.drain(), queue.drain(), queue.drain()]);
    expect(server.stored.map((e) => e.seq)).toEqual([1, 2, 3, 4]);
  });
});
