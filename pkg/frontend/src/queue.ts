import type { EditEvent } from "./types.js";

export interface AckTransport {
  /** Deliver a batch; resolves with the server's last acknowledged seq. */
  send(events: EditEvent[]): Promise<number>;
}

export interface QueueStorage {
  save(events: EditEvent[]): void;
  load(): EditEvent[];
}

export interface QueueOptions {
  maxBatch?: number;
  retryDelayMs?: number;
  maxAttempts?: number;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

/**
 * Ordered at-least-once delivery of edit events.
 *
 * Events wait in seq order and leave only after the server acknowledges
 * them; a failed request is retried with the same contiguous batch, so the
 * server sees no gaps and deduplicates overlaps from lost responses. The
 * pending tail survives page reloads through the storage hook.
 */
export class EventQueue {
  private pending: EditEvent[] = [];
  private draining: Promise<void> | null = null;

  constructor(
    private readonly transport: AckTransport,
    private readonly storage?: QueueStorage,
    private readonly options: QueueOptions = {},
  ) {
    if (storage) this.pending = storage.load();
  }

  get pendingCount(): number {
    return this.pending.length;
  }

  enqueue(events: EditEvent[] | EditEvent | null): void {
    if (!events) return;
    const batch = Array.isArray(events) ? events : [events];
    for (const ev of batch) {
      const tail = this.pending[this.pending.length - 1];
      if (tail && ev.seq <= tail.seq) {
        throw new Error(`event seq ${ev.seq} does not extend the queue`);
      }
      this.pending.push(ev);
    }
    this.storage?.save(this.pending);
  }

  /** Deliver everything currently pending; concurrent calls share one
   * drain loop. */
  drain(): Promise<void> {
    if (!this.draining) {
      this.draining = this.drainLoop().finally(() => {
        this.draining = null;
      });
    }
    return this.draining;
  }

  private async drainLoop(): Promise<void> {
    const maxBatch = this.options.maxBatch ?? 50;
    const retryDelay = this.options.retryDelayMs ?? 50;
    const maxAttempts = this.options.maxAttempts ?? 100;
    const sleep = this.options.sleep ?? defaultSleep;
    let attempts = 0;
    while (this.pending.length > 0) {
      const batch = this.pending.slice(0, maxBatch);
      try {
        const acked = await this.transport.send(batch);
        this.pending = this.pending.filter((ev) => ev.seq > acked);
        this.storage?.save(this.pending);
        attempts = 0;
      } catch (err) {
        attempts += 1;
        if (attempts >= maxAttempts) throw err;
        await sleep(retryDelay);
      }
    }
  }
}
