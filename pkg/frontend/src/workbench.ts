import type { EditEvent, SegmentBundle } from "./types.js";
import { EditorState, type EditorOptions } from "./editorState.js";
import { EventQueue, type QueueOptions, type QueueStorage } from "./queue.js";
import { WorkbenchClient } from "./client.js";

export interface WorkbenchOptions extends EditorOptions {
  now?: () => number;
  queue?: QueueOptions;
  storage?: QueueStorage;
}

/**
 * Drives one segment session end to end: state machine, event queue, and
 * server acknowledgement. The session epoch is the moment the bundle was
 * opened, so event timestamps are relative milliseconds.
 */
export class SegmentWorkbench {
  readonly state: EditorState;
  readonly queue: EventQueue;
  private readonly epoch: number;
  private readonly now: () => number;

  constructor(
    private readonly client: WorkbenchClient,
    private readonly projectId: string,
    readonly bundle: SegmentBundle,
    options: WorkbenchOptions = {},
  ) {
    this.now = options.now ?? (() => Date.now());
    this.epoch = this.now();
    this.state = new EditorState(bundle, options);
    this.queue = new EventQueue(
      {
        send: (events: EditEvent[]) =>
          this.client.postEvents(this.projectId, bundle.segment_id, events),
      },
      options.storage,
      options.queue,
    );
    this.queue.enqueue(this.state.openForReading(this.t()));
  }

  private t(): number {
    return Math.max(0, Math.round(this.now() - this.epoch));
  }

  startEditing(): void {
    this.queue.enqueue(this.state.enterEditing(this.t()));
  }

  /** New buffer contents from the input element. */
  input(text: string): void {
    this.queue.enqueue(this.state.inputChanged(text, this.t()));
  }

  async save(): Promise<void> {
    this.queue.enqueue(this.state.draftSaved(this.t()));
    await this.queue.drain();
  }

  async finalize(): Promise<{ active_ms: number }> {
    this.queue.enqueue(this.state.finalize(this.t()));
    await this.queue.drain();
    const result = await this.client.finalize(
      this.projectId,
      this.bundle.segment_id,
      this.state.buffer,
    );
    return { active_ms: result.active_ms };
  }
}
