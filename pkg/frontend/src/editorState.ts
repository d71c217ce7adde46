import type { EditEvent, SegmentBundle } from "./types.js";
import { InputCoalescer } from "./coalescer.js";

export type Phase = "reading" | "editing" | "finalized";
export type Layout = "horizontal" | "vertical";

export interface EditorOptions {
  burstMs?: number;
  layout?: Layout;
  contextK?: number;
}

/**
 * Per-segment editor state machine.
 *
 * Opens in the reading phase: the buffer is locked and no time is recorded
 * until the translator explicitly starts editing. Finalizing locks the
 * buffer again; reopening a finalized segment appends a fresh
 * editing-started event to the same session.
 */
export class EditorState {
  readonly segmentId: string;
  layout: Layout;
  contextK: number;
  phase: Phase;

  private coalescer: InputCoalescer;
  private seq: number;

  constructor(bundle: SegmentBundle, options: EditorOptions = {}) {
    this.segmentId = bundle.segment_id;
    this.layout = options.layout ?? "horizontal";
    this.contextK = options.contextK ?? 2;
    this.phase = bundle.finalized ? "finalized" : "reading";
    this.seq = bundle.last_seq;
    this.coalescer = new InputCoalescer(bundle.current_text, options.burstMs ?? 500);
  }

  get buffer(): string {
    return this.coalescer.buffer;
  }

  get lastSeq(): number {
    return this.seq;
  }

  private nextSeq = (): number => {
    this.seq += 1;
    return this.seq;
  };

  private plain(kind: EditEvent["kind"], t: number): EditEvent {
    return { seq: this.nextSeq(), t, kind };
  }

  /** First open of a fresh session: records that reading began. */
  openForReading(t: number): EditEvent | null {
    if (this.seq > 0 || this.phase !== "reading") return null;
    return this.plain("reading_opened", t);
  }

  /** Reading -> editing. Emits exactly one editing-started event; calling
   * again while already editing is a no-op. A finalized segment reopens
   * with a fresh editing-started. */
  enterEditing(t: number): EditEvent | null {
    if (this.phase === "editing") return null;
    this.phase = "editing";
    return this.plain("editing_started", t);
  }

  /** New buffer snapshot from the input element. Rejected outside the
   * editing phase: reading-phase buffers are immutable. */
  inputChanged(text: string, t: number): EditEvent[] {
    if (this.phase !== "editing") {
      throw new Error(`buffer is locked in the ${this.phase} phase`);
    }
    return this.coalescer.update(text, t, this.nextSeq);
  }

  /** Force out any pending delta (save, blur, periodic autosave). */
  flushPending(t: number): EditEvent[] {
    if (this.phase !== "editing") return [];
    return this.coalescer.flush(t, this.nextSeq);
  }

  focusLost(t: number): EditEvent[] {
    if (this.phase !== "editing") return [];
    return [...this.coalescer.flush(t, this.nextSeq), this.plain("focus_lost", t)];
  }

  focusGained(t: number): EditEvent | null {
    if (this.phase !== "editing") return null;
    return this.plain("focus_gained", t);
  }

  draftSaved(t: number): EditEvent[] {
    if (this.phase !== "editing") return [];
    return [...this.coalescer.flush(t, this.nextSeq), this.plain("draft_saved", t)];
  }

  /** Editing -> finalized: flushes the remaining delta, then closes. */
  finalize(t: number): EditEvent[] {
    if (this.phase !== "editing") {
      throw new Error(`cannot finalize from the ${this.phase} phase`);
    }
    const events = this.coalescer.flush(t, this.nextSeq);
    this.phase = "finalized";
    return [...events, this.plain("finalized", t)];
  }

  toggleLayout(): Layout {
    this.layout = this.layout === "horizontal" ? "vertical" : "horizontal";
    return this.layout;
  }
}
