// Wire types matching the workbench service API.

export type EventKind =
  | "reading_opened"
  | "editing_started"
  | "insert"
  | "delete"
  | "focus_lost"
  | "focus_gained"
  | "draft_saved"
  | "finalized";

export interface EditEvent {
  seq: number;
  t: number; // milliseconds since the segment-session epoch
  kind: EventKind;
  pos?: number; // unicode scalar offset (insert/delete)
  text?: string; // insert payload
  len?: number; // delete length in scalars
}

export interface Condition {
  kind: "from_scratch" | "post_edit";
  model_id?: string;
}

export interface ContextSegment {
  segment_id: string;
  text: string;
}

export interface SegmentBundle {
  segment_id: string;
  segment_index: number;
  source_text: string;
  initial_text: string;
  condition: Condition;
  preceding: ContextSegment[];
  following: ContextSegment[];
  last_seq: number;
  current_text: string;
  finalized: boolean;
}

export interface Assignment {
  position: number;
  chunk_id: string;
  condition: Condition;
  segment_ids: string[];
  word_count: number;
}

export interface SessionInfo {
  segment_id: string;
  translator_id: string;
  condition: string;
  finalized: boolean;
  final_text: string;
  active_ms: number;
  events: number;
}
