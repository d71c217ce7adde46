"""Segment editing sessions: timestamped event streams, buffer replay,
active-time accounting, and JSON Lines serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

DEFAULT_IDLE_THRESHOLD_MS = 30_000


class OutOfBounds(ValueError):
    """An edit's position or span falls outside the current buffer."""


class NonMonotonicSeq(ValueError):
    """Event sequence numbers must be strictly increasing."""


class MalformedStream(ValueError):
    """The event stream violates ordering or phase rules."""


class EventKind(str, Enum):
    READING_OPENED = "reading_opened"
    EDITING_STARTED = "editing_started"
    INSERT = "insert"
    DELETE = "delete"
    FOCUS_LOST = "focus_lost"
    FOCUS_GAINED = "focus_gained"
    DRAFT_SAVED = "draft_saved"
    FINALIZED = "finalized"


EDIT_KINDS = (EventKind.INSERT, EventKind.DELETE)


@dataclass(frozen=True)
class EditEvent:
    """One session event. `position` is a unicode scalar offset; `text` is
    the inserted string (insert only); `length` the deleted character count
    (delete only)."""

    seq: int
    timestamp_ms: int
    kind: EventKind
    position: int | None = None
    text: str | None = None
    length: int | None = None

    def __post_init__(self) -> None:
        if self.kind == EventKind.INSERT:
            if self.position is None or not self.text:
                raise ValueError("insert requires position and non-empty text")
        elif self.kind == EventKind.DELETE:
            if self.position is None or not self.length or self.length < 0:
                raise ValueError("delete requires position and positive length")
        elif self.position is not None or self.text is not None or self.length is not None:
            raise ValueError(f"{self.kind.value} events carry no edit payload")

    def to_json(self) -> dict:
        payload: dict = {"seq": self.seq, "t": self.timestamp_ms, "kind": self.kind.value}
        if self.position is not None:
            payload["pos"] = self.position
        if self.text is not None:
            payload["text"] = self.text
        if self.length is not None:
            payload["len"] = self.length
        return payload

    @classmethod
    def from_json(cls, payload: Mapping) -> "EditEvent":
        return cls(
            seq=payload["seq"],
            timestamp_ms=payload["t"],
            kind=EventKind(payload["kind"]),
            position=payload.get("pos"),
            text=payload.get("text"),
            length=payload.get("len"),
        )


def apply_event(buffer: str, event: EditEvent) -> str:
    """Apply a single event to a text buffer. Non-edit kinds are no-ops."""
    if event.kind == EventKind.INSERT:
        if not 0 <= event.position <= len(buffer):
            raise OutOfBounds(
                f"seq {event.seq}: insert at {event.position} in buffer of {len(buffer)}"
            )
        return buffer[: event.position] + event.text + buffer[event.position :]
    if event.kind == EventKind.DELETE:
        if event.position < 0 or event.position + event.length > len(buffer):
            raise OutOfBounds(
                f"seq {event.seq}: delete [{event.position}, "
                f"{event.position + event.length}) in buffer of {len(buffer)}"
            )
        return buffer[: event.position] + buffer[event.position + event.length :]
    return buffer


def validate_stream(events: Sequence[EditEvent]) -> None:
    """Check seq monotonicity, timestamp order, and phase rules: edits occur
    only between an editing start and the next finalization. Any prefix of a
    valid stream is itself valid."""
    last_seq: int | None = None
    last_ts: int | None = None
    editing = False
    for ev in events:
        if last_seq is not None and ev.seq <= last_seq:
            raise NonMonotonicSeq(f"seq {ev.seq} after {last_seq}")
        if last_ts is not None and ev.timestamp_ms < last_ts:
            raise MalformedStream(
                f"seq {ev.seq}: timestamp {ev.timestamp_ms} precedes {last_ts}"
            )
        if ev.kind in EDIT_KINDS and not editing:
            raise MalformedStream(f"seq {ev.seq}: {ev.kind.value} outside editing phase")
        if ev.kind == EventKind.EDITING_STARTED:
            editing = True
        elif ev.kind == EventKind.FINALIZED:
            if not editing:
                raise MalformedStream(f"seq {ev.seq}: finalized without editing phase")
            editing = False
        last_seq = ev.seq
        last_ts = ev.timestamp_ms
    return None


def replay(initial_text: str, events: Sequence[EditEvent], validate: bool = True) -> str:
    """Left-fold of apply_event over the stream; deterministic. Errors carry
    the offending seq."""
    if validate:
        validate_stream(events)
    buffer = initial_text
    for ev in events:
        buffer = apply_event(buffer, ev)
    return buffer


def compute_active_time(
    events: Sequence[EditEvent],
    idle_threshold_ms: int = DEFAULT_IDLE_THRESHOLD_MS,
) -> int:
    """Milliseconds of active editing.

    Sums gaps between consecutive events while in an editing phase,
    excluding blurred (focus-lost) intervals; a gap above the idle
    threshold contributes exactly the threshold. Reading time (before the
    first editing start) and time after finalization contribute nothing.
    """
    validate_stream(events)
    total = 0
    editing = False
    blurred = False
    prev_ts: int | None = None
    for ev in events:
        if editing and not blurred and prev_ts is not None:
            total += min(ev.timestamp_ms - prev_ts, idle_threshold_ms)
        if ev.kind == EventKind.EDITING_STARTED:
            editing = True
            blurred = False
        elif ev.kind == EventKind.FINALIZED:
            editing = False
        elif ev.kind == EventKind.FOCUS_LOST:
            blurred = True
        elif ev.kind == EventKind.FOCUS_GAINED:
            blurred = False
        prev_ts = ev.timestamp_ms
    return total


@dataclass(frozen=True)
class EditCounts:
    insertions: int
    deletions: int
    inserted_chars: int
    deleted_chars: int


def edit_counts(events: Iterable[EditEvent]) -> EditCounts:
    """Counts over insert/delete events only."""
    ins = dels = ins_chars = del_chars = 0
    for ev in events:
        if ev.kind == EventKind.INSERT:
            ins += 1
            ins_chars += len(ev.text)
        elif ev.kind == EventKind.DELETE:
            dels += 1
            del_chars += ev.length
    return EditCounts(ins, dels, ins_chars, del_chars)


@dataclass(frozen=True)
class SegmentSession:
    """A translator's full editing history for one segment under one
    condition. `initial_text` is the MT output for post-editing and empty
    for from-scratch work; revisits append to the same event list."""

    segment_id: str
    translator_id: str
    condition_label: str
    initial_text: str
    events: tuple[EditEvent, ...] = field(default_factory=tuple)

    @property
    def final_text(self) -> str:
        return replay(self.initial_text, self.events)

    @property
    def is_finalized(self) -> bool:
        return bool(self.events) and self.events[-1].kind == EventKind.FINALIZED

    def active_ms(self, idle_threshold_ms: int = DEFAULT_IDLE_THRESHOLD_MS) -> int:
        return compute_active_time(self.events, idle_threshold_ms)

    def counts(self) -> EditCounts:
        return edit_counts(self.events)

    def header(self) -> dict:
        return {
            "segment_id": self.segment_id,
            "translator_id": self.translator_id,
            "condition": self.condition_label,
            "initial_text": self.initial_text,
        }


def session_to_jsonl(session: SegmentSession) -> str:
    """Serialize: one header object, then one event per line. The header of
    an export includes the replayed final text so imports can verify it."""
    header = session.header()
    header["final_text"] = session.final_text
    lines = [json.dumps(header, ensure_ascii=False, sort_keys=True)]
    lines.extend(
        json.dumps(ev.to_json(), ensure_ascii=False, sort_keys=True) for ev in session.events
    )
    return "\n".join(lines) + "\n"


def session_from_jsonl(text: str, verify: bool = True) -> SegmentSession:
    """Parse a session export: validates seq monotonicity and, when the
    header carries final_text, replays the stream to verify it."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MalformedStream("empty session file")
    header = json.loads(lines[0])
    events = tuple(EditEvent.from_json(json.loads(ln)) for ln in lines[1:])
    session = SegmentSession(
        segment_id=header["segment_id"],
        translator_id=header["translator_id"],
        condition_label=header["condition"],
        initial_text=header.get("initial_text", ""),
        events=events,
    )
    replayed = session.final_text  # validates the stream as a side effect
    if verify and "final_text" in header and replayed != header["final_text"]:
        raise MalformedStream(
            f"replayed text does not match recorded final_text for "
            f"segment {session.segment_id}"
        )
    return session
