"""File-backed project store: documents, target variants, rotation plans,
append-only per-segment event logs, annotations, external scores, and
deterministic archive export/import.

Durability model: an event batch is fsynced before it is acknowledged, and
log recovery drops a torn trailing line, so acknowledged events survive a
process kill. One writer per segment-session is enforced with expiring
leases.
"""

from __future__ import annotations

import io
import json
import os
import re
import threading
import time
import zipfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

from . import analytics
from .annotation import (
    RESOLVED_ANNOTATOR,
    AnnotationSpan,
    AnnotationStore,
)
from .corpus import (
    Chunk,
    DEFAULT_BALANCE_TOLERANCE,
    SourceDocument,
    TokenizerConfig,
    chunk_document,
)
from .experiment import (
    Condition,
    RotationPlan,
    generate_rotation,
    validate_rotation,
)
from .metrics import ingest_external_scores
from .session import (
    DEFAULT_IDLE_THRESHOLD_MS,
    EditEvent,
    SegmentSession,
    replay,
)

REFERENCE_KEY = "__reference__"

_SAFE_ID = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.-]*$")

DEFAULT_LEASE_TTL_MS = 5 * 60 * 1000
DEFAULT_CONTEXT_K = 2


class StoreError(Exception):
    pass


class UnknownProject(StoreError):
    pass


class DuplicateId(StoreError):
    pass


class AlignmentMismatch(StoreError):
    """A model's output is not aligned segment-for-segment with the source."""


class NotAssigned(StoreError):
    pass


class OutOfRange(StoreError):
    pass


class SeqGap(StoreError):
    """An event batch does not continue the stored log."""


class LeaseLost(StoreError):
    """Another writer holds the segment-session lease."""


class ValidationFailed(StoreError):
    """A batch failed the replay check against the stored buffer."""


class ProjectStateError(StoreError):
    pass


def canonical_json(obj) -> str:
    """Stable serialization used for every stored file, so identical state
    always produces identical bytes."""
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":")) + "\n"


def _check_id(value: str, what: str) -> str:
    if not _SAFE_ID.match(value):
        raise StoreError(f"{what} {value!r} must match {_SAFE_ID.pattern}")
    return value


@dataclass(frozen=True)
class ProjectConfig:
    tokenizer_scheme: str = "punct"
    idle_threshold_ms: int = DEFAULT_IDLE_THRESHOLD_MS
    context_k: int = DEFAULT_CONTEXT_K
    balance_tolerance: float = DEFAULT_BALANCE_TOLERANCE
    taxonomy: tuple[str, ...] = ()
    rotation_seed: int = 0
    lease_ttl_ms: int = DEFAULT_LEASE_TTL_MS

    @property
    def tokenizer(self) -> TokenizerConfig:
        return TokenizerConfig(self.tokenizer_scheme)

    def to_json(self) -> dict:
        return {
            "tokenizer_scheme": self.tokenizer_scheme,
            "idle_threshold_ms": self.idle_threshold_ms,
            "context_k": self.context_k,
            "balance_tolerance": self.balance_tolerance,
            "taxonomy": list(self.taxonomy),
            "rotation_seed": self.rotation_seed,
            "lease_ttl_ms": self.lease_ttl_ms,
        }

    @classmethod
    def from_json(cls, payload: Mapping) -> "ProjectConfig":
        return cls(
            tokenizer_scheme=payload.get("tokenizer_scheme", "punct"),
            idle_threshold_ms=payload.get("idle_threshold_ms", DEFAULT_IDLE_THRESHOLD_MS),
            context_k=payload.get("context_k", DEFAULT_CONTEXT_K),
            balance_tolerance=payload.get("balance_tolerance", DEFAULT_BALANCE_TOLERANCE),
            taxonomy=tuple(payload.get("taxonomy", ())),
            rotation_seed=payload.get("rotation_seed", 0),
            lease_ttl_ms=payload.get("lease_ttl_ms", DEFAULT_LEASE_TTL_MS),
        )


@dataclass(frozen=True)
class ProjectDefinition:
    """Everything needed to set up a study: the source document, one aligned
    target-text list per model, the translator roster, and optionally an
    aligned reference translation."""

    project_id: str
    document: SourceDocument
    models: Mapping[str, Sequence[str]]  # model id -> target text per segment
    translators: Sequence[str]
    reference: Sequence[str] | None = None
    n_chunks: int | None = None  # defaults to the condition count
    config: ProjectConfig = field(default_factory=ProjectConfig)


@dataclass(frozen=True)
class SegmentBundle:
    """What the workbench needs to edit one segment: the source and initial
    target for the translator's condition, read-only context, and the
    session so far."""

    segment_id: str
    segment_index: int
    source_text: str
    initial_text: str
    condition: Condition
    preceding: tuple[tuple[str, str], ...]  # (segment_id, source text)
    following: tuple[tuple[str, str], ...]
    last_seq: int
    events: tuple[EditEvent, ...]
    current_text: str
    finalized: bool


class EventLog:
    """Append-only JSON Lines log for one segment-session.

    First line is the header; every later line is one event. Appends are
    written and fsynced as a unit; a torn final line (no trailing newline)
    is discarded on load.
    """

    def __init__(self, path: Path):
        self.path = path

    def exists(self) -> bool:
        return self.path.exists()

    def initialize(self, header: Mapping) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "x", encoding="utf-8") as fh:
            fh.write(canonical_json(dict(header)))
            fh.flush()
            os.fsync(fh.fileno())

    def load(self) -> tuple[dict, list[EditEvent]]:
        with open(self.path, "rb") as fh:
            raw = fh.read()
        text = raw.decode("utf-8")
        complete, _, torn = text.rpartition("\n")
        # torn tail (if any) was never acknowledged; drop it
        lines = [ln for ln in complete.split("\n") if ln]
        if not lines:
            raise StoreError(f"event log {self.path} has no header")
        header = json.loads(lines[0])
        events = [EditEvent.from_json(json.loads(ln)) for ln in lines[1:]]
        return header, events

    def append(self, events: Sequence[EditEvent]) -> None:
        data = "".join(canonical_json(ev.to_json()) for ev in events)
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())


@dataclass
class _Lease:
    holder: str
    expires_ms: int


class LeaseTable:
    """Single active writer per (project, segment) with TTL expiry."""

    def __init__(self, ttl_ms: int = DEFAULT_LEASE_TTL_MS, clock: Callable[[], int] | None = None):
        self.ttl_ms = ttl_ms
        self._clock = clock or (lambda: int(time.time() * 1000))
        self._leases: dict[tuple[str, str], _Lease] = {}
        self._lock = threading.Lock()

    def acquire(self, key: tuple[str, str], holder: str) -> None:
        now = self._clock()
        with self._lock:
            lease = self._leases.get(key)
            if lease is not None and lease.holder != holder and lease.expires_ms > now:
                raise LeaseLost(
                    f"segment {key[1]} is being edited by {lease.holder}"
                )
            self._leases[key] = _Lease(holder=holder, expires_ms=now + self.ttl_ms)

    def release(self, key: tuple[str, str], holder: str) -> None:
        with self._lock:
            lease = self._leases.get(key)
            if lease is not None and lease.holder == holder:
                del self._leases[key]


class ProjectStore:
    """Directory-per-project persistence rooted at `root`."""

    def __init__(self, root: str | os.PathLike, clock: Callable[[], int] | None = None):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._clock = clock
        self._leases: dict[str, LeaseTable] = {}
        self._write_lock = threading.Lock()

    # -- paths ---------------------------------------------------------

    def _dir(self, project_id: str) -> Path:
        return self.root / "projects" / project_id

    def _require_dir(self, project_id: str) -> Path:
        path = self._dir(project_id)
        if not path.exists():
            raise UnknownProject(project_id)
        return path

    def list_projects(self) -> list[str]:
        base = self.root / "projects"
        if not base.exists():
            return []
        return sorted(p.name for p in base.iterdir() if p.is_dir())

    # -- creation and activation ---------------------------------------

    def create_project(self, definition: ProjectDefinition) -> str:
        pid = _check_id(definition.project_id, "project id")
        if self._dir(pid).exists():
            raise DuplicateId(f"project {pid} already exists")
        doc = definition.document
        n_segments = len(doc.segments)
        for model_id, texts in definition.models.items():
            _check_id(model_id, "model id")
            if len(texts) != n_segments:
                raise AlignmentMismatch(
                    f"model {model_id}: {len(texts)} segments vs {n_segments} in the source"
                )
        if definition.reference is not None and len(definition.reference) != n_segments:
            raise AlignmentMismatch(
                f"reference: {len(definition.reference)} segments vs {n_segments} in the source"
            )
        for tid in definition.translators:
            _check_id(tid, "translator id")

        model_ids = list(definition.models.keys())
        n_conditions = len(model_ids) + 1
        n_chunks = definition.n_chunks or n_conditions
        chunks = chunk_document(doc, n_chunks, definition.config.balance_tolerance)
        rotation = generate_rotation(
            list(definition.translators), model_ids, definition.config.rotation_seed
        )

        path = self._dir(pid)
        path.mkdir(parents=True)
        (path / "sessions").mkdir()
        (path / "variants").mkdir()
        (path / "scores").mkdir()

        tokens = {tid: f"tok-{pid}-{tid}" for tid in definition.translators}
        project = {
            "id": pid,
            "state": "draft",
            "translators": [
                {"id": tid, "token": tokens[tid]} for tid in definition.translators
            ],
            "models": model_ids,
            "config": definition.config.to_json(),
            "chunks": [
                {"id": c.id, "start": c.start, "stop": c.stop, "word_count": c.word_count}
                for c in chunks
            ],
        }
        self._write(path / "project.json", canonical_json(project))
        self._write(path / "document.json", canonical_json(doc.to_json()))
        self._write(path / "rotation.json", canonical_json(rotation.to_json()))
        for model_id, texts in definition.models.items():
            self._write_variant(path, model_id, doc, texts)
        if definition.reference is not None:
            self._write_variant(path, REFERENCE_KEY, doc, definition.reference)
        return pid

    def _write_variant(
        self, path: Path, key: str, doc: SourceDocument, texts: Sequence[str]
    ) -> None:
        payload = {
            "key": key,
            "segments": {seg.id: text for seg, text in zip(doc.segments, texts)},
        }
        self._write(path / "variants" / f"{key}.json", canonical_json(payload))

    @staticmethod
    def _write(path: Path, content: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(content)
            fh.flush()
            os.fsync(fh.fileno())

    def activate_project(self, project_id: str) -> None:
        """Validate the rotation and MT coverage, then open for editing."""
        path = self._require_dir(project_id)
        project = self._project_json(project_id)
        rotation = self.rotation(project_id)
        violations = validate_rotation(rotation)
        if violations:
            raise ProjectStateError(
                "rotation invalid: " + "; ".join(v.message for v in violations)
            )
        doc = self.document(project_id)
        for model_id in project["models"]:
            variant = self.variant_texts(project_id, model_id)
            missing = [s.id for s in doc.segments if not variant.get(s.id)]
            if missing:
                raise AlignmentMismatch(
                    f"model {model_id} lacks MT text for segment(s) {', '.join(missing[:5])}"
                )
        project["state"] = "active"
        self._write(path / "project.json", canonical_json(project))

    # -- readers ---------------------------------------------------------

    def _project_json(self, project_id: str) -> dict:
        path = self._require_dir(project_id) / "project.json"
        return json.loads(path.read_text(encoding="utf-8"))

    def project_state(self, project_id: str) -> str:
        return self._project_json(project_id)["state"]

    def config(self, project_id: str) -> ProjectConfig:
        return ProjectConfig.from_json(self._project_json(project_id)["config"])

    def document(self, project_id: str) -> SourceDocument:
        path = self._require_dir(project_id) / "document.json"
        return SourceDocument.from_json(json.loads(path.read_text(encoding="utf-8")))

    def chunks(self, project_id: str) -> list[Chunk]:
        return [
            Chunk(id=c["id"], start=c["start"], stop=c["stop"], word_count=c["word_count"])
            for c in self._project_json(project_id)["chunks"]
        ]

    def rotation(self, project_id: str) -> RotationPlan:
        path = self._require_dir(project_id) / "rotation.json"
        return RotationPlan.from_json(json.loads(path.read_text(encoding="utf-8")))

    def variant_texts(self, project_id: str, key: str) -> dict[str, str]:
        path = self._require_dir(project_id) / "variants" / f"{key}.json"
        if not path.exists():
            raise StoreError(f"no variant {key!r} in project {project_id}")
        return json.loads(path.read_text(encoding="utf-8"))["segments"]

    def reference_texts(self, project_id: str) -> dict[str, str] | None:
        path = self._require_dir(project_id) / "variants" / f"{REFERENCE_KEY}.json"
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))["segments"]

    def translator_by_token(self, project_id: str, token: str) -> str | None:
        for entry in self._project_json(project_id)["translators"]:
            if entry["token"] == token:
                return entry["id"]
        return None

    def translator_ids(self, project_id: str) -> list[str]:
        return [e["id"] for e in self._project_json(project_id)["translators"]]

    def translator_tokens(self, project_id: str) -> dict[str, str]:
        return {e["id"]: e["token"] for e in self._project_json(project_id)["translators"]}

    # -- assignment resolution -------------------------------------------

    def _chunk_of(self, project_id: str, segment_index: int) -> tuple[int, Chunk]:
        for pos, chunk in enumerate(self.chunks(project_id)):
            if chunk.start <= segment_index < chunk.stop:
                return pos, chunk
        raise OutOfRange(f"segment index {segment_index} outside every chunk")

    def condition_for(
        self, project_id: str, translator_id: str, segment_index: int
    ) -> Condition:
        rotation = self.rotation(project_id)
        if translator_id not in rotation.translators:
            raise NotAssigned(f"translator {translator_id} is not on this project")
        position, _ = self._chunk_of(project_id, segment_index)
        if position >= rotation.n_positions:
            raise NotAssigned(
                f"chunk position {position} has no condition in the rotation"
            )
        return rotation.condition_for(translator_id, position)

    def initial_text(
        self, project_id: str, condition: Condition, segment_id: str
    ) -> str:
        if condition.model_id is None:
            return ""
        return self.variant_texts(project_id, condition.model_id).get(segment_id, "")

    def assignments(self, project_id: str, translator_id: str) -> list[dict]:
        """One entry per chunk position: condition plus segment id range."""
        rotation = self.rotation(project_id)
        if translator_id not in rotation.translators:
            raise NotAssigned(f"translator {translator_id} is not on this project")
        doc = self.document(project_id)
        out = []
        for pos, chunk in enumerate(self.chunks(project_id)):
            cond = rotation.condition_for(translator_id, pos)
            out.append(
                {
                    "position": pos,
                    "chunk_id": chunk.id,
                    "condition": cond.to_json(),
                    "segment_ids": [doc.segments[i].id for i in chunk.segment_range],
                    "word_count": chunk.word_count,
                }
            )
        return out

    # -- sessions ----------------------------------------------------------

    def _session_path(self, project_id: str, translator_id: str, segment_id: str) -> Path:
        return self._require_dir(project_id) / "sessions" / f"{translator_id}__{segment_id}.jsonl"

    def _lease_table(self, project_id: str) -> LeaseTable:
        if project_id not in self._leases:
            ttl = self.config(project_id).lease_ttl_ms
            self._leases[project_id] = LeaseTable(ttl_ms=ttl, clock=self._clock)
        return self._leases[project_id]

    def load_session(
        self, project_id: str, translator_id: str, segment_id: str
    ) -> SegmentSession | None:
        log = EventLog(self._session_path(project_id, translator_id, segment_id))
        if not log.exists():
            return None
        header, events = log.load()
        return SegmentSession(
            segment_id=header["segment_id"],
            translator_id=header["translator_id"],
            condition_label=header["condition"],
            initial_text=header.get("initial_text", ""),
            events=tuple(events),
        )

    def sessions(self, project_id: str) -> list[SegmentSession]:
        base = self._require_dir(project_id) / "sessions"
        out = []
        for path in sorted(base.glob("*.jsonl")):
            translator_id, segment_id = path.stem.split("__", 1)
            loaded = self.load_session(project_id, translator_id, segment_id)
            if loaded is not None:
                out.append(loaded)
        return out

    def get_segment_bundle(
        self, project_id: str, translator_id: str, segment_index: int
    ) -> SegmentBundle:
        doc = self.document(project_id)
        if not 0 <= segment_index < len(doc.segments):
            raise OutOfRange(f"segment index {segment_index} of {len(doc.segments)}")
        condition = self.condition_for(project_id, translator_id, segment_index)
        k = self.config(project_id).context_k
        segment = doc.segments[segment_index]
        preceding = tuple(
            (s.id, s.text) for s in doc.segments[max(0, segment_index - k) : segment_index]
        )
        following = tuple(
            (s.id, s.text) for s in doc.segments[segment_index + 1 : segment_index + 1 + k]
        )
        initial = self.initial_text(project_id, condition, segment.id)
        stored = self.load_session(project_id, translator_id, segment.id)
        if stored is None:
            events: tuple[EditEvent, ...] = ()
            last_seq = 0
            current = initial
            finalized = False
        else:
            events = stored.events
            last_seq = events[-1].seq if events else 0
            current = stored.final_text
            finalized = stored.is_finalized
        return SegmentBundle(
            segment_id=segment.id,
            segment_index=segment_index,
            source_text=segment.text,
            initial_text=initial,
            condition=condition,
            preceding=preceding,
            following=following,
            last_seq=last_seq,
            events=events,
            current_text=current,
            finalized=finalized,
        )

    def append_events(
        self,
        project_id: str,
        translator_id: str,
        segment_id: str,
        batch: Sequence[EditEvent],
    ) -> int:
        """Atomically append a batch; returns the last stored seq.

        The batch must continue the stored log. A batch whose overlap with
        already-stored events is byte-identical is acknowledged idempotently,
        so clients may safely retry after a lost response.
        """
        if self.project_state(project_id) != "active":
            raise ProjectStateError(f"project {project_id} is not active")
        if not batch:
            raise ValidationFailed("empty batch")
        doc = self.document(project_id)
        segment = doc.segment_by_id(segment_id)
        condition = self.condition_for(project_id, translator_id, segment.index)
        self._lease_table(project_id).acquire((project_id, segment_id), translator_id)

        with self._write_lock:
            log = EventLog(self._session_path(project_id, translator_id, segment_id))
            if not log.exists():
                initial = self.initial_text(project_id, condition, segment_id)
                log.initialize(
                    {
                        "segment_id": segment_id,
                        "translator_id": translator_id,
                        "condition": condition.label,
                        "initial_text": initial,
                    }
                )
            header, stored = log.load()
            last_seq = stored[-1].seq if stored else 0

            batch = list(batch)
            first = batch[0].seq
            if first > last_seq + 1:
                raise SeqGap(f"batch starts at seq {first}, log ends at {last_seq}")
            new_events = [ev for ev in batch if ev.seq > last_seq]
            overlap = [ev for ev in batch if ev.seq <= last_seq]
            for ev in overlap:
                # a retried batch must resend exactly what was stored
                stored_ev = stored[ev.seq - 1] if 1 <= ev.seq <= len(stored) else None
                if stored_ev != ev:
                    raise ValidationFailed(
                        f"seq {ev.seq} conflicts with an already-stored event"
                    )
            if not new_events:
                return last_seq
            if new_events[0].seq != last_seq + 1:
                raise SeqGap(
                    f"batch continues at seq {new_events[0].seq}, log ends at {last_seq}"
                )
            combined = stored + new_events
            try:
                replay(header.get("initial_text", ""), combined)
            except Exception as exc:
                raise ValidationFailed(str(exc)) from exc
            log.append(new_events)
            return combined[-1].seq

    def finalize_session(
        self, project_id: str, translator_id: str, segment_id: str, final_text: str
    ) -> SegmentSession:
        """Verify the stored log replays to the client's final text and that
        the stream is finalized; releases the lease."""
        session = self.load_session(project_id, translator_id, segment_id)
        if session is None:
            raise ValidationFailed(f"no session recorded for segment {segment_id}")
        if not session.is_finalized:
            raise ValidationFailed(f"segment {segment_id} has no closing finalize event")
        if session.final_text != final_text:
            raise ValidationFailed(
                f"replayed text differs from the client buffer for segment {segment_id}"
            )
        self._lease_table(project_id).release((project_id, segment_id), translator_id)
        return session

    # -- annotations -------------------------------------------------------

    def _annotation_store(self, project_id: str) -> AnnotationStore:
        config = self.config(project_id)
        doc = self.document(project_id)
        source_lengths = {s.id: len(s.text) for s in doc.segments}
        finals: dict[tuple[str, str], int] = {}
        for session in self.sessions(project_id):
            finals[(session.segment_id, session.condition_label)] = len(session.final_text)

        def text_length(layer: str, segment_id: str, condition: str | None) -> int | None:
            if layer == "ucp":
                return source_lengths.get(segment_id)
            if condition is None:
                return None
            return finals.get((segment_id, condition))

        store = AnnotationStore(taxonomy=config.taxonomy, text_length=text_length)
        path = self._require_dir(project_id) / "annotations.jsonl"
        if path.exists():
            for line in path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    store.add(AnnotationSpan.from_json(json.loads(line)))
        return store

    def annotations(self, project_id: str) -> list[AnnotationSpan]:
        return self._annotation_store(project_id).spans()

    def add_annotation(self, project_id: str, span: AnnotationSpan) -> int:
        return self.add_annotations(project_id, [span])[0]

    def add_annotations(self, project_id: str, spans: Sequence[AnnotationSpan]) -> list[int]:
        store = self._annotation_store(project_id)
        ids = [store.add(span) for span in spans]  # validates before persisting
        path = self._require_dir(project_id) / "annotations.jsonl"
        with open(path, "a", encoding="utf-8") as fh:
            for span in spans:
                fh.write(canonical_json(span.to_json()))
            fh.flush()
            os.fsync(fh.fileno())
        return ids

    # -- external scores ----------------------------------------------------

    def ingest_scores(self, project_id: str, condition_label: str, source) -> dict[str, float]:
        doc = self.document(project_id)
        expected = [s.id for s in doc.segments]
        scores = ingest_external_scores(source, expected)
        path = self._require_dir(project_id) / "scores" / f"{condition_label}.json"
        self._write(path, canonical_json({"condition": condition_label, "scores": scores}))
        return scores

    def external_scores(self, project_id: str) -> dict[str, dict[str, float]]:
        base = self._require_dir(project_id) / "scores"
        out = {}
        for path in sorted(base.glob("*.json")):
            payload = json.loads(path.read_text(encoding="utf-8"))
            out[payload["condition"]] = payload["scores"]
        return out

    # -- analytics bridge ----------------------------------------------------

    def condition_labels(self, project_id: str) -> list[str]:
        rotation = self.rotation(project_id)
        return [c.label for c in rotation.conditions]

    def snapshot(self, project_id: str) -> analytics.ProjectSnapshot:
        config = self.config(project_id)
        resolved = tuple(
            s for s in self.annotations(project_id) if s.annotator_id == RESOLVED_ANNOTATOR
        )
        return analytics.ProjectSnapshot(
            condition_labels=tuple(self.condition_labels(project_id)),
            sessions=tuple(self.sessions(project_id)),
            reference_texts=self.reference_texts(project_id),
            external_scores=self.external_scores(project_id),
            resolved_annotations=resolved,
            tokenizer=config.tokenizer,
            idle_threshold_ms=config.idle_threshold_ms,
        )

    # -- archive export / import ---------------------------------------------

    def export_archive(self, project_id: str) -> bytes:
        """Deterministic zip of the project directory plus freshly computed
        reports; identical state yields identical bytes."""
        path = self._require_dir(project_id)
        reports = analytics.build_condition_reports(self.snapshot(project_id))
        report_blob = analytics.reports_to_json(reports) + "\n"

        entries: list[tuple[str, bytes]] = []
        for file in sorted(path.rglob("*")):
            if file.is_file():
                entries.append((file.relative_to(path).as_posix(), file.read_bytes()))
        entries.append(("reports.json", report_blob.encode("utf-8")))
        entries.sort()

        buf = io.BytesIO()
        with zipfile.ZipFile(buf, "w", compression=zipfile.ZIP_STORED) as zf:
            for name, data in entries:
                info = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
                info.external_attr = 0o644 << 16
                zf.writestr(info, data)
        return buf.getvalue()

    def import_archive(self, data: bytes, project_id: str | None = None) -> str:
        with zipfile.ZipFile(io.BytesIO(data)) as zf:
            names = zf.namelist()
            if "project.json" not in names:
                raise StoreError("archive lacks project.json")
            project = json.loads(zf.read("project.json").decode("utf-8"))
            pid = project_id or project["id"]
            _check_id(pid, "project id")
            target = self._dir(pid)
            if target.exists():
                raise DuplicateId(f"project {pid} already exists")
            target.mkdir(parents=True)
            for sub in ("sessions", "variants", "scores"):
                (target / sub).mkdir(exist_ok=True)
            for name in names:
                if name == "reports.json":
                    continue  # recomputed on demand
                dest = target / name
                if not dest.resolve().is_relative_to(target.resolve()):
                    raise StoreError(f"archive entry escapes project dir: {name}")
                dest.parent.mkdir(parents=True, exist_ok=True)
                dest.write_bytes(zf.read(name))
            if project_id is not None and project_id != project["id"]:
                project["id"] = project_id
                self._write(target / "project.json", canonical_json(project))
        return pid
