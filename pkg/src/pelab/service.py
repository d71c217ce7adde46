"""HTTP API for the editing workbench and study administration.

Translator endpoints authenticate with the per-translator bearer token
issued at project setup; event streams travel as JSON batches and export
archives as zip bytes.
"""

from __future__ import annotations

import json
from typing import Any

from fastapi import Depends, FastAPI, Header, HTTPException, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import annotation as annotation_mod
from . import analytics
from .annotation import AnnotationSpan, agreement_report
from .corpus import document_from_payload, tokenize_with_offsets
from .experiment import validate_rotation
from .metrics import MissingSegment, OutOfRangeScore
from .session import EditEvent, MalformedStream, NonMonotonicSeq, OutOfBounds
from .store import (
    AlignmentMismatch,
    DuplicateId,
    LeaseLost,
    NotAssigned,
    OutOfRange,
    ProjectConfig,
    ProjectDefinition,
    ProjectStateError,
    ProjectStore,
    SeqGap,
    StoreError,
    UnknownProject,
    ValidationFailed,
)

_ERROR_STATUS = {
    UnknownProject: 404,
    OutOfRange: 404,
    DuplicateId: 409,
    SeqGap: 409,
    AlignmentMismatch: 422,
    ValidationFailed: 422,
    MissingSegment: 422,
    OutOfRangeScore: 422,
    MalformedStream: 422,
    NonMonotonicSeq: 422,
    OutOfBounds: 422,
    annotation_mod.OutOfBounds: 422,
    annotation_mod.UnknownType: 422,
    annotation_mod.DegenerateMarginals: 422,
    annotation_mod.NoMatchedPairs: 422,
    annotation_mod.NoUCPs: 422,
    NotAssigned: 403,
    LeaseLost: 423,
    ProjectStateError: 409,
}


def _http_error(exc: Exception) -> HTTPException:
    for klass, status in _ERROR_STATUS.items():
        if isinstance(exc, klass):
            return HTTPException(
                status_code=status,
                detail={"error": type(exc).__name__, "message": str(exc)},
            )
    return HTTPException(status_code=500, detail={"error": type(exc).__name__, "message": str(exc)})


def create_app(store: ProjectStore) -> FastAPI:
    app = FastAPI(title="post-editing workbench service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def translator_auth(project_id: str, authorization: str = Header(default="")) -> str:
        token = authorization.removeprefix("Bearer ").strip()
        translator = store.translator_by_token(project_id, token) if token else None
        if translator is None:
            raise HTTPException(status_code=401, detail={"error": "Unauthorized"})
        return translator

    @app.exception_handler(StoreError)
    @app.exception_handler(ValueError)
    async def store_error_handler(request: Request, exc: Exception):
        http_exc = _http_error(exc)
        return JSONResponse(
            status_code=http_exc.status_code, content={"detail": http_exc.detail}
        )

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/projects", status_code=201)
    def create_project(payload: dict) -> dict:
        try:
            document = document_from_payload(
                payload["document"], doc_id=payload["document"].get("id", "doc")
            )
            definition = ProjectDefinition(
                project_id=payload["id"],
                document=document,
                models=payload.get("models", {}),
                translators=payload["translators"],
                reference=payload.get("reference"),
                n_chunks=payload.get("n_chunks"),
                config=ProjectConfig.from_json(payload.get("config", {})),
            )
            pid = store.create_project(definition)
        except (StoreError, ValueError) as exc:
            raise _http_error(exc)
        return {"id": pid, "translator_tokens": store.translator_tokens(pid)}

    @app.post("/projects/{project_id}/activate")
    def activate(project_id: str) -> dict:
        store.activate_project(project_id)
        return {"id": project_id, "state": store.project_state(project_id)}

    @app.get("/projects/{project_id}")
    def project_info(project_id: str) -> dict:
        doc = store.document(project_id)
        return {
            "id": project_id,
            "state": store.project_state(project_id),
            "segments": len(doc.segments),
            "chunks": [c.id for c in store.chunks(project_id)],
            "conditions": store.condition_labels(project_id),
        }

    @app.get("/projects/{project_id}/rotation")
    def rotation(project_id: str) -> dict:
        plan = store.rotation(project_id)
        violations = validate_rotation(plan)
        return {
            "plan": plan.to_json(),
            "violations": [
                {"scope": v.scope, "where": v.where, "message": v.message} for v in violations
            ],
        }

    @app.get("/projects/{project_id}/assignments")
    def assignments(project_id: str, translator: str = Depends(translator_auth)) -> dict:
        return {"translator_id": translator, "assignments": store.assignments(project_id, translator)}

    @app.get("/projects/{project_id}/bundle")
    def bundle(
        project_id: str, segment: int, translator: str = Depends(translator_auth)
    ) -> dict:
        b = store.get_segment_bundle(project_id, translator, segment)
        return {
            "segment_id": b.segment_id,
            "segment_index": b.segment_index,
            "source_text": b.source_text,
            "initial_text": b.initial_text,
            "condition": b.condition.to_json(),
            "preceding": [{"segment_id": sid, "text": t} for sid, t in b.preceding],
            "following": [{"segment_id": sid, "text": t} for sid, t in b.following],
            "last_seq": b.last_seq,
            "current_text": b.current_text,
            "finalized": b.finalized,
        }

    @app.post("/projects/{project_id}/events")
    def events(
        project_id: str, payload: dict, translator: str = Depends(translator_auth)
    ) -> dict:
        try:
            batch = [EditEvent.from_json(ev) for ev in payload["events"]]
        except (KeyError, ValueError) as exc:
            raise _http_error(ValidationFailed(str(exc)))
        last = store.append_events(project_id, translator, payload["segment_id"], batch)
        return {"acked_seq": last}

    @app.post("/projects/{project_id}/finalize")
    def finalize(
        project_id: str, payload: dict, translator: str = Depends(translator_auth)
    ) -> dict:
        session = store.finalize_session(
            project_id, translator, payload["segment_id"], payload["final_text"]
        )
        return {
            "segment_id": session.segment_id,
            "final_text": session.final_text,
            "active_ms": session.active_ms(store.config(project_id).idle_threshold_ms),
        }

    @app.get("/projects/{project_id}/sessions/{translator_id}/{segment_id}")
    def session_info(project_id: str, translator_id: str, segment_id: str) -> dict:
        session = store.load_session(project_id, translator_id, segment_id)
        if session is None:
            raise HTTPException(status_code=404, detail={"error": "NoSession"})
        return {
            "segment_id": session.segment_id,
            "translator_id": session.translator_id,
            "condition": session.condition_label,
            "finalized": session.is_finalized,
            "final_text": session.final_text,
            "active_ms": session.active_ms(store.config(project_id).idle_threshold_ms),
            "events": len(session.events),
        }

    @app.get("/projects/{project_id}/annotations")
    def list_annotations(project_id: str) -> list[dict]:
        return [s.to_json() for s in store.annotations(project_id)]

    @app.post("/projects/{project_id}/annotations", status_code=201)
    def add_annotation(project_id: str, payload: dict) -> dict:
        try:
            span = AnnotationSpan.from_json(payload)
        except (KeyError, ValueError) as exc:
            raise _http_error(exc)
        span_id = store.add_annotation(project_id, span)
        return {"id": span_id}

    @app.get("/projects/{project_id}/agreement")
    def agreement(project_id: str, annotator_a: str, annotator_b: str, layer: str = "creative_shift") -> dict:
        spans = store.annotations(project_id)
        a = [s for s in spans if s.annotator_id == annotator_a and s.layer == layer]
        b = [s for s in spans if s.annotator_id == annotator_b and s.layer == layer]
        doc = store.document(project_id)
        tokenizer = store.config(project_id).tokenizer
        offsets = {
            s.id: [(t_start, t_end) for _, t_start, t_end in tokenize_with_offsets(s.text, tokenizer)]
            for s in doc.segments
        }
        try:
            report = agreement_report(a, b, offsets)
        except ValueError as exc:
            raise _http_error(exc)
        return {
            "span_kappa": report.span_kappa,
            "type_kappa": report.type_kappa,
            "matched_pairs": report.matched_pairs,
            "unmatched_a": report.unmatched_a,
            "unmatched_b": report.unmatched_b,
        }

    @app.post("/projects/{project_id}/scores/{condition_label}")
    async def upload_scores(project_id: str, condition_label: str, request: Request) -> dict:
        body = (await request.body()).decode("utf-8")
        content_type = request.headers.get("content-type", "")
        source: Any = body
        if "json" in content_type:
            source = json.loads(body)
        scores = store.ingest_scores(project_id, condition_label, source)
        return {"condition": condition_label, "segments": len(scores)}

    @app.get("/projects/{project_id}/reports/{table}")
    def report(project_id: str, table: str, format: str = "json") -> Response:
        payload = build_report(store, project_id, table)
        if format == "json":
            return Response(
                json.dumps(payload, ensure_ascii=False, sort_keys=True),
                media_type="application/json",
            )
        headers, rows = tabulate_report(table, payload)
        if format == "csv":
            return Response(analytics.table_to_csv(headers, rows), media_type="text/csv")
        return Response(analytics.render_table(headers, rows), media_type="text/plain")

    @app.get("/projects/{project_id}/export")
    def export(project_id: str) -> Response:
        data = store.export_archive(project_id)
        return Response(
            data,
            media_type="application/zip",
            headers={"Content-Disposition": f'attachment; filename="{project_id}.zip"'},
        )

    return app


def build_report(store: ProjectStore, project_id: str, table: str) -> Any:
    """Compute one of the study tables as a JSON-ready structure."""
    snapshot = store.snapshot(project_id)
    if table == "times":
        per_translator = analytics.editing_time_report(
            snapshot.sessions, by_translator=True, idle_threshold_ms=snapshot.idle_threshold_ms
        )
        totals = analytics.editing_time_report(
            snapshot.sessions, idle_threshold_ms=snapshot.idle_threshold_ms
        )
        return {
            "conditions": {
                cond: {"total": totals[cond], "by_translator": per_translator[cond]}
                for cond in totals
            }
        }
    if table == "hter":
        cells = analytics.hter_report(
            snapshot.sessions, snapshot.reference_texts, snapshot.tokenizer, snapshot.ter_config
        )
        return {
            "conditions": {
                cond: {key: cell.percent for key, cell in row.items()}
                for cond, row in cells.items()
            }
        }
    if table == "quality":
        out = {}
        for label in snapshot.condition_labels:
            quality = analytics.condition_quality(snapshot, label)
            if quality is None:
                continue
            minutes = analytics.editing_time_report(
                [s for s in snapshot.sessions if s.condition_label == label],
                idle_threshold_ms=snapshot.idle_threshold_ms,
            ).get(label, 0.0)
            ratio = (
                analytics.quality_time_ratio(quality, minutes) if minutes > 0 else None
            )
            out[label] = {
                "bleu": quality.bleu,
                "chrf": quality.chrf,
                "comet": quality.comet,
                "minutes": minutes,
                "ratio": ratio,
            }
        return {"conditions": out}
    if table == "creativity":
        out = {}
        for report in analytics.build_condition_reports(snapshot):
            out[report.condition] = {
                "cs_ratio": report.cs_ratio,
                "comet": report.comet,
                "creativity": report.creativity_percent,
            }
        return {"conditions": out}
    if table == "conditions":
        return [r.to_json() for r in analytics.build_condition_reports(snapshot)]
    raise HTTPException(status_code=404, detail={"error": "UnknownTable", "message": table})


def tabulate_report(table: str, payload: Any) -> tuple[list[str], list[list[object]]]:
    """Flatten a report payload into (headers, rows) for text/CSV output."""

    def fmt(value, digits=2):
        return "" if value is None else f"{value:.{digits}f}"

    if table == "times":
        conditions = payload["conditions"]
        translators = sorted({t for c in conditions.values() for t in c["by_translator"]})
        headers = ["source"] + translators + ["total"]
        rows = [
            [cond] + [fmt(c["by_translator"].get(t)) for t in translators] + [fmt(c["total"])]
            for cond, c in sorted(conditions.items(), key=lambda kv: kv[1]["total"])
        ]
        return headers, rows
    if table == "hter":
        conditions = payload["conditions"]
        translators = sorted({t for row in conditions.values() for t in row if t != "doc"})
        headers = ["source"] + translators + ["doc"]
        rows = [
            [cond] + [fmt(row.get(t, None), 1) for t in translators] + [fmt(row.get("doc"), 1)]
            for cond, row in sorted(conditions.items())
        ]
        totals = ["total"]
        for key in translators + ["doc"]:
            values = [row.get(key) for row in conditions.values() if row.get(key) is not None]
            totals.append(fmt(sum(values), 1) if values else "")
        rows.append(totals)
        return headers, rows
    if table == "quality":
        headers = ["source", "ratio", "bleu", "chrf", "comet", "minutes"]
        rows = [
            [
                cond,
                fmt(c["ratio"], 3),
                fmt(c["bleu"], 1),
                fmt(c["chrf"], 1),
                fmt(c["comet"], 3),
                fmt(c["minutes"]),
            ]
            for cond, c in sorted(
                payload["conditions"].items(),
                key=lambda kv: -(kv[1]["ratio"] or 0.0),
            )
        ]
        return headers, rows
    if table == "creativity":
        headers = ["system", "cs_ratio", "comet", "creativity"]
        rows = [
            [cond, fmt(c["cs_ratio"]), fmt(c["comet"]), fmt(c["creativity"], 2)]
            for cond, c in sorted(payload["conditions"].items())
        ]
        return headers, rows
    if table == "conditions":
        headers = [
            "condition", "minutes", "hter", "bleu", "chrf", "comet",
            "quality_time_ratio", "cs_ratio", "creativity",
        ]
        rows = [
            [
                r["condition"],
                fmt(r["total_editing_minutes"]),
                fmt(r["hter_percent"], 1),
                fmt(r["bleu"], 1),
                fmt(r["chrf"], 1),
                fmt(r["comet"], 3),
                fmt(r["quality_time_ratio"], 3),
                fmt(r["cs_ratio"]),
                fmt(r["creativity_percent"], 2),
            ]
            for r in payload
        ]
        return headers, rows
    raise ValueError(f"unknown table {table}")
