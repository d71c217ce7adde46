"""Command-line interface: project setup, ingestion, rotation tools,
report tables, archive export, and session import/verify."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analytics
from .corpus import load_document
from .experiment import RotationPlan, generate_rotation, validate_rotation
from .service import build_report, create_app, tabulate_report
from .session import session_from_jsonl
from .store import ProjectConfig, ProjectDefinition, ProjectStore


def _store(args) -> ProjectStore:
    return ProjectStore(args.store)


def cmd_project_create(args) -> int:
    payload = json.loads(Path(args.definition).read_text(encoding="utf-8"))
    from .corpus import document_from_payload

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
    store = _store(args)
    pid = store.create_project(definition)
    print(f"created project {pid} (draft)")
    for tid, token in store.translator_tokens(pid).items():
        print(f"  translator {tid}: token {token}")
    return 0


def cmd_project_activate(args) -> int:
    _store(args).activate_project(args.id)
    print(f"project {args.id} active")
    return 0


def cmd_ingest_doc(args) -> int:
    doc = load_document(args.input)
    payload = doc.to_json()
    if args.title:
        payload["title"] = args.title
    if args.language:
        payload["language"] = args.language
    Path(args.output).write_text(
        json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    print(f"{len(doc.segments)} segments, {doc.word_count} words -> {args.output}")
    return 0


def cmd_ingest_mt(args) -> int:
    """Convert one-segment-per-line MT output into an aligned variant list."""
    doc_payload = json.loads(Path(args.doc).read_text(encoding="utf-8"))
    lines = [ln for ln in Path(args.input).read_text(encoding="utf-8").splitlines() if ln.strip()]
    n = len(doc_payload["segments"])
    if len(lines) != n:
        print(f"error: {len(lines)} MT lines vs {n} source segments", file=sys.stderr)
        return 1
    Path(args.output).write_text(
        json.dumps({"model_id": args.model, "segments": lines}, ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
    print(f"aligned {n} segments for model {args.model} -> {args.output}")
    return 0


def cmd_ingest_scores(args) -> int:
    store = _store(args)
    scores = store.ingest_scores(args.id, args.condition, args.input)
    from .metrics import mean_score

    print(f"{len(scores)} scores for {args.condition}, mean {mean_score(scores):.4f}")
    return 0


def cmd_rotation_generate(args) -> int:
    plan = generate_rotation(args.translators.split(","),
                             args.models.split(",") if args.models else [], args.seed)
    blob = json.dumps(plan.to_json(), ensure_ascii=False, indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(blob, encoding="utf-8")
        print(f"rotation -> {args.output}")
    else:
        print(blob, end="")
    return 0


def cmd_rotation_validate(args) -> int:
    plan = RotationPlan.from_json(json.loads(Path(args.plan).read_text(encoding="utf-8")))
    violations = validate_rotation(plan)
    if not violations:
        print("rotation valid")
        return 0
    for v in violations:
        print(f"{v.scope} {v.where}: {v.message}")
    return 1


def cmd_report(args) -> int:
    store = _store(args)
    payload = build_report(store, args.id, args.table)
    if args.format == "json":
        print(json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2))
        return 0
    headers, rows = tabulate_report(args.table, payload)
    if args.format == "csv":
        print(analytics.table_to_csv(headers, rows), end="")
    else:
        print(analytics.render_table(headers, rows), end="")
    return 0


def cmd_export(args) -> int:
    data = _store(args).export_archive(args.id)
    Path(args.output).write_bytes(data)
    print(f"{len(data)} bytes -> {args.output}")
    return 0


def cmd_import(args) -> int:
    store = _store(args)
    pid = store.import_archive(Path(args.archive).read_bytes(), project_id=args.id)
    print(f"imported project {pid}")
    return 0


def cmd_session_verify(args) -> int:
    text = Path(args.file).read_text(encoding="utf-8")
    try:
        session = session_from_jsonl(text, verify=True)
    except Exception as exc:
        print(f"invalid session: {exc}", file=sys.stderr)
        return 1
    print(
        f"ok: segment {session.segment_id}, {len(session.events)} events, "
        f"active {session.active_ms() / 60000.0:.2f} min, "
        f"finalized={session.is_finalized}"
    )
    return 0


def cmd_session_import(args) -> int:
    text = Path(args.file).read_text(encoding="utf-8")
    session = session_from_jsonl(text, verify=True)
    store = _store(args)
    last = store.append_events(args.id, session.translator_id, session.segment_id, session.events)
    print(f"imported {len(session.events)} events for {session.segment_id}, last seq {last}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    app = create_app(_store(args))
    if args.ui:
        from starlette.staticfiles import StaticFiles

        app.mount("/app", StaticFiles(directory=args.ui, html=True), name="workbench")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pelab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def with_store(p):
        p.add_argument("--store", required=True, help="store directory")
        return p

    p = sub.add_parser("project", help="project lifecycle")
    psub = p.add_subparsers(dest="action", required=True)
    c = with_store(psub.add_parser("create"))
    c.add_argument("definition", help="project definition JSON file")
    c.set_defaults(func=cmd_project_create)
    a = with_store(psub.add_parser("activate"))
    a.add_argument("id")
    a.set_defaults(func=cmd_project_activate)

    p = sub.add_parser("ingest", help="ingest documents, MT output, score files")
    isub = p.add_subparsers(dest="what", required=True)
    d = isub.add_parser("doc")
    d.add_argument("--in", dest="input", required=True)
    d.add_argument("--out", dest="output", required=True)
    d.add_argument("--title", default="")
    d.add_argument("--language", default="")
    d.set_defaults(func=cmd_ingest_doc)
    m = isub.add_parser("mt")
    m.add_argument("--doc", required=True, help="ingested document JSON")
    m.add_argument("--in", dest="input", required=True, help="one segment per line")
    m.add_argument("--model", required=True)
    m.add_argument("--out", dest="output", required=True)
    m.set_defaults(func=cmd_ingest_mt)
    s = with_store(isub.add_parser("scores"))
    s.add_argument("--id", required=True, help="project id")
    s.add_argument("--condition", required=True)
    s.add_argument("--in", dest="input", required=True, help="CSV or JSON score file")
    s.set_defaults(func=cmd_ingest_scores)

    p = sub.add_parser("rotation", help="generate or validate rotation plans")
    rsub = p.add_subparsers(dest="action", required=True)
    g = rsub.add_parser("generate")
    g.add_argument("--translators", required=True, help="comma-separated ids")
    g.add_argument("--models", default="", help="comma-separated ids")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", dest="output")
    g.set_defaults(func=cmd_rotation_generate)
    v = rsub.add_parser("validate")
    v.add_argument("plan", help="rotation JSON file")
    v.set_defaults(func=cmd_rotation_validate)

    p = with_store(sub.add_parser("report", help="print study tables"))
    p.add_argument("table", choices=["times", "hter", "quality", "creativity", "conditions"])
    p.add_argument("--id", required=True, help="project id")
    p.add_argument("--format", choices=["text", "json", "csv"], default="text")
    p.set_defaults(func=cmd_report)

    p = with_store(sub.add_parser("export", help="write a project archive"))
    p.add_argument("--id", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.set_defaults(func=cmd_export)

    p = with_store(sub.add_parser("import", help="load a project archive"))
    p.add_argument("archive")
    p.add_argument("--id", default=None, help="import under a different project id")
    p.set_defaults(func=cmd_import)

    p = sub.add_parser("session", help="verify or import session logs")
    ssub = p.add_subparsers(dest="action", required=True)
    sv = ssub.add_parser("verify")
    sv.add_argument("file", help="session JSON Lines file")
    sv.set_defaults(func=cmd_session_verify)
    si = with_store(ssub.add_parser("import"))
    si.add_argument("file")
    si.add_argument("--id", required=True, help="project id")
    si.set_defaults(func=cmd_session_import)

    p = with_store(sub.add_parser("serve", help="run the workbench HTTP service"))
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8023)
    p.add_argument("--ui", default=None, help="frontend directory to serve at /app")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # surfaced as a one-line error, not a traceback
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
