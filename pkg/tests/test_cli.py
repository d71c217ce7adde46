import json

import pytest

from pelab.cli import main
from pelab.session import session_to_jsonl


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestRotationCommands:
    def test_generate_and_validate(self, tmp_path, capsys):
        plan_path = tmp_path / "plan.json"
        code, out, _ = run_cli(
            capsys, "rotation", "generate",
            "--translators", "a,b,c,d", "--models", "x,y,z",
            "--seed", "7", "--out", str(plan_path),
        )
        assert code == 0 and plan_path.exists()
        code, out, _ = run_cli(capsys, "rotation", "validate", str(plan_path))
        assert code == 0 and "valid" in out

    def test_validate_flags_broken_plan(self, tmp_path, capsys):
        plan_path = tmp_path / "plan.json"
        run_cli(
            capsys, "rotation", "generate",
            "--translators", "a,b", "--models", "x", "--out", str(plan_path),
        )
        plan = json.loads(plan_path.read_text())
        plan["matrix"]["a"] = [plan["matrix"]["a"][0]] * 2  # duplicate condition
        plan_path.write_text(json.dumps(plan))
        code, out, _ = run_cli(capsys, "rotation", "validate", str(plan_path))
        assert code == 1 and "row" in out


class TestIngest:
    def test_doc_ingestion(self, tmp_path, capsys):
        src = tmp_path / "novel.txt"
        src.write_text("First sentence. Second sentence.\n\nNew paragraph here.")
        out_path = tmp_path / "doc.json"
        code, out, _ = run_cli(
            capsys, "ingest", "doc", "--in", str(src), "--out", str(out_path),
            "--title", "Novel", "--language", "en",
        )
        assert code == 0 and "3 segments" in out
        payload = json.loads(out_path.read_text())
        assert payload["title"] == "Novel"

    def test_mt_alignment_check(self, tmp_path, capsys):
        src = tmp_path / "novel.txt"
        src.write_text("Uno. Due.")
        doc_path = tmp_path / "doc.json"
        run_cli(capsys, "ingest", "doc", "--in", str(src), "--out", str(doc_path))
        mt = tmp_path / "mt.txt"
        mt.write_text("solo una riga\n")
        code, _, err = run_cli(
            capsys, "ingest", "mt", "--doc", str(doc_path), "--in", str(mt),
            "--model", "m0", "--out", str(tmp_path / "mt.json"),
        )
        assert code == 1 and "1 MT lines vs 2" in err


class TestReports:
    def test_times_table_text(self, demo_store, capsys):
        code, out, _ = run_cli(
            capsys, "report", "times", "--store", str(demo_store.root), "--id", "demo"
        )
        assert code == 0
        assert "64.33" in out and "115.68" in out

    def test_hter_json(self, demo_store, capsys):
        code, out, _ = run_cli(
            capsys, "report", "hter", "--store", str(demo_store.root), "--id", "demo",
            "--format", "json",
        )
        payload = json.loads(out)
        assert payload["conditions"]["gpt-3.5"]["doc"] == pytest.approx(52.0)

    def test_creativity_csv(self, demo_store, capsys):
        code, out, _ = run_cli(
            capsys, "report", "creativity", "--store", str(demo_store.root), "--id", "demo",
            "--format", "csv",
        )
        assert code == 0 and out.startswith("system,")

    def test_unknown_project_fails_cleanly(self, demo_store, capsys):
        code, _, err = run_cli(
            capsys, "report", "times", "--store", str(demo_store.root), "--id", "ghost"
        )
        assert code == 1 and "UnknownProject" in err


class TestExportImport:
    def test_roundtrip(self, demo_store, tmp_path, capsys):
        archive = tmp_path / "demo.zip"
        code, out, _ = run_cli(
            capsys, "export", "--store", str(demo_store.root), "--id", "demo",
            "--out", str(archive),
        )
        assert code == 0 and archive.exists()
        code, out, _ = run_cli(
            capsys, "import", str(archive), "--store", str(tmp_path / "other")
        )
        assert code == 0 and "imported project demo" in out


class TestSessionCommands:
    def test_verify_good_session(self, demo_store, tmp_path, capsys):
        session = demo_store.sessions("demo")[0]
        path = tmp_path / "session.jsonl"
        path.write_text(session_to_jsonl(session), encoding="utf-8")
        code, out, _ = run_cli(capsys, "session", "verify", str(path))
        assert code == 0 and "ok:" in out

    def test_verify_rejects_gapped_seq(self, demo_store, tmp_path, capsys):
        session = demo_store.sessions("demo")[0]
        lines = session_to_jsonl(session).splitlines()
        events = [json.loads(ln) for ln in lines[1:]]
        events[-1]["seq"] = events[-2]["seq"]  # break monotonicity
        path = tmp_path / "bad.jsonl"
        path.write_text("\n".join([lines[0]] + [json.dumps(e) for e in events]))
        code, _, err = run_cli(capsys, "session", "verify", str(path))
        assert code == 1 and "invalid session" in err
