"""Acceptance suite: one test per acceptance criterion, each printing a
PASS/FAIL line with its measured runtime (run with -s to see them inline).

The heavyweight TER criterion enumerates the complete pair universe; expect
the whole module to take a few minutes.
"""

import json
import os
import random
import signal
import subprocess
import sys
import time

import pytest

from pelab.analytics import creativity_score
from pelab.annotation import (
    AnnotationSpan,
    SHIFT_LAYER,
    UCP_LAYER,
    span_agreement,
    span_agreement_kappa,
    type_agreement,
    type_agreement_kappa,
)
from pelab.corpus import tokenize_with_offsets
from pelab.experiment import generate_rotation, validate_rotation
from pelab.metrics import bleu_corpus, chrf_corpus, ChrfConfig, hter_document, ter_segments
from pelab.session import EventKind, compute_active_time, replay
from pelab.store import ProjectStore

from oracles import kappa_oracle, replay_oracle
from test_session import make_stream
from ter_universe import run_universe


_capture_manager = None


@pytest.fixture(autouse=True)
def _passthrough_reporting(request):
    # let report() write through pytest's capture, whatever the mode
    global _capture_manager
    _capture_manager = request.config.pluginmanager.getplugin("capturemanager")
    yield
    _capture_manager = None


def report(name: str, elapsed: float, budget: float, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok and elapsed <= budget else "FAIL"
    extra = f" | {detail}" if detail else ""
    line = f"[{status}] {name}: {elapsed:.2f}s (budget {budget:.0f}s){extra}"
    if _capture_manager is not None:
        with _capture_manager.global_and_fixture_disabled():
            print(f"\n{line}", flush=True)
    else:
        print(line, flush=True)
    assert ok, f"{name}: {detail}"
    assert elapsed <= budget, f"{name} exceeded its {budget:.0f}s budget ({elapsed:.2f}s)"


class TestAcceptance:
    def test_creativity_score_reproduces_published_rows(self):
        t0 = time.perf_counter()
        rows = [
            (0.30, 0.85, 25.5),
            (0.24, 0.84, 20.1),
            (0.30, 0.83, 24.9),
            (0.32, 0.83, 26.5),
        ]
        ok = all(abs(creativity_score(r, c) - expected) <= 0.1 for r, c, expected in rows)
        report("creativity score", time.perf_counter() - t0, 1.0, ok)

    def test_ter_greedy_vs_exhaustive_oracle(self):
        t0 = time.perf_counter()
        stats = run_universe(processes=min(2, os.cpu_count() or 1))
        elapsed = time.perf_counter() - t0
        ok = (
            stats.raw_pairs == 5461 * 5460
            and stats.identity_ok
            and stats.greedy_ge_oracle
            and stats.greedy_le_lev
            and stats.agreement >= 0.95
        )
        report(
            "TER oracle equivalence",
            elapsed,
            300.0,
            ok,
            f"{stats.classes} classes / {stats.raw_pairs} pairs, "
            f"agreement {stats.agreement:.4%}",
        )

    def test_hter_aggregation_is_ratio_of_sums(self):
        t0 = time.perf_counter()
        rng = random.Random(410)
        alphabet = ["uno", "due", "tre", "quattro", "cinque", "sei"]
        mt, pe = [], []
        for _ in range(1000):
            ref = [rng.choice(alphabet) for _ in range(rng.randint(1, 12))]
            hyp = [
                tok if rng.random() > 0.3 else rng.choice(alphabet)
                for tok in ref
            ]
            if rng.random() < 0.2:
                hyp = hyp + [rng.choice(alphabet)]
            mt.append(hyp)
            pe.append(ref)
        document = hter_document(mt, pe)
        per_segment = ter_segments(mt, pe)
        recomputed = (
            100.0
            * sum(r.total_edits for r in per_segment)
            / sum(r.ref_length for r in per_segment)
        )
        ok = document == recomputed  # exact float equality, same aggregation
        report(
            "HTER aggregation",
            time.perf_counter() - t0,
            60.0,
            ok,
            f"document {document:.3f}%",
        )

    def test_kappa_matches_contingency_oracle(self):
        t0 = time.perf_counter()
        rng = random.Random(77)
        worst_span = worst_type = 0.0
        checked = 0
        for trial in range(500):
            n_tokens = rng.randint(4, 24)
            text = " ".join(f"w{i}" for i in range(n_tokens))
            offsets = {
                "s0": [(s, e) for _, s, e in tokenize_with_offsets(text)]
            }
            token_offs = offsets["s0"]

            def random_spans(annotator):
                spans = []
                for _ in range(rng.randint(0, 5)):
                    i = rng.randrange(n_tokens)
                    j = rng.randint(i, min(n_tokens - 1, i + 4))
                    spans.append(
                        AnnotationSpan(
                            UCP_LAYER, "s0", token_offs[i][0], token_offs[j][1], annotator
                        )
                    )
                return spans

            a, b = random_spans("a"), random_spans("b")

            def labels(spans):
                return [
                    any(s.start < te and ts < s.end for s in spans)
                    for ts, te in token_offs
                ]

            la, lb = labels(a), labels(b)
            try:
                expected = kappa_oracle(la, lb)
            except ZeroDivisionError:
                continue
            got = span_agreement(a, b, offsets).kappa
            swapped = span_agreement_kappa(b, a, offsets)
            worst_span = max(worst_span, abs(got - expected), abs(got - swapped))

            # typed spans with unambiguous 1:1 matching (identical ranges)
            n_pairs = rng.randint(1, 8)
            types = ["t1", "t2", "t3"]
            ta = [rng.choice(types) for _ in range(n_pairs)]
            tb = [rng.choice(types) for _ in range(n_pairs)]
            if len(set(ta)) == 1 and ta == tb:
                continue
            spans_a = [
                AnnotationSpan(SHIFT_LAYER, "s0", 10 * i, 10 * i + 5, "a", shift_type=t)
                for i, t in enumerate(ta)
            ]
            spans_b = [
                AnnotationSpan(SHIFT_LAYER, "s0", 10 * i, 10 * i + 5, "b", shift_type=t)
                for i, t in enumerate(tb)
            ]
            type_got, matched, _, _ = type_agreement(spans_a, spans_b)
            assert matched == n_pairs
            worst_type = max(
                worst_type,
                abs(type_got.kappa - kappa_oracle(ta, tb)),
                abs(type_got.kappa - type_agreement_kappa(spans_b, spans_a)),
            )
            checked += 1

        # identical annotations give exactly 1
        text = "uno due tre quattro"
        offsets = {"s0": [(s, e) for _, s, e in tokenize_with_offsets(text)]}
        same = [AnnotationSpan(UCP_LAYER, "s0", 0, 3, "a")]
        identical_one = span_agreement_kappa(same, list(same), offsets) == 1.0

        ok = worst_span <= 1e-12 and worst_type <= 1e-12 and identical_one and checked > 300
        report(
            "kappa oracle",
            time.perf_counter() - t0,
            60.0,
            ok,
            f"max span dev {worst_span:.2e}, max type dev {worst_type:.2e}",
        )

    def test_rotation_latin_square_properties(self):
        t0 = time.perf_counter()
        ok = True
        for n in range(2, 9):
            translators = [f"t{i}" for i in range(n)]
            models = [f"m{i}" for i in range(n - 1)]
            for seed in (0, 1, 17):
                plan = generate_rotation(translators, models, seed)
                ok &= validate_rotation(plan) == []

        # the 4x4 case over {HT, X, Y, Z}: every condition once per
        # translator and once per position, as in the published layout
        plan = generate_rotation(["A", "B", "C", "D"], ["X", "Y", "Z"], seed=4)
        ok &= validate_rotation(plan) == []
        labels = [[c.label for c in row] for row in plan.rows]
        for row in labels:
            ok &= sorted(row) == ["HT", "X", "Y", "Z"]
        for j in range(4):
            ok &= sorted(row[j] for row in labels) == ["HT", "X", "Y", "Z"]
        report("rotation", time.perf_counter() - t0, 1.0, ok)

    def test_session_integrity(self, tmp_path):
        t0 = time.perf_counter()
        ok = True

        # 10,000-event fuzzed streams replay byte-exactly against the oracle
        for seed in (1, 2, 3):
            events = make_stream(random.Random(seed), 10_000)
            ok &= replay("", events) == replay_oracle("", events)
            ok &= compute_active_time(events) == _interval_walk_active(events, 30_000)

        # a SIGKILLed writer loses nothing that was acknowledged
        acked, store_dir = _run_and_kill_writer(tmp_path)
        ok &= len(acked) >= 3
        store = ProjectStore(store_dir)
        session = store.load_session("p1", "t0", "s0000")
        ok &= session is not None
        if session is not None:
            stored_last = session.events[-1].seq if session.events else 0
            ok &= stored_last >= max(acked)
            replay(session.initial_text, session.events)  # must not raise
        report(
            "session integrity",
            time.perf_counter() - t0,
            120.0,
            ok,
            f"killed writer after {len(acked)} acked batches",
        )

    def test_fixture_tables_via_cli(self, tmp_path):
        t0 = time.perf_counter()
        from pelab.demo import build_demo_project

        store = build_demo_project(tmp_path / "store")

        def cli(*args):
            proc = subprocess.run(
                [sys.executable, "-m", "pelab", *args],
                capture_output=True,
                text=True,
                timeout=120,
            )
            assert proc.returncode == 0, proc.stderr
            return proc.stdout

        base = ["--store", str(store.root), "--id", "demo"]
        times = json.loads(cli("report", "times", *base, "--format", "json"))["conditions"]
        hter = json.loads(cli("report", "hter", *base, "--format", "json"))["conditions"]
        quality = json.loads(cli("report", "quality", *base, "--format", "json"))["conditions"]
        creativity = json.loads(cli("report", "creativity", *base, "--format", "json"))[
            "conditions"
        ]

        ok = (
            times["gpt-4"]["total"] == 64.33
            and times["HT"]["total"] == 115.68
            and times["mistral-60k"]["total"] == 87.12
            and times["gpt-3.5"]["total"] == 119.74
            and abs(hter["gpt-3.5"]["doc"] - 52.0) < 1e-9
            and abs(hter["mistral-60k"]["doc"] - 71.0) < 1e-9
            and abs(creativity["HT"]["creativity"] - 25.5) <= 0.1
            and abs(creativity["gpt-3.5"]["creativity"] - 20.1) <= 0.1
            and abs(creativity["mistral-60k"]["creativity"] - 24.9) <= 0.1
            and abs(creativity["gpt-4"]["creativity"] - 26.5) <= 0.1
        )
        # the quality-to-time ratio follows the documented formula
        for cond in quality.values():
            expected = (
                (cond["bleu"] + cond["chrf"] + cond["comet"] * 100.0) / 3.0 / cond["minutes"]
            )
            ok &= abs(cond["ratio"] - expected) < 5e-4
        report("fixture tables", time.perf_counter() - t0, 30.0, ok)

    def test_metrics_sanity(self):
        t0 = time.perf_counter()
        identity_tokens = [["ha", "le", "sue", "idee", "."]]
        identity_text = ["Ha le sue idee."]
        ok = bleu_corpus(identity_tokens, identity_tokens) == 100.0
        ok &= chrf_corpus(identity_text, identity_text) == 100.0
        bleu = bleu_corpus([["the", "cat", "sat"]], [["the", "cat", "sat", "down"]])
        ok &= abs(bleu - 71.65) <= 0.01
        chrf = chrf_corpus(["abc"], ["abd"], ChrfConfig(char_n=1))
        ok &= abs(chrf - 66.67) <= 0.01
        report(
            "metrics sanity",
            time.perf_counter() - t0,
            10.0,
            ok,
            f"bleu {bleu:.4f}, chrf {chrf:.4f}",
        )


def _interval_walk_active(events, threshold: int) -> int:
    """Two-phase interval walk: precompute the in-editing/not-blurred state
    after every event, then sum capped gaps."""
    counting = []
    editing = blurred = False
    for ev in events:
        if ev.kind == EventKind.EDITING_STARTED:
            editing, blurred = True, False
        elif ev.kind == EventKind.FINALIZED:
            editing = False
        elif ev.kind == EventKind.FOCUS_LOST:
            blurred = True
        elif ev.kind == EventKind.FOCUS_GAINED:
            blurred = False
        counting.append(editing and not blurred)
    total = 0
    for k in range(1, len(events)):
        if counting[k - 1]:
            total += min(events[k].timestamp_ms - events[k - 1].timestamp_ms, threshold)
    return total


_WRITER_SCRIPT = r"""
import sys
from pelab.corpus import segment_document
from pelab.session import EditEvent, EventKind
from pelab.store import ProjectDefinition, ProjectStore

root = sys.argv[1]
store = ProjectStore(root)
doc = segment_document("Uno qui. Due qui.", doc_id="d")
store.create_project(ProjectDefinition(
    project_id="p1", document=doc, models={"m": ["mt uno.", "mt due."]},
    translators=["t0", "t1"],
))
store.activate_project("p1")
print("READY", flush=True)
seq = 1
store.append_events("p1", "t0", "s0000", [
    EditEvent(seq=seq, timestamp_ms=0, kind=EventKind.EDITING_STARTED),
])
print(f"ACK {seq}", flush=True)
ts = 0
while True:
    batch = []
    for _ in range(3):
        seq += 1
        ts += 10
        batch.append(EditEvent(seq=seq, timestamp_ms=ts, kind=EventKind.INSERT,
                               position=0, text="x"))
    store.append_events("p1", "t0", "s0000", batch)
    print(f"ACK {seq}", flush=True)
"""


def _run_and_kill_writer(tmp_path):
    """Start a writer subprocess, let it acknowledge a few batches, SIGKILL
    it mid-flight, and return (acked seqs, store dir)."""
    store_dir = tmp_path / "kill-store"
    proc = subprocess.Popen(
        [sys.executable, "-c", _WRITER_SCRIPT, str(store_dir)],
        stdout=subprocess.PIPE,
        text=True,
    )
    acked = []
    try:
        assert proc.stdout.readline().strip() == "READY"
        deadline = time.monotonic() + 30
        while len(acked) < 6 and time.monotonic() < deadline:
            line = proc.stdout.readline().strip()
            if line.startswith("ACK "):
                acked.append(int(line.split()[1]))
        os.kill(proc.pid, signal.SIGKILL)
    finally:
        proc.wait(timeout=10)
        proc.stdout.close()
    return acked, store_dir
