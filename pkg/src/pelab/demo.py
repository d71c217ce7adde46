"""Deterministic synthetic demonstration project.

Builds a complete study store whose report tables land on fixed,
pre-computed totals: editing minutes per condition, document-level HTER,
creative-shift ratios, and external quality means. The text is generated
from word banks; it demonstrates aggregation arithmetic, not translation
quality.
"""

from __future__ import annotations

import random
from pathlib import Path

from .annotation import RESOLVED_ANNOTATOR, AnnotationSpan, SHIFT_LAYER, UCP_LAYER
from .corpus import Segment, SourceDocument, tokenize_with_offsets
from .session import EditEvent, EventKind
from .store import ProjectConfig, ProjectDefinition, ProjectStore

PROJECT_ID = "demo"
TRANSLATORS = ["t1", "t2", "t3", "t4"]
MODELS = ["gpt-4", "gpt-3.5", "mistral-60k"]
HT = "HT"

N_SEGMENTS = 48
# 7x15 + 5x14 tokens per 12-segment chunk: every chunk is exactly 175 tokens.
_CHUNK_PATTERN = [15] * 7 + [14] * 5

# Total active editing milliseconds per condition (minutes x 60000).
EDIT_MS = {
    "gpt-4": 3_859_800,  # 64.33 min
    "mistral-60k": 5_227_200,  # 87.12 min
    HT: 6_940_800,  # 115.68 min
    "gpt-3.5": 7_184_400,  # 119.74 min
}

# Edits out of 700 reference tokens per condition: doc HTER of 52/54/71/66%.
HTER_EDITS = {"gpt-3.5": 364, "gpt-4": 378, "mistral-60k": 497, HT: 462}

# Style replacements that distinguish post-edited finals from the reference.
STYLE_EDITS = {"gpt-4": 70, "gpt-3.5": 60, "mistral-60k": 90}

# Resolved creative shifts against 100 UCPs, and constant segment scores.
SHIFT_COUNTS = {HT: 30, "gpt-3.5": 24, "mistral-60k": 30, "gpt-4": 32}
UCP_COUNT = 100
COMET = {HT: 0.85, "gpt-3.5": 0.84, "mistral-60k": 0.83, "gpt-4": 0.83}

TAXONOMY = (
    "lexical_invention",
    "idiom_substitution",
    "register_shift",
    "restructuring",
    "compensation",
)

_SOURCE_BANK = (
    "the garden lay silent under a copper sky while distant compounds hummed "
    "with their own secret weather and nobody asked where the old words had "
    "gone because every answer cost more than the question a child counted "
    "bones on the shore watching gulls argue over plastic fruit and thinking "
    "about rain that never arrived"
).split()

_TARGET_BANK = (
    "il giardino restava muto sotto un cielo di rame mentre i compound "
    "lontani mormoravano un loro clima segreto e nessuno chiedeva dove "
    "fossero finite le parole antiche perché ogni risposta costava più della "
    "domanda un bambino contava conchiglie sulla riva guardando i gabbiani "
    "litigare per la frutta di plastica pensando alla pioggia che non veniva"
).split()

_ALT_BANK = (
    "ombra vetro ruggine sale filo marea cenere lampo corda specchio torre "
    "muschio brace faro ghiaia pozzo varco soglia orlo brina tarlo solco "
    "vento stelo fiamma nido remo scoglio gelo ramo"
).split()


def _sentence(words: list[str]) -> str:
    words = list(words)
    words[0] = words[0].capitalize()
    return " ".join(words) + "."


def _counts_pattern() -> list[int]:
    out: list[int] = []
    for _ in range(4):
        out.extend(_CHUNK_PATTERN)
    return out


def _distribute(total: int, parts: int) -> list[int]:
    base, rem = divmod(total, parts)
    return [base + (1 if i < rem else 0) for i in range(parts)]


def _substitute(words: list[str], k: int, bank: list[str], rng: random.Random) -> list[str]:
    """Replace k distinct word positions with bank words absent from the
    original token set, so each replacement is exactly one edit."""
    out = list(words)
    original = {w.lower() for w in words}
    positions = rng.sample(range(len(words)), k)
    for pos in positions:
        choice = rng.choice(bank)
        while choice.lower() in original:
            choice = rng.choice(bank)
        out[pos] = choice
    return out


def _chunked_times(total_ms: int) -> list[int]:
    """Per-segment active times summing exactly to `total_ms`, skewed across
    the four chunks so per-translator totals vary like real data."""
    unit = total_ms // 40
    offsets = [-3 * unit, -unit, unit, 3 * unit]  # cancels out over the chunks
    out: list[int] = []
    for k in range(4):
        out.extend(_distribute(total_ms // 4 + offsets[k], 12))
    out[0] += total_ms - sum(out)  # integer-division remainder
    return out


def _session_events(initial: str, final: str, active_ms: int) -> list[EditEvent]:
    """Event stream that rewrites `initial` into `final` with gap pattern
    summing exactly to `active_ms` (no gap above the 30 s idle cap)."""
    edits: list[tuple[EventKind, dict]] = []
    if initial:
        edits.append((EventKind.DELETE, {"position": 0, "length": len(initial)}))
    edits.append((EventKind.INSERT, {"position": 0, "text": final}))

    gaps = [30_000] * (active_ms // 30_000)
    if active_ms % 30_000:
        gaps.append(active_ms % 30_000)
    needed = len(edits) + 1  # every edit plus the closing finalize
    while len(gaps) < needed:
        gaps.append(0)

    events = [
        EditEvent(seq=1, timestamp_ms=0, kind=EventKind.READING_OPENED),
        EditEvent(seq=2, timestamp_ms=2_000, kind=EventKind.EDITING_STARTED),
    ]
    seq = 3
    ts = 2_000
    kinds: list[tuple[EventKind, dict]] = list(edits)
    kinds.extend((EventKind.DRAFT_SAVED, {}) for _ in range(len(gaps) - needed))
    kinds.append((EventKind.FINALIZED, {}))
    for gap, (kind, payload) in zip(gaps, kinds):
        ts += gap
        events.append(EditEvent(seq=seq, timestamp_ms=ts, kind=kind, **payload))
        seq += 1
    return events


def _word_span(text: str, word_index: int) -> tuple[int, int]:
    offsets = [(s, e) for tok, s, e in tokenize_with_offsets(text) if tok.isalnum()]
    s, e = offsets[word_index % len(offsets)]
    return s, e


def build_demo_project(store_dir: str | Path, project_id: str = PROJECT_ID) -> ProjectStore:
    """Create and fully populate the demo project; returns its store."""
    rng = random.Random(20_240_213)
    counts = _counts_pattern()

    source_words = [
        [rng.choice(_SOURCE_BANK) for _ in range(c - 1)] for c in counts
    ]
    reference_words = [
        [rng.choice(_TARGET_BANK) for _ in range(c - 1)] for c in counts
    ]

    final_words: dict[str, list[list[str]]] = {}
    for label in [HT] + MODELS:
        k_total = HTER_EDITS[HT] if label == HT else STYLE_EDITS[label]
        per_segment = _distribute(k_total, N_SEGMENTS)
        final_words[label] = [
            _substitute(reference_words[i], per_segment[i], _ALT_BANK, rng)
            for i in range(N_SEGMENTS)
        ]

    junk_counter = 0
    mt_words: dict[str, list[list[str]]] = {}
    for model in MODELS:
        per_segment = _distribute(HTER_EDITS[model], N_SEGMENTS)
        segments = []
        for i in range(N_SEGMENTS):
            words = list(final_words[model][i])
            for pos in rng.sample(range(len(words)), per_segment[i]):
                words[pos] = f"xq{junk_counter:04d}"
                junk_counter += 1
            segments.append(words)
        mt_words[model] = segments

    document = SourceDocument(
        id="demo-doc",
        title="Demonstration corpus",
        language="en",
        segments=tuple(
            Segment(
                id=f"s{i:04d}",
                index=i,
                text=_sentence(source_words[i]),
                word_count=counts[i],
            )
            for i in range(N_SEGMENTS)
        ),
    )

    store = ProjectStore(store_dir)
    store.create_project(
        ProjectDefinition(
            project_id=project_id,
            document=document,
            models={m: [_sentence(w) for w in mt_words[m]] for m in MODELS},
            translators=TRANSLATORS,
            reference=[_sentence(w) for w in reference_words],
            config=ProjectConfig(taxonomy=TAXONOMY, rotation_seed=11),
        )
    )
    store.activate_project(project_id)

    rotation = store.rotation(project_id)
    chunks = store.chunks(project_id)
    session_ms = {label: _chunked_times(EDIT_MS[label]) for label in EDIT_MS}
    finals: dict[tuple[str, str], str] = {}
    for translator in TRANSLATORS:
        for position, chunk in enumerate(chunks):
            condition = rotation.condition_for(translator, position)
            label = condition.label
            for index in chunk.segment_range:
                segment = document.segments[index]
                initial = (
                    _sentence(mt_words[label][index]) if label != HT else ""
                )
                final = _sentence(final_words[label][index])
                finals[(segment.id, label)] = final
                events = _session_events(initial, final, session_ms[label][index])
                store.append_events(project_id, translator, segment.id, events)
                store.finalize_session(project_id, translator, segment.id, final)

    # Resolved annotation layer: 100 UCPs on the source, per-condition shifts.
    spans: list[AnnotationSpan] = []
    ucp_per_segment = _distribute(UCP_COUNT, N_SEGMENTS)
    for i in range(N_SEGMENTS):
        for j in range(ucp_per_segment[i]):
            start, end = _word_span(document.segments[i].text, 1 + 3 * j)
            spans.append(
                AnnotationSpan(
                    layer=UCP_LAYER,
                    segment_id=document.segments[i].id,
                    start=start,
                    end=end,
                    annotator_id=RESOLVED_ANNOTATOR,
                )
            )
    for label, count in SHIFT_COUNTS.items():
        for j in range(count):
            index = (j * N_SEGMENTS) // count
            sid = document.segments[index].id
            start, end = _word_span(finals[(sid, label)], 2 + j)
            spans.append(
                AnnotationSpan(
                    layer=SHIFT_LAYER,
                    segment_id=sid,
                    start=start,
                    end=end,
                    annotator_id=RESOLVED_ANNOTATOR,
                    shift_type=TAXONOMY[j % len(TAXONOMY)],
                    condition_label=label,
                )
            )

    # Two-linguist sample layers on the HT finals, for the agreement report.
    for j in range(8):
        index = j % 6
        sid = document.segments[index].id
        start, end = _word_span(finals[(sid, HT)], 1 + j)
        for annotator, wobble, type_index in (("linguist_a", 0, j), ("linguist_b", j % 3, j // 2)):
            spans.append(
                AnnotationSpan(
                    layer=SHIFT_LAYER,
                    segment_id=sid,
                    start=max(0, start - wobble),
                    end=end,
                    annotator_id=annotator,
                    shift_type=TAXONOMY[type_index % len(TAXONOMY)],
                    condition_label=HT,
                )
            )
    store.add_annotations(project_id, spans)

    for label, value in COMET.items():
        store.ingest_scores(
            project_id,
            label,
            {segment.id: value for segment in document.segments},
        )
    return store


def main() -> None:
    import argparse

    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--store", default="demo/store", help="target store directory")
    args = parser.parse_args()
    target = Path(args.store)
    build_demo_project(target)
    print(f"demo project '{PROJECT_ID}' written to {target}")


if __name__ == "__main__":
    main()
