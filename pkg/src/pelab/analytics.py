"""Result tables: editing times, HTER matrices, quality scores,
quality-to-time ratios, and creativity scores (current and legacy formulas).

All aggregation is ratio-of-sums at full precision; rounding is applied only
when rendering.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Mapping, Sequence

from .annotation import AnnotationSpan, cs_ratio
from .corpus import TokenizerConfig, DEFAULT_TOKENIZER, tokenize
from .experiment import HT_LABEL
from .metrics import QualityScores, bleu_corpus, chrf_corpus, mean_score
from .session import DEFAULT_IDLE_THRESHOLD_MS, SegmentSession
from .ter import DEFAULT_TER, TERConfig, ter


class UnfinalizedSession(ValueError):
    """Reports require every contributing session to be finalized."""


class MissingReference(ValueError):
    """From-scratch rows need a registered reference translation."""


class ZeroTime(ValueError):
    """Quality-to-time ratio is undefined for zero editing time."""


class ZeroDenominator(ValueError):
    """Legacy creativity score needs positive UCP and word counts."""


def round_half_up(value: float, digits: int) -> float:
    return float(Decimal(repr(value)).quantize(Decimal(10) ** -digits, rounding=ROUND_HALF_UP))


def _require_finalized(sessions: Iterable[SegmentSession]) -> list[SegmentSession]:
    sessions = list(sessions)
    pending = [s.segment_id for s in sessions if not s.is_finalized]
    if pending:
        raise UnfinalizedSession(f"unfinalized segment session(s): {', '.join(sorted(pending))}")
    return sessions


def editing_time_report(
    sessions: Iterable[SegmentSession],
    by_translator: bool = False,
    idle_threshold_ms: int = DEFAULT_IDLE_THRESHOLD_MS,
) -> dict:
    """Total active editing minutes per condition (optionally per
    translator within each condition), rounded half-up to 2 decimals."""
    sessions = _require_finalized(sessions)
    totals: dict = {}
    for s in sessions:
        ms = s.active_ms(idle_threshold_ms)
        if by_translator:
            group = totals.setdefault(s.condition_label, {})
            group[s.translator_id] = group.get(s.translator_id, 0) + ms
        else:
            totals[s.condition_label] = totals.get(s.condition_label, 0) + ms
    if by_translator:
        return {
            cond: {t: round_half_up(ms / 60_000.0, 2) for t, ms in group.items()}
            for cond, group in totals.items()
        }
    return {cond: round_half_up(ms / 60_000.0, 2) for cond, ms in totals.items()}


@dataclass(frozen=True)
class HterCell:
    edits: int
    ref_tokens: int

    @property
    def percent(self) -> float:
        return 100.0 * self.edits / self.ref_tokens if self.ref_tokens else 0.0


def _session_ter_pair(
    session: SegmentSession,
    reference_texts: Mapping[str, str] | None,
    tokenizer: TokenizerConfig,
) -> tuple[list[str], list[str]]:
    """(hypothesis tokens, reference tokens) for one session's HTER cell.

    Post-editing compares raw MT against the post-edited result; from-scratch
    output is compared against the registered reference translation.
    """
    if session.condition_label == HT_LABEL:
        if reference_texts is None or session.segment_id not in reference_texts:
            raise MissingReference(
                f"no reference translation registered for segment {session.segment_id}"
            )
        return (
            tokenize(session.final_text, tokenizer),
            tokenize(reference_texts[session.segment_id], tokenizer),
        )
    return (
        tokenize(session.initial_text, tokenizer),
        tokenize(session.final_text, tokenizer),
    )


def hter_report(
    sessions: Iterable[SegmentSession],
    reference_texts: Mapping[str, str] | None = None,
    tokenizer: TokenizerConfig = DEFAULT_TOKENIZER,
    ter_config: TERConfig = DEFAULT_TER,
) -> dict[str, dict[str, HterCell]]:
    """HTER matrix keyed by condition then translator, with a "doc" column
    per condition aggregating all translators as a ratio of sums."""
    sessions = _require_finalized(sessions)
    cells: dict[str, dict[str, HterCell]] = {}
    for s in sessions:
        hyp, ref = _session_ter_pair(s, reference_texts, tokenizer)
        if not ref:
            edits, ref_len = len(hyp), 0
        else:
            result = ter(hyp, ref, ter_config)
            edits, ref_len = result.total_edits, result.ref_length
        row = cells.setdefault(s.condition_label, {})
        for key in (s.translator_id, "doc"):
            prev = row.get(key, HterCell(0, 0))
            row[key] = HterCell(prev.edits + edits, prev.ref_tokens + ref_len)
    return cells


def quality_time_ratio(scores: QualityScores, minutes: float) -> float:
    """Mean of the quality metrics (COMET rescaled to a percentage) divided
    by total editing minutes, rounded half-up to 3 decimals."""
    if minutes <= 0:
        raise ZeroTime("editing time must be positive")
    values = [scores.bleu, scores.chrf]
    if scores.comet is not None:
        values.append(scores.comet * 100.0)
    return round_half_up(sum(values) / len(values) / minutes, 3)


def creativity_score(cs_ratio_value: float, comet: float) -> float:
    """Creative-shift ratio scaled by translation quality, as a percentage:
    ratio x COMET x 100. Rewards novelty in proportion to acceptability."""
    if cs_ratio_value < 0:
        raise ValueError("creative-shift ratio cannot be negative")
    if not 0.0 <= comet <= 1.0:
        raise ValueError(f"comet out of range: {comet}")
    return cs_ratio_value * comet * 100.0


def creativity_score_legacy(
    cs_count: int,
    ucp_count: int,
    error_points: float,
    kudos: float,
    st_word_count: int,
) -> float:
    """Earlier error-based formula this score descends from:
    (shifts/UCPs - (errors - kudos)/source words) x 100."""
    if ucp_count <= 0 or st_word_count <= 0:
        raise ZeroDenominator("ucp_count and st_word_count must be positive")
    return (cs_count / ucp_count - (error_points - kudos) / st_word_count) * 100.0


@dataclass(frozen=True)
class ConditionReport:
    condition: str
    total_editing_minutes: float
    hter_percent: float | None
    bleu: float | None
    chrf: float | None
    comet: float | None
    quality_time_ratio: float | None
    cs_ratio: float | None
    creativity_percent: float | None

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, payload: Mapping) -> "ConditionReport":
        return cls(**payload)


@dataclass(frozen=True)
class ProjectSnapshot:
    """Immutable view of everything the report tables need. Built by the
    store; analytics stays pure."""

    condition_labels: tuple[str, ...]
    sessions: tuple[SegmentSession, ...]
    reference_texts: Mapping[str, str] | None
    external_scores: Mapping[str, Mapping[str, float]]  # condition -> segment -> score
    resolved_annotations: tuple[AnnotationSpan, ...]
    tokenizer: TokenizerConfig = DEFAULT_TOKENIZER
    ter_config: TERConfig = DEFAULT_TER
    idle_threshold_ms: int = DEFAULT_IDLE_THRESHOLD_MS


def condition_quality(
    snapshot: ProjectSnapshot, condition_label: str
) -> QualityScores | None:
    """BLEU/chrF of the condition's final texts against the reference
    translation, plus the mean ingested external score when present."""
    if snapshot.reference_texts is None:
        return None
    sessions = sorted(
        (s for s in snapshot.sessions if s.condition_label == condition_label),
        key=lambda s: s.segment_id,
    )
    pairs = [
        (s.final_text, snapshot.reference_texts[s.segment_id])
        for s in sessions
        if s.segment_id in snapshot.reference_texts
    ]
    if not pairs:
        return None
    hyp_texts = [p[0] for p in pairs]
    ref_texts = [p[1] for p in pairs]
    hyp_tokens = [tokenize(t, snapshot.tokenizer) for t in hyp_texts]
    ref_tokens = [tokenize(t, snapshot.tokenizer) for t in ref_texts]
    comet = None
    scores = snapshot.external_scores.get(condition_label)
    if scores:
        comet = mean_score(scores)
    return QualityScores(
        bleu=bleu_corpus(hyp_tokens, ref_tokens),
        chrf=chrf_corpus(hyp_texts, ref_texts),
        comet=comet,
    )


def build_condition_reports(snapshot: ProjectSnapshot) -> list[ConditionReport]:
    """One report row per condition, consistent with the individual table
    operations; recomputation over the same snapshot is idempotent."""
    if not snapshot.sessions:
        return []
    minutes = editing_time_report(snapshot.sessions, idle_threshold_ms=snapshot.idle_threshold_ms)
    hter = hter_report(
        snapshot.sessions, snapshot.reference_texts, snapshot.tokenizer, snapshot.ter_config
    )
    reports = []
    for label in snapshot.condition_labels:
        total_minutes = minutes.get(label, 0.0)
        cell = hter.get(label, {}).get("doc")
        quality = condition_quality(snapshot, label)
        ratio = None
        if quality is not None and total_minutes > 0:
            ratio = quality_time_ratio(quality, total_minutes)
        shifts_ratio = None
        creativity = None
        if snapshot.resolved_annotations:
            try:
                shifts_ratio = cs_ratio(snapshot.resolved_annotations, label)
            except Exception:
                shifts_ratio = None
            if shifts_ratio is not None and quality is not None and quality.comet is not None:
                creativity = creativity_score(shifts_ratio, quality.comet)
        reports.append(
            ConditionReport(
                condition=label,
                total_editing_minutes=total_minutes,
                hter_percent=cell.percent if cell else None,
                bleu=quality.bleu if quality else None,
                chrf=quality.chrf if quality else None,
                comet=quality.comet if quality else None,
                quality_time_ratio=ratio,
                cs_ratio=shifts_ratio,
                creativity_percent=creativity,
            )
        )
    return reports


def render_table(headers: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    """Aligned plain-text table."""
    cells = [[str(h) for h in headers]] + [[str(c) for c in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = []
    for r, row in enumerate(cells):
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        if r == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def table_to_csv(headers: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(headers)
    writer.writerows(rows)
    return buf.getvalue()


def reports_to_json(reports: Sequence[ConditionReport]) -> str:
    return json.dumps([r.to_json() for r in reports], ensure_ascii=False, sort_keys=True, indent=2)


def reports_from_json(text: str) -> list[ConditionReport]:
    return [ConditionReport.from_json(item) for item in json.loads(text)]
