"""Reference-based MT quality metrics: corpus BLEU, corpus chrF, document
HTER, and ingestion of externally computed segment quality scores."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .ter import DEFAULT_TER, TERConfig, TERResult, ter


class LengthMismatch(ValueError):
    """Hypothesis and reference sequences must be segment-aligned."""


class MissingSegment(ValueError):
    """An expected segment id is absent from a score file."""


class OutOfRangeScore(ValueError):
    """External scores must be fractions in [0, 1]."""


@dataclass(frozen=True)
class BleuConfig:
    max_n: int = 4
    smoothing: bool = False  # add-one on the counts of orders >= 2


@dataclass(frozen=True)
class ChrfConfig:
    char_n: int = 6
    beta: float = 2.0
    ignore_whitespace: bool = True


DEFAULT_BLEU = BleuConfig()
DEFAULT_CHRF = ChrfConfig()


@dataclass(frozen=True)
class QualityScores:
    """bleu and chrf are percentages in [0, 100]; comet is an externally
    supplied fraction in [0, 1], absent when no score file was ingested."""

    bleu: float
    chrf: float
    comet: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.bleu <= 100.0:
            raise ValueError(f"bleu out of range: {self.bleu}")
        if not 0.0 <= self.chrf <= 100.0:
            raise ValueError(f"chrf out of range: {self.chrf}")
        if self.comet is not None and not 0.0 <= self.comet <= 1.0:
            raise ValueError(f"comet out of range: {self.comet}")


def _ngram_counts(tokens: Sequence, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu_corpus(
    hypotheses: Sequence[Sequence[str]],
    references: Sequence[Sequence[str]],
    config: BleuConfig = DEFAULT_BLEU,
) -> float:
    """Corpus BLEU: geometric mean of modified n-gram precisions times the
    brevity penalty, as a percentage.

    Orders with no hypothesis n-grams corpus-wide are excluded from the
    geometric mean. Without smoothing, any zero precision yields 0.0; with
    smoothing, orders >= 2 use add-one counts.
    """
    if len(hypotheses) != len(references):
        raise LengthMismatch(f"{len(hypotheses)} hypotheses vs {len(references)} references")
    hyp_len = sum(len(h) for h in hypotheses)
    ref_len = sum(len(r) for r in references)
    if hyp_len == 0:
        return 0.0

    log_sum = 0.0
    orders = 0
    for n in range(1, config.max_n + 1):
        matched = 0
        total = 0
        for h, r in zip(hypotheses, references):
            if len(h) < n:
                continue
            total += len(h) - n + 1
            hc = _ngram_counts(h, n)
            rc = _ngram_counts(r, n)
            matched += sum(min(c, rc[g]) for g, c in hc.items())
        if config.smoothing and n >= 2:
            matched += 1
            total += 1
        if total == 0:
            continue
        if matched == 0:
            return 0.0
        log_sum += math.log(matched / total)
        orders += 1
    if orders == 0:
        return 0.0
    brevity = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * brevity * math.exp(log_sum / orders)


def chrf_corpus(
    hypotheses: Sequence[str],
    references: Sequence[str],
    config: ChrfConfig = DEFAULT_CHRF,
) -> float:
    """Corpus chrF: F-beta over character n-gram precision and recall, each
    averaged over orders 1..char_n, as a percentage.

    Counts are accumulated corpus-wide per order; orders with no n-grams on
    either side are skipped.
    """
    if len(hypotheses) != len(references):
        raise LengthMismatch(f"{len(hypotheses)} hypotheses vs {len(references)} references")
    if config.ignore_whitespace:
        hyps = ["".join(h.split()) for h in hypotheses]
        refs = ["".join(r.split()) for r in references]
    else:
        hyps = list(hypotheses)
        refs = list(references)

    precisions: list[float] = []
    recalls: list[float] = []
    for n in range(1, config.char_n + 1):
        matched = 0
        hyp_total = 0
        ref_total = 0
        for h, r in zip(hyps, refs):
            hc = _ngram_counts(h, n)
            rc = _ngram_counts(r, n)
            matched += sum(min(c, rc[g]) for g, c in hc.items())
            hyp_total += max(0, len(h) - n + 1)
            ref_total += max(0, len(r) - n + 1)
        if hyp_total == 0 and ref_total == 0:
            continue
        precisions.append(matched / hyp_total if hyp_total else 0.0)
        recalls.append(matched / ref_total if ref_total else 0.0)
    if not precisions:
        return 0.0
    avg_p = sum(precisions) / len(precisions)
    avg_r = sum(recalls) / len(recalls)
    beta_sq = config.beta * config.beta
    denom = beta_sq * avg_p + avg_r
    if denom == 0.0:
        return 0.0
    return 100.0 * (1.0 + beta_sq) * avg_p * avg_r / denom


def ter_segments(
    mt_segments: Sequence[Sequence[str]],
    postedited_segments: Sequence[Sequence[str]],
    config: TERConfig = DEFAULT_TER,
) -> list[TERResult]:
    """Per-segment TER of raw MT against its post-edited version.

    The post-edited text is the reference. A segment post-edited to nothing
    counts its MT tokens as deletions over a zero-length reference.
    """
    if len(mt_segments) != len(postedited_segments):
        raise LengthMismatch(
            f"{len(mt_segments)} MT segments vs {len(postedited_segments)} post-edited"
        )
    results = []
    for mt, pe in zip(mt_segments, postedited_segments):
        if len(pe) == 0:
            results.append(TERResult(0, len(mt), 0, 0, 0, 0.0 if len(mt) == 0 else math.inf))
        else:
            results.append(ter(mt, pe, config))
    return results


def hter_document(
    mt_segments: Sequence[Sequence[str]],
    postedited_segments: Sequence[Sequence[str]],
    config: TERConfig = DEFAULT_TER,
) -> float:
    """Document HTER as a percentage: ratio of summed segment edits to summed
    post-edited token counts (ratio of sums, not mean of ratios)."""
    results = ter_segments(mt_segments, postedited_segments, config)
    total_edits = sum(r.total_edits for r in results)
    total_ref = sum(r.ref_length for r in results)
    if total_ref == 0:
        raise LengthMismatch("post-edited reference side has no tokens")
    return 100.0 * total_edits / total_ref


def ingest_external_scores(
    source: str | os.PathLike | Iterable[Mapping] | Mapping[str, float],
    expected_segments: Sequence[str],
) -> dict[str, float]:
    """Load (segment_id, score) rows from a CSV/JSON file, raw text, a
    parsed JSON array, or a plain mapping; return a complete id -> score
    map over `expected_segments`.

    Scores must lie in [0, 1]; extra segment ids are ignored.
    """
    rows = _score_rows(source)
    table: dict[str, float] = {}
    for sid, raw in rows:
        score = float(raw)
        if not 0.0 <= score <= 1.0:
            raise OutOfRangeScore(f"segment {sid}: score {score} outside [0, 1]")
        table[str(sid)] = score
    missing = [sid for sid in expected_segments if sid not in table]
    if missing:
        raise MissingSegment(f"score file lacks segment(s): {', '.join(missing)}")
    return {sid: table[sid] for sid in expected_segments}


def _score_rows(source) -> list[tuple[str, float]]:
    if isinstance(source, Mapping):
        return list(source.items())
    if isinstance(source, (str, os.PathLike)):
        text = source
        if isinstance(source, os.PathLike) or os.path.exists(source):
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        return _parse_score_text(str(text))
    return [(row["segment_id"], row["score"]) for row in source]


def _parse_score_text(text: str) -> list[tuple[str, float]]:
    stripped = text.lstrip()
    if stripped.startswith("["):
        return [(row["segment_id"], row["score"]) for row in json.loads(stripped)]
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or "segment_id" not in reader.fieldnames:
        raise ValueError("score CSV must have a 'segment_id,score' header")
    return [(row["segment_id"], float(row["score"])) for row in reader]


def mean_score(scores: Mapping[str, float]) -> float:
    """Document-level external score: arithmetic mean over segments."""
    if not scores:
        raise ValueError("cannot average an empty score map")
    return sum(scores.values()) / len(scores)
