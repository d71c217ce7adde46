"""Span annotation for creativity studies: units of creative potential on
the source, typed creative shifts on the targets, and inter-annotator
agreement (Cohen's kappa over token in/out labels and over matched-span
types)."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

UCP_LAYER = "ucp"
SHIFT_LAYER = "creative_shift"
LAYERS = (UCP_LAYER, SHIFT_LAYER)

# Annotator id reserved for the adjudicated layer produced after the
# annotators resolve disagreements; analytics reads this layer.
RESOLVED_ANNOTATOR = "resolved"

DEFAULT_IOU_THRESHOLD = 0.5


class OutOfBounds(ValueError):
    """Span offsets fall outside the annotated text, or the span is empty."""


class UnknownType(ValueError):
    """Creative shifts need a shift type from the configured taxonomy."""


class DegenerateMarginals(ValueError):
    """Kappa is undefined when expected agreement is 1."""


class NoMatchedPairs(ValueError):
    """No span pairs met the IoU threshold."""


class NoUCPs(ValueError):
    """The creative-shift ratio needs at least one UCP in scope."""


@dataclass(frozen=True)
class AnnotationSpan:
    """Half-open character span. UCP spans sit on source segments and carry
    no type or condition; creative shifts sit on a target text, identified
    by (segment_id, condition_label), and carry a taxonomy type."""

    layer: str
    segment_id: str
    start: int
    end: int
    annotator_id: str
    shift_type: str | None = None
    condition_label: str | None = None

    def __post_init__(self) -> None:
        if self.layer not in LAYERS:
            raise ValueError(f"unknown layer {self.layer!r}")
        if self.start < 0 or self.end <= self.start:
            raise OutOfBounds(f"empty or negative span [{self.start}, {self.end})")
        if self.layer == UCP_LAYER and self.shift_type is not None:
            raise ValueError("UCP spans carry no shift type")

    @property
    def range(self) -> tuple[int, int]:
        return (self.start, self.end)

    def to_json(self) -> dict:
        payload: dict = {
            "layer": self.layer,
            "segment_id": self.segment_id,
            "start": self.start,
            "end": self.end,
            "annotator_id": self.annotator_id,
        }
        if self.shift_type is not None:
            payload["shift_type"] = self.shift_type
        if self.condition_label is not None:
            payload["condition"] = self.condition_label
        return payload

    @classmethod
    def from_json(cls, payload: Mapping) -> "AnnotationSpan":
        return cls(
            layer=payload["layer"],
            segment_id=payload["segment_id"],
            start=payload["start"],
            end=payload["end"],
            annotator_id=payload["annotator_id"],
            shift_type=payload.get("shift_type"),
            condition_label=payload.get("condition"),
        )


class AnnotationStore:
    """In-memory span store with taxonomy and bounds validation.

    `text_length` resolves (layer, segment_id, condition_label) to the
    annotated text's length, or None when unknown (bounds then unchecked).
    Overlapping same-annotator same-layer spans are allowed but flagged.
    """

    def __init__(
        self,
        taxonomy: Iterable[str] = (),
        text_length: Callable[[str, str, str | None], int | None] | None = None,
    ):
        self.taxonomy = frozenset(taxonomy)
        self._text_length = text_length
        self._spans: list[AnnotationSpan] = []
        self._flagged: set[int] = set()

    def add(self, span: AnnotationSpan) -> int:
        """Validate and persist a span; returns its id. The id is the
        position in insertion order."""
        if span.layer == SHIFT_LAYER:
            if span.shift_type is None or (self.taxonomy and span.shift_type not in self.taxonomy):
                raise UnknownType(
                    f"shift type {span.shift_type!r} not in taxonomy"
                )
        if self._text_length is not None:
            length = self._text_length(span.layer, span.segment_id, span.condition_label)
            if length is not None and span.end > length:
                raise OutOfBounds(
                    f"span [{span.start}, {span.end}) exceeds text length {length} "
                    f"for segment {span.segment_id}"
                )
        span_id = len(self._spans)
        for other_id, other in enumerate(self._spans):
            if (
                other.annotator_id == span.annotator_id
                and other.layer == span.layer
                and other.segment_id == span.segment_id
                and other.condition_label == span.condition_label
                and other.start < span.end
                and span.start < other.end
            ):
                self._flagged.add(span_id)
                self._flagged.add(other_id)
        self._spans.append(span)
        return span_id

    def is_flagged(self, span_id: int) -> bool:
        return span_id in self._flagged

    def spans(
        self,
        layer: str | None = None,
        annotator_id: str | None = None,
        condition_label: str | None = None,
    ) -> list[AnnotationSpan]:
        out = []
        for span in self._spans:
            if layer is not None and span.layer != layer:
                continue
            if annotator_id is not None and span.annotator_id != annotator_id:
                continue
            if condition_label is not None and span.condition_label != condition_label:
                continue
            out.append(span)
        return out

    def to_json(self) -> list[dict]:
        return [s.to_json() for s in self._spans]

    def load_json(self, payload: Iterable[Mapping]) -> None:
        for item in payload:
            self.add(AnnotationSpan.from_json(item))


@dataclass(frozen=True)
class KappaResult:
    kappa: float
    observed_agreement: float
    expected_agreement: float
    n_items: int


@dataclass(frozen=True)
class AgreementReport:
    span: KappaResult
    type: KappaResult | None
    matched_pairs: int
    unmatched_a: int
    unmatched_b: int

    @property
    def span_kappa(self) -> float:
        return self.span.kappa

    @property
    def type_kappa(self) -> float | None:
        return self.type.kappa if self.type else None


def cohen_kappa(pairs: Sequence[tuple[object, object]]) -> KappaResult:
    """Cohen's kappa over paired labels: K = (p_o - p_e) / (1 - p_e) with
    chance agreement from the two annotators' marginals."""
    if not pairs:
        raise ValueError("kappa needs at least one labelled pair")
    n = len(pairs)
    observed = sum(1 for a, b in pairs if a == b) / n
    marg_a = Counter(a for a, _ in pairs)
    marg_b = Counter(b for _, b in pairs)
    expected = sum(marg_a[c] * marg_b.get(c, 0) for c in marg_a) / (n * n)
    if expected == 1.0:
        raise DegenerateMarginals(
            "both annotators assigned a single identical class; kappa undefined"
        )
    kappa = (observed - expected) / (1.0 - expected)
    return KappaResult(kappa, observed, expected, n)


def _token_labels(
    spans: Iterable[AnnotationSpan],
    token_offsets: Mapping[str, Sequence[tuple[int, int]]],
) -> set[tuple[str, int]]:
    """Token keys (segment_id, token index) overlapped by any span."""
    marked: set[tuple[str, int]] = set()
    by_segment: dict[str, list[AnnotationSpan]] = {}
    for span in spans:
        by_segment.setdefault(span.segment_id, []).append(span)
    for sid, seg_spans in by_segment.items():
        offsets = token_offsets.get(sid)
        if offsets is None:
            raise KeyError(f"no tokenization provided for segment {sid}")
        for idx, (tok_start, tok_end) in enumerate(offsets):
            if any(s.start < tok_end and tok_start < s.end for s in seg_spans):
                marked.add((sid, idx))
    return marked


def span_agreement(
    a_spans: Sequence[AnnotationSpan],
    b_spans: Sequence[AnnotationSpan],
    token_offsets: Mapping[str, Sequence[tuple[int, int]]],
) -> KappaResult:
    """Kappa over token-level in-span/out-of-span labels.

    `token_offsets` maps every covered segment id to its tokens' character
    ranges; both annotators are evaluated over all tokens of all segments.
    """
    a_marked = _token_labels(a_spans, token_offsets)
    b_marked = _token_labels(b_spans, token_offsets)
    pairs: list[tuple[bool, bool]] = []
    for sid, offsets in token_offsets.items():
        for idx in range(len(offsets)):
            key = (sid, idx)
            pairs.append((key in a_marked, key in b_marked))
    return cohen_kappa(pairs)


def span_agreement_kappa(
    a_spans: Sequence[AnnotationSpan],
    b_spans: Sequence[AnnotationSpan],
    token_offsets: Mapping[str, Sequence[tuple[int, int]]],
) -> float:
    return span_agreement(a_spans, b_spans, token_offsets).kappa


def interval_iou(a: tuple[int, int], b: tuple[int, int]) -> float:
    inter = min(a[1], b[1]) - max(a[0], b[0])
    if inter <= 0:
        return 0.0
    union = (a[1] - a[0]) + (b[1] - b[0]) - inter
    return inter / union


def match_spans(
    a_spans: Sequence[AnnotationSpan],
    b_spans: Sequence[AnnotationSpan],
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
) -> list[tuple[AnnotationSpan, AnnotationSpan]]:
    """Greedy one-to-one matching by descending interval IoU, restricted to
    spans on the same (segment, condition) text; pairs below the threshold
    never match. Ties order by the unordered pair of ranges, which keeps the
    matching stable under swapping the annotators."""
    candidates = []
    for i, a in enumerate(a_spans):
        for j, b in enumerate(b_spans):
            if a.segment_id != b.segment_id or a.condition_label != b.condition_label:
                continue
            iou = interval_iou(a.range, b.range)
            if iou >= iou_threshold and iou > 0.0:
                tie = (min(a.range, b.range), max(a.range, b.range))
                candidates.append((-iou, tie, i, j))
    candidates.sort()
    used_a: set[int] = set()
    used_b: set[int] = set()
    matched = []
    for _, _, i, j in candidates:
        if i in used_a or j in used_b:
            continue
        used_a.add(i)
        used_b.add(j)
        matched.append((a_spans[i], b_spans[j]))
    return matched


def type_agreement(
    a_spans: Sequence[AnnotationSpan],
    b_spans: Sequence[AnnotationSpan],
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
) -> tuple[KappaResult, int, int, int]:
    """Kappa over shift-type labels of IoU-matched span pairs.

    Returns (kappa result, matched pairs, unmatched a, unmatched b);
    unmatched spans are excluded from the kappa but counted.
    """
    matched = match_spans(a_spans, b_spans, iou_threshold)
    if not matched:
        raise NoMatchedPairs(f"no span pairs with IoU >= {iou_threshold}")
    pairs = [(a.shift_type, b.shift_type) for a, b in matched]
    result = cohen_kappa(pairs)
    return result, len(matched), len(a_spans) - len(matched), len(b_spans) - len(matched)


def type_agreement_kappa(
    a_spans: Sequence[AnnotationSpan],
    b_spans: Sequence[AnnotationSpan],
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
) -> float:
    return type_agreement(a_spans, b_spans, iou_threshold)[0].kappa


def agreement_report(
    a_spans: Sequence[AnnotationSpan],
    b_spans: Sequence[AnnotationSpan],
    token_offsets: Mapping[str, Sequence[tuple[int, int]]],
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
) -> AgreementReport:
    span_result = span_agreement(a_spans, b_spans, token_offsets)
    try:
        type_result, matched, un_a, un_b = type_agreement(a_spans, b_spans, iou_threshold)
    except NoMatchedPairs:
        type_result, matched, un_a, un_b = None, 0, len(a_spans), len(b_spans)
    except DegenerateMarginals:
        # matched pairs exist but carry a single shared label (e.g. untyped
        # layers); the type kappa is undefined rather than 1.0
        matched_pairs = match_spans(a_spans, b_spans, iou_threshold)
        type_result = None
        matched = len(matched_pairs)
        un_a = len(a_spans) - matched
        un_b = len(b_spans) - matched
    return AgreementReport(
        span=span_result,
        type=type_result,
        matched_pairs=matched,
        unmatched_a=un_a,
        unmatched_b=un_b,
    )


def cs_ratio(
    spans: Iterable[AnnotationSpan],
    condition_label: str | None = None,
) -> float:
    """Creative shifts per unit of creative potential.

    UCPs live on the source and are shared by every condition; shifts are
    filtered to `condition_label` when given. Ratios aggregate as a ratio
    of sums, never a mean of per-chunk ratios.
    """
    ucp_count = 0
    shift_count = 0
    for span in spans:
        if span.layer == UCP_LAYER:
            ucp_count += 1
        elif span.layer == SHIFT_LAYER:
            if condition_label is None or span.condition_label == condition_label:
                shift_count += 1
    if ucp_count == 0:
        raise NoUCPs("no units of creative potential in scope")
    return shift_count / ucp_count
