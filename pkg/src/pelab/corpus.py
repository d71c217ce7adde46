"""Source-text ingestion: normalization, sentence segmentation, tokenization,
and partitioning into word-balanced contiguous chunks."""

from __future__ import annotations

import json
import unicodedata
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field


class EmptyDocument(ValueError):
    """Raised when the ingested text contains no content."""


class InfeasibleBalance(ValueError):
    """Raised when no contiguous chunking meets the balance tolerance."""


TOKENIZER_SCHEMES = ("whitespace", "punct")

DEFAULT_BALANCE_TOLERANCE = 0.15


@dataclass(frozen=True)
class TokenizerConfig:
    """Tokenization scheme. "whitespace" splits on whitespace runs only;
    "punct" (default) additionally detaches unicode punctuation characters
    as single-character tokens. Case is always preserved."""

    scheme: str = "punct"

    def __post_init__(self) -> None:
        if self.scheme not in TOKENIZER_SCHEMES:
            raise ValueError(f"unknown tokenizer scheme {self.scheme!r}")


DEFAULT_TOKENIZER = TokenizerConfig()


def normalize_text(text: str) -> str:
    """NFC-normalize and collapse whitespace runs to single spaces."""
    return " ".join(unicodedata.normalize("NFC", text).split())


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize_with_offsets(
    text: str, config: TokenizerConfig = DEFAULT_TOKENIZER
) -> list[tuple[str, int, int]]:
    """Tokenize, returning (token, start, end) character offsets into `text`.

    Offsets are unicode scalar indices, half-open. Deterministic; never
    produces empty tokens; tokens appear in text order.
    """
    out: list[tuple[str, int, int]] = []
    i, n = 0, len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        if config.scheme == "punct" and _is_punct(text[i]):
            out.append((text[i], i, i + 1))
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace():
            if config.scheme == "punct" and _is_punct(text[j]):
                break
            j += 1
        out.append((text[i:j], i, j))
        i = j
    return out


def tokenize(text: str, config: TokenizerConfig = DEFAULT_TOKENIZER) -> list[str]:
    """Tokenize `text` into a list of non-empty tokens ("" gives [])."""
    return [tok for tok, _, _ in tokenize_with_offsets(text, config)]


@dataclass(frozen=True)
class Segment:
    id: str
    index: int
    text: str
    word_count: int


@dataclass(frozen=True)
class SourceDocument:
    id: str
    title: str
    language: str
    segments: tuple[Segment, ...]

    def __post_init__(self) -> None:
        ids = [s.id for s in self.segments]
        if len(set(ids)) != len(ids):
            raise ValueError("segment ids must be unique within a document")
        for pos, seg in enumerate(self.segments):
            if seg.index != pos:
                raise ValueError(f"segment {seg.id} has index {seg.index}, expected {pos}")

    def segment_by_id(self, segment_id: str) -> Segment:
        for seg in self.segments:
            if seg.id == segment_id:
                return seg
        raise KeyError(segment_id)

    @property
    def word_count(self) -> int:
        return sum(s.word_count for s in self.segments)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "language": self.language,
            "segments": [
                {"id": s.id, "index": s.index, "text": s.text, "word_count": s.word_count}
                for s in self.segments
            ],
        }

    @classmethod
    def from_json(cls, payload: dict) -> "SourceDocument":
        segs = tuple(
            Segment(id=s["id"], index=s["index"], text=s["text"], word_count=s["word_count"])
            for s in payload["segments"]
        )
        return cls(
            id=payload["id"],
            title=payload.get("title", ""),
            language=payload.get("language", "und"),
            segments=segs,
        )


@dataclass(frozen=True)
class SegmentationConfig:
    """Sentence splitting rules. Terminators end a sentence when followed by
    whitespace (closing quotes/brackets stay attached); a '.' preceded by a
    configured abbreviation never splits. Paragraph breaks (blank lines)
    always split and are never merged across."""

    terminators: str = ".!?…"
    closers: str = "\"')]}»”’"
    abbreviations: frozenset[str] = field(default_factory=frozenset)


DEFAULT_SEGMENTATION = SegmentationConfig()


def _split_sentences(paragraph: str, rules: SegmentationConfig) -> list[str]:
    sentences: list[str] = []
    start = 0
    i = 0
    n = len(paragraph)
    while i < n:
        ch = paragraph[i]
        if ch in rules.terminators:
            j = i + 1
            while j < n and paragraph[j] in rules.closers:
                j += 1
            at_break = j >= n or paragraph[j].isspace()
            if at_break and ch == ".":
                # Word ending at this period, including the period itself.
                w = i
                while w > start and not paragraph[w - 1].isspace():
                    w -= 1
                if paragraph[w : i + 1] in rules.abbreviations:
                    i += 1
                    continue
            if at_break:
                sent = paragraph[start:j].strip()
                if sent:
                    sentences.append(sent)
                start = j
                i = j
                continue
        i += 1
    tail = paragraph[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def segment_document(
    raw: str,
    *,
    doc_id: str = "doc",
    title: str = "",
    language: str = "und",
    rules: SegmentationConfig = DEFAULT_SEGMENTATION,
    tokenizer: TokenizerConfig = DEFAULT_TOKENIZER,
) -> SourceDocument:
    """Split raw text into sentence segments, paragraph boundaries respected.

    Text is NFC-normalized and whitespace-collapsed; joining the resulting
    segment texts with spaces reproduces the normalized input.
    """
    if not raw.strip():
        raise EmptyDocument("document text is empty or whitespace-only")
    normalized = unicodedata.normalize("NFC", raw)
    paragraphs = [p for p in _split_paragraphs(normalized) if p.strip()]
    texts: list[str] = []
    for para in paragraphs:
        texts.extend(_split_sentences(" ".join(para.split()), rules))
    segments = tuple(
        Segment(id=f"s{i:04d}", index=i, text=t, word_count=len(tokenize(t, tokenizer)))
        for i, t in enumerate(texts)
    )
    return SourceDocument(id=doc_id, title=title, language=language, segments=segments)


def _split_paragraphs(text: str) -> list[str]:
    parts: list[str] = []
    current: list[str] = []
    for line in text.splitlines():
        if line.strip():
            current.append(line)
        elif current:
            parts.append("\n".join(current))
            current = []
    if current:
        parts.append("\n".join(current))
    return parts


def document_from_payload(
    payload: dict,
    *,
    doc_id: str = "doc",
    rules: SegmentationConfig = DEFAULT_SEGMENTATION,
    tokenizer: TokenizerConfig = DEFAULT_TOKENIZER,
) -> SourceDocument:
    """Build a document from a JSON object: either {title, language, text}
    (segmented here) or {title, language, segments: [...]} with segments
    given as strings or {id?, text} objects."""
    title = payload.get("title", "")
    language = payload.get("language", "und")
    if "segments" in payload:
        segs: list[Segment] = []
        for i, item in enumerate(payload["segments"]):
            if isinstance(item, str):
                sid, text = f"s{i:04d}", item
            else:
                sid, text = item.get("id", f"s{i:04d}"), item["text"]
            text = normalize_text(text)
            if not text:
                raise EmptyDocument(f"segment {sid} is empty after normalization")
            segs.append(Segment(id=sid, index=i, text=text, word_count=len(tokenize(text, tokenizer))))
        if not segs:
            raise EmptyDocument("no segments in payload")
        return SourceDocument(id=doc_id, title=title, language=language, segments=tuple(segs))
    return segment_document(
        payload["text"], doc_id=doc_id, title=title, language=language,
        rules=rules, tokenizer=tokenizer,
    )


def load_document(path: str) -> SourceDocument:
    """Read a document from a UTF-8 plain-text or JSON file."""
    with open(path, encoding="utf-8") as fh:
        content = fh.read()
    stripped = content.lstrip()
    if stripped.startswith("{"):
        return document_from_payload(json.loads(content))
    return segment_document(content)


@dataclass(frozen=True)
class Chunk:
    id: str
    start: int  # first segment index, inclusive
    stop: int  # past-the-end segment index
    word_count: int

    @property
    def segment_range(self) -> range:
        return range(self.start, self.stop)


def chunk_document(
    doc: SourceDocument,
    n_chunks: int,
    tolerance: float = DEFAULT_BALANCE_TOLERANCE,
) -> list[Chunk]:
    """Partition the document's segments into `n_chunks` contiguous chunks
    whose word counts differ pairwise by at most tolerance * mean.

    Searches contiguous partitions exactly; raises InfeasibleBalance when no
    partition satisfies the tolerance.
    """
    counts = [s.word_count for s in doc.segments]
    n_segments = len(counts)
    if n_chunks < 1:
        raise ValueError("n_chunks must be positive")
    if n_chunks > n_segments:
        raise ValueError(f"n_chunks={n_chunks} exceeds segment count {n_segments}")
    bounds = _balanced_partition(counts, n_chunks, tolerance)
    if bounds is None:
        raise InfeasibleBalance(
            f"no contiguous {n_chunks}-way partition within tolerance {tolerance}"
        )
    chunks = []
    for k in range(n_chunks):
        start, stop = bounds[k], bounds[k + 1]
        chunks.append(
            Chunk(id=f"c{k:02d}", start=start, stop=stop, word_count=sum(counts[start:stop]))
        )
    return chunks


def _balanced_partition(counts: list[int], n: int, tolerance: float) -> list[int] | None:
    """Exact search for a contiguous n-partition with spread <= tolerance*mean.

    Any partition meeting the tolerance has its minimum chunk sum inside
    [mean*(1-tolerance), mean], and that minimum is a contiguous-run sum; so
    sweeping windows [lo, lo + tolerance*mean] over those candidate sums and
    testing reachability is complete. Returns the boundary list of the
    feasible partition with the smallest spread, or None.
    """
    s = len(counts)
    prefix = [0] * (s + 1)
    for i, c in enumerate(counts):
        prefix[i + 1] = prefix[i] + c
    total = prefix[s]
    mean = total / n
    width = tolerance * mean
    eps = 1e-9 * max(1.0, mean)
    if n == 1:
        return [0, s]

    lo_min = mean - width - eps
    candidates: set[int] = set()
    for i in range(s):
        for j in range(i + 1, s + 1):
            run = prefix[j] - prefix[i]
            if run > mean + eps:
                break
            if run >= lo_min:
                candidates.add(run)

    best: tuple[float, list[int]] | None = None
    for lo in sorted(candidates, reverse=True):
        bounds = _reach_partition(prefix, n, lo - eps, lo + width + eps)
        if bounds is None:
            continue
        sums = [prefix[bounds[k + 1]] - prefix[bounds[k]] for k in range(n)]
        spread = max(sums) - min(sums)
        if spread <= width + eps and (best is None or spread < best[0]):
            best = (spread, bounds)
            if spread == 0:
                break
    return best[1] if best else None


def _reach_partition(prefix: list[int], n: int, lo: float, hi: float) -> list[int] | None:
    """Find boundaries splitting into n contiguous runs with sums in [lo, hi],
    each run non-empty, or None. Prefix sums are strictly increasing."""
    s = len(prefix) - 1
    reachable = [bytearray(s + 1) for _ in range(n + 1)]
    reachable[0][0] = 1
    # counts[k][i] = number of reachable j <= i at level k, for range queries
    for k in range(1, n + 1):
        running = [0] * (s + 2)
        for i in range(s + 1):
            running[i + 1] = running[i] + reachable[k - 1][i]
        for i in range(1, s + 1):
            j_lo = bisect_left(prefix, prefix[i] - hi, 0, i)
            j_hi = bisect_right(prefix, prefix[i] - lo, 0, i) - 1
            if j_lo <= j_hi and running[j_hi + 1] - running[j_lo] > 0:
                reachable[k][i] = 1
    if not reachable[n][s]:
        return None
    bounds = [s]
    i = s
    for k in range(n, 0, -1):
        j_lo = bisect_left(prefix, prefix[i] - hi, 0, i)
        j_hi = bisect_right(prefix, prefix[i] - lo, 0, i) - 1
        for j in range(j_lo, j_hi + 1):
            if reachable[k - 1][j]:
                bounds.append(j)
                i = j
                break
    bounds.reverse()
    return bounds
