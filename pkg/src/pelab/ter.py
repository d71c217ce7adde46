"""Word-level translation edit rate with greedy phrase-shift search.

Edits transform the hypothesis into the reference: deletions remove
hypothesis tokens, insertions add reference tokens, substitutions replace
one token with another. A shift moves a contiguous hypothesis block that
exactly matches a reference subsequence and counts as a single edit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

Token = Hashable


class EmptyReference(ValueError):
    """TER is undefined for an empty reference."""


@dataclass(frozen=True)
class TERConfig:
    shifts_enabled: bool = True
    max_shift_size: int = 10
    max_shift_distance: int = 50
    case_sensitive: bool = False


DEFAULT_TER = TERConfig()


@dataclass(frozen=True)
class TERResult:
    insertions: int
    deletions: int
    substitutions: int
    shifts: int
    ref_length: int
    score: float

    @property
    def total_edits(self) -> int:
        return self.insertions + self.deletions + self.substitutions + self.shifts


def levenshtein(a: Sequence[Token], b: Sequence[Token]) -> int:
    """Plain word-level edit distance (insert/delete/substitute, unit costs)."""
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    row = list(range(lb + 1))
    for i in range(la):
        ai = a[i]
        prev = row[0]
        row[0] = i + 1
        for j in range(lb):
            cur = row[j + 1]
            if ai == b[j]:
                best = prev
            else:
                best = prev + 1
                up = cur + 1
                if up < best:
                    best = up
                left = row[j] + 1
                if left < best:
                    best = left
            row[j + 1] = best
            prev = cur
    return row[lb]


def _edit_breakdown(a: Sequence[Token], b: Sequence[Token]) -> tuple[int, int, int]:
    """(insertions, deletions, substitutions) of a minimal a -> b alignment.

    Ties in the DP are broken deterministically: match/substitute, then
    delete, then insert.
    """
    la, lb = len(a), len(b)
    dp = [[0] * (lb + 1) for _ in range(la + 1)]
    for i in range(la + 1):
        dp[i][0] = i
    for j in range(lb + 1):
        dp[0][j] = j
    for i in range(1, la + 1):
        ai = a[i - 1]
        row = dp[i]
        above = dp[i - 1]
        for j in range(1, lb + 1):
            diag = above[j - 1] + (0 if ai == b[j - 1] else 1)
            up = above[j] + 1
            left = row[j - 1] + 1
            row[j] = min(diag, up, left)
    ins = dels = subs = 0
    i, j = la, lb
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            cost = 0 if a[i - 1] == b[j - 1] else 1
            if dp[i][j] == dp[i - 1][j - 1] + cost:
                subs += cost
                i -= 1
                j -= 1
                continue
        if i > 0 and dp[i][j] == dp[i - 1][j] + 1:
            dels += 1
            i -= 1
            continue
        ins += 1
        j -= 1
    return ins, dels, subs


def _fold_case(tokens: Sequence[Token]) -> tuple[Token, ...]:
    return tuple(t.lower() if isinstance(t, str) else t for t in tokens)


def _best_shift(
    hyp: tuple[Token, ...],
    ref: tuple[Token, ...],
    base_distance: int,
    config: TERConfig,
) -> tuple[int, tuple[Token, ...]] | None:
    """Find the shift that maximally reduces levenshtein(hyp, ref).

    A candidate moves block hyp[i:i+size] (which must equal ref[j:j+size])
    to insertion point j, with size <= max_shift_size and |i - j| <=
    max_shift_distance. Ties on reduction prefer the smallest
    (source index, block size, insertion point). Returns (reduction,
    shifted hypothesis) or None when nothing reduces the distance.
    """
    lh, lr = len(hyp), len(ref)
    ref_positions: dict[Token, list[int]] = {}
    for j, tok in enumerate(ref):
        ref_positions.setdefault(tok, []).append(j)

    best_red = 0
    best_key: tuple[int, int, int] | None = None
    best_hyp: tuple[Token, ...] | None = None
    max_size = config.max_shift_size
    max_dist = config.max_shift_distance
    for i in range(lh):
        starts = ref_positions.get(hyp[i])
        if not starts:
            continue
        for j in starts:
            if j == i or abs(i - j) > max_dist:
                continue
            size = 1
            while (
                size < max_size
                and i + size < lh
                and j + size < lr
                and hyp[i + size] == ref[j + size]
            ):
                size += 1
            for block in range(1, size + 1):
                removed = hyp[:i] + hyp[i + block :]
                shifted = removed[:j] + hyp[i : i + block] + removed[j:]
                if shifted == hyp:
                    continue
                red = base_distance - levenshtein(shifted, ref)
                if red < 1 or red < best_red:
                    continue
                key = (i, block, j)
                if red > best_red or (best_key is not None and key < best_key):
                    best_red = red
                    best_key = key
                    best_hyp = shifted
    if best_hyp is None:
        return None
    return best_red, best_hyp


def ter(
    hyp: Sequence[Token],
    ref: Sequence[Token],
    config: TERConfig = DEFAULT_TER,
) -> TERResult:
    """Greedy shift-then-edit TER.

    Repeatedly applies the distance-reducing shift found by `_best_shift`
    (cost 1 each) until none reduces the remaining edit distance, then
    scores the final alignment: (shifts + insertions + deletions +
    substitutions) / reference length.
    """
    if len(ref) == 0:
        raise EmptyReference("reference must contain at least one token")
    h = tuple(hyp) if config.case_sensitive else _fold_case(hyp)
    r = tuple(ref) if config.case_sensitive else _fold_case(ref)
    if h == r:
        return TERResult(0, 0, 0, 0, len(r), 0.0)

    shifts = 0
    if config.shifts_enabled:
        distance = levenshtein(h, r)
        while distance > 0:
            found = _best_shift(h, r, distance, config)
            if found is None:
                break
            red, h = found
            distance -= red
            shifts += 1

    ins, dels, subs = _edit_breakdown(h, r)
    total = ins + dels + subs + shifts
    return TERResult(
        insertions=ins,
        deletions=dels,
        substitutions=subs,
        shifts=shifts,
        ref_length=len(r),
        score=total / len(r),
    )
