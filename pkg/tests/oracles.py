"""Independent brute-force oracles used by the tests. Each one recomputes
its quantity from first principles, separately from the library code paths
it checks."""

from __future__ import annotations

from pelab.session import EventKind


def levenshtein_oracle(a, b) -> int:
    """Textbook full-matrix edit distance."""
    la, lb = len(a), len(b)
    dp = [[0] * (lb + 1) for _ in range(la + 1)]
    for i in range(la + 1):
        dp[i][0] = i
    for j in range(lb + 1):
        dp[0][j] = j
    for i in range(1, la + 1):
        for j in range(1, lb + 1):
            dp[i][j] = min(
                dp[i - 1][j] + 1,
                dp[i][j - 1] + 1,
                dp[i - 1][j - 1] + (0 if a[i - 1] == b[j - 1] else 1),
            )
    return dp[la][lb]


def shift_successors(hyp: tuple, ref: tuple, max_size: int = 10, max_dist: int = 50):
    """Every hypothesis reachable with one legal block shift: the block must
    equal a reference subsequence, obey the size/distance limits, and the
    move must change the sequence."""
    lh, lr = len(hyp), len(ref)
    out = set()
    for i in range(lh):
        for j in range(lr):
            if i == j or abs(i - j) > max_dist:
                continue
            size = 0
            while (
                size < max_size
                and i + size < lh
                and j + size < lr
                and hyp[i + size] == ref[j + size]
            ):
                size += 1
                block = hyp[i : i + size]
                removed = hyp[:i] + hyp[i + size :]
                shifted = removed[:j] + block + removed[j:]
                if shifted != hyp:
                    out.add(shifted)
    return out


def ter_oracle_total(hyp, ref, max_size: int = 10, max_dist: int = 50) -> int:
    """Minimal (shifts + remaining edit distance) over all shift sequences,
    by breadth-first enumeration with a visited set."""
    start = tuple(hyp)
    ref = tuple(ref)
    best = levenshtein_oracle(start, ref)
    seen = {start}
    frontier = [start]
    depth = 0
    while frontier and depth + 1 < best:
        depth += 1
        nxt = []
        for state in frontier:
            for succ in shift_successors(state, ref, max_size, max_dist):
                if succ in seen:
                    continue
                seen.add(succ)
                total = depth + levenshtein_oracle(succ, ref)
                if total < best:
                    best = total
                nxt.append(succ)
        frontier = nxt
    return best


def replay_oracle(initial: str, events) -> str:
    """Character-list rebuild of the buffer."""
    chars = list(initial)
    for ev in events:
        if ev.kind == EventKind.INSERT:
            chars[ev.position : ev.position] = list(ev.text)
        elif ev.kind == EventKind.DELETE:
            del chars[ev.position : ev.position + ev.length]
    return "".join(chars)


def active_time_oracle(events, threshold_ms: int) -> int:
    """Interval walk that rederives the phase flags from scratch for every
    interval."""
    total = 0
    for k in range(1, len(events)):
        editing = False
        blurred = False
        for ev in events[:k]:
            if ev.kind == EventKind.EDITING_STARTED:
                editing, blurred = True, False
            elif ev.kind == EventKind.FINALIZED:
                editing = False
            elif ev.kind == EventKind.FOCUS_LOST:
                blurred = True
            elif ev.kind == EventKind.FOCUS_GAINED:
                blurred = False
        if editing and not blurred:
            gap = events[k].timestamp_ms - events[k - 1].timestamp_ms
            total += min(gap, threshold_ms)
    return total


def edit_counts_oracle(events):
    inserts = [ev for ev in events if ev.kind == EventKind.INSERT]
    deletes = [ev for ev in events if ev.kind == EventKind.DELETE]
    return (
        len(inserts),
        len(deletes),
        sum(len(ev.text) for ev in inserts),
        sum(ev.length for ev in deletes),
    )


def kappa_oracle(labels_a, labels_b) -> float:
    """Explicit contingency-table Cohen's kappa."""
    assert len(labels_a) == len(labels_b)
    n = len(labels_a)
    classes = sorted(set(labels_a) | set(labels_b), key=repr)
    table = {(x, y): 0 for x in classes for y in classes}
    for a, b in zip(labels_a, labels_b):
        table[(a, b)] += 1
    p_o = sum(table[(c, c)] for c in classes) / n
    p_e = 0.0
    for c in classes:
        row = sum(table[(c, y)] for y in classes) / n
        col = sum(table[(x, c)] for x in classes) / n
        p_e += row * col
    return (p_o - p_e) / (1 - p_e)


def exhaustive_contiguous_partitions(counts, n):
    """All ways to split counts into n contiguous non-empty chunks, as lists
    of per-chunk sums."""
    import itertools

    s = len(counts)
    for cuts in itertools.combinations(range(1, s), n - 1):
        bounds = [0, *cuts, s]
        yield [sum(counts[bounds[i] : bounds[i + 1]]) for i in range(n)]
