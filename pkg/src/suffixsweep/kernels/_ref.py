"""Pure-Python reference implementations of the hot kernels.

Used as the fallback when the compiled extension is unavailable, and as the
ground truth in the kernel parity tests and benchmarks.
"""

# Sentinel standing in for a missing end timestamp: an instance that never
# ended is active at every evaluation time.
OPEN_END = 2**62


def osa_distance(a, b):
    """Edit distance with insertions, deletions, substitutions and adjacent
    transpositions, in the optimal-string-alignment variant (a transposed
    pair is never edited again).

    ``a`` and ``b`` are sequences of integers.
    """
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    # three rolling rows: i-2, i-1 and current
    prev2 = None
    prev = list(range(lb + 1))
    for i in range(1, la + 1):
        cur = [i] + [0] * lb
        ai = a[i - 1]
        for j in range(1, lb + 1):
            cost = 0 if ai == b[j - 1] else 1
            best = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
            if i > 1 and j > 1 and ai == b[j - 2] and a[i - 2] == b[j - 1]:
                best = min(best, prev2[j - 2] + 1)
            cur[j] = best
        prev2, prev = prev, cur
    return prev[lb]


def count_active(starts, ends, t):
    """Number of intervals with start <= t <= end.

    ``ends`` uses OPEN_END for instances without an end timestamp.
    """
    n = 0
    for s, e in zip(starts, ends):
        if s <= t <= e:
            n += 1
    return n
