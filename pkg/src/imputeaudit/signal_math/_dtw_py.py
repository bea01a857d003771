"""Pure Python DTW dynamic program, the fallback for the compiled kernel.

Kept line-equivalent to _dtw_kernel.pyx: same recurrence, same band
handling, same return value. Selection between the two happens in the
package __init__ at import time.
"""

from __future__ import annotations

_INF = float("inf")


def dtw(a, b, squared: bool, band: int) -> float:
    """Cost of the best monotone alignment between sequences a and b.

    band < 0 means unbanded; otherwise cells with |i - j| > band are
    unreachable. The caller guarantees non-empty inputs and a feasible
    band, so the final cell is always reachable.
    """
    a = [float(v) for v in a]
    b = [float(v) for v in b]
    n = len(a)
    m = len(b)
    prev = [_INF] * m
    for i in range(n):
        if band < 0:
            lo, hi = 0, m - 1
        else:
            lo = i - band if i - band > 0 else 0
            hi = i + band if i + band < m - 1 else m - 1
        curr = [_INF] * m
        ai = a[i]
        for j in range(lo, hi + 1):
            d = ai - b[j]
            d = d * d if squared else (d if d >= 0.0 else -d)
            if i == 0 and j == 0:
                best = 0.0
            elif i == 0:
                best = curr[j - 1]
            elif j == 0:
                best = prev[0]
            else:
                best = prev[j]
                if curr[j - 1] < best:
                    best = curr[j - 1]
                if prev[j - 1] < best:
                    best = prev[j - 1]
            curr[j] = d + best
        prev = curr
    return prev[m - 1]
