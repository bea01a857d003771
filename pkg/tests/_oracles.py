"""Independent brute-force oracles shared by the unit and acceptance tests.

Each oracle recomputes a quantity from its definition (exhaustive
enumeration or dense evaluation) without reusing the package's dynamic
programs, so agreement is evidence rather than tautology.
"""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _alignment_paths(n, m):
    """Every monotone boundary-anchored path through an n x m grid.

    Steps are down, right, and diagonal. Paths are returned as flat cell
    indices grouped by path length so cost evaluation can vectorize.
    """
    paths = []

    def walk(i, j, acc):
        if i == n - 1 and j == m - 1:
            paths.append(tuple(acc))
            return
        if i + 1 < n:
            walk(i + 1, j, acc + [(i + 1) * m + j])
        if j + 1 < m:
            walk(i, j + 1, acc + [i * m + (j + 1)])
        if i + 1 < n and j + 1 < m:
            walk(i + 1, j + 1, acc + [(i + 1) * m + (j + 1)])

    walk(0, 0, [0])
    by_len = {}
    for p in paths:
        by_len.setdefault(len(p), []).append(p)
    return {
        length: np.asarray(group, dtype=np.intp)
        for length, group in by_len.items()
    }


def dtw_bruteforce(a, b, squared=False, band=None):
    """DTW by trying every alignment; practical for lengths <= 8."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n, m = len(a), len(b)
    diff = a[:, None] - b[None, :]
    cost = (diff * diff if squared else np.abs(diff)).ravel()
    best = np.inf
    for idx in _alignment_paths(n, m).values():
        if band is not None:
            i = idx // m
            j = idx % m
            feasible = (np.abs(i - j) <= band).all(axis=1)
            if not feasible.any():
                continue
            idx = idx[feasible]
        totals = cost[idx].sum(axis=1)
        best = min(best, float(totals.min()))
    return best


def auroc_pairwise(scores, labels):
    """AUROC as the pairwise ordering statistic with ties counted half."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    greater = (pos[:, None] > neg[None, :]).sum()
    ties = (pos[:, None] == neg[None, :]).sum()
    return (greater + 0.5 * ties) / (len(pos) * len(neg))


def confusion_by_enumeration(gt_peaks, pred_peaks, window, tolerance):
    """Pointwise confusion counts by walking every timestamp in the window."""
    lo, hi = window
    tp = fp = tn = fn = 0
    for t in range(lo, hi):
        actual = any(abs(p - t) <= tolerance for p in gt_peaks)
        predicted = any(abs(p - t) <= tolerance for p in pred_peaks)
        if actual and predicted:
            tp += 1
        elif not actual and predicted:
            fp += 1
        elif actual and not predicted:
            fn += 1
        else:
            tn += 1
    return tp, fp, tn, fn


def pearson_definition(x, y):
    """Correlation straight from the sample-moment definition."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xc = x - x.mean()
    yc = y - y.mean()
    return float((xc * yc).sum() / np.sqrt((xc * xc).sum() * (yc * yc).sum()))
