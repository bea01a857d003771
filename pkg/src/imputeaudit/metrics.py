"""Evaluation machinery: ROC/AUROC, rank metrics, pointwise peak
confusion, and Pearson correlation with exact, sampled-permutation, and
t-distribution p-values.

Score orientation everywhere: higher score = more member-like. Callers
holding loss ratios pass s = -R.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from itertools import permutations
from math import ceil, inf, isfinite, sqrt
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.special import betainc

from .errors import (
    ConfigError,
    DegenerateInputError,
    DegenerateLabelsError,
    EmptyDatasetError,
    IoError,
    SchemaError,
    ShapeError,
)

EXACT_PERMUTATION_MAX_N = 9
DEFAULT_PERMUTATIONS = 100_000


# ---------------------------------------------------------------------------
# ROC
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RocCurve:
    """Operating points (fpr, tpr) with matching decision thresholds.

    points[0] is always (0, 0) with threshold +inf; points[-1] is always
    (1, 1). A point's threshold t means "predict positive iff score >= t".
    """

    points: Tuple[Tuple[float, float], ...]
    thresholds: Tuple[float, ...]

    def __post_init__(self):
        if len(self.points) != len(self.thresholds):
            raise ShapeError("points and thresholds must align")
        if len(self.points) < 2:
            raise ShapeError("a ROC curve needs at least two points")


def _check_scored(scored) -> Tuple[np.ndarray, np.ndarray]:
    pairs = list(scored)
    if not pairs:
        raise EmptyDatasetError("no scored samples")
    scores = np.empty(len(pairs), dtype=np.float64)
    labels = np.empty(len(pairs), dtype=np.int64)
    for i, (score, label) in enumerate(pairs):
        if label not in (0, 1):
            raise ConfigError(f"label must be 0 or 1, got {label!r}")
        s = float(score)
        if not isfinite(s):
            raise DegenerateInputError(f"score must be finite, got {score!r}")
        scores[i] = s
        labels[i] = label
    if labels.min() == labels.max():
        raise DegenerateLabelsError("need both positive and negative labels")
    return scores, labels


def roc_curve(scored: Iterable[Tuple[float, int]]) -> RocCurve:
    """Build the ROC curve, one point per distinct score value.

    Tied scores collapse into a single operating point, so an all-tied
    input yields exactly the two endpoint points.
    """
    scores, labels = _check_scored(scored)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    order = np.argsort(-scores, kind="stable")
    scores = scores[order]
    labels = labels[order]
    points = [(0.0, 0.0)]
    thresholds = [inf]
    tp = fp = 0
    i = 0
    n = scores.size
    while i < n:
        j = i
        while j < n and scores[j] == scores[i]:
            tp += int(labels[j])
            fp += 1 - int(labels[j])
            j += 1
        points.append((fp / n_neg, tp / n_pos))
        thresholds.append(float(scores[i]))
        i = j
    return RocCurve(points=tuple(points), thresholds=tuple(thresholds))


def auroc(curve: RocCurve) -> float:
    """Trapezoidal area under the curve."""
    area = 0.0
    pts = curve.points
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area


def tpr_at_fpr(curve: RocCurve, fpr_cap: float) -> float:
    """Best TPR among operating points with FPR <= cap.

    The (0, 0) endpoint always qualifies, so the result is well defined
    for any cap in [0, 1]; a curve that jumps straight past the cap
    (e.g. the two-point all-tied diagonal with cap 0.1) scores 0.
    """
    if not 0.0 <= fpr_cap <= 1.0:
        raise ConfigError(f"fpr_cap must be in [0, 1], got {fpr_cap!r}")
    return max(tpr for fpr, tpr in curve.points if fpr <= fpr_cap)


@dataclass(frozen=True)
class MetricSummary:
    """Headline ROC metrics plus the curve they were read from."""

    auroc: float
    tpr_at_0_1: float
    tpr_at_top25: float
    roc: RocCurve


def tpr_at_top_fraction(scored: Sequence[Tuple[float, int]], q: float,
                        ids: Optional[Sequence[str]] = None) -> float:
    """Recall of the members when flagging the top ceil(q*N) scores.

    Ranking is by score descending; ids break ties ascending when given
    (positional index otherwise), which keeps the flagged set stable
    across input orderings.
    """
    if not 0.0 < q <= 1.0:
        raise ConfigError(f"q must be in (0, 1], got {q!r}")
    scores, labels = _check_scored(scored)
    if ids is not None and len(ids) != scores.size:
        raise ShapeError("ids must align with scored samples")
    keys = list(ids) if ids is not None else list(range(scores.size))
    order = sorted(range(scores.size), key=lambda i: (-scores[i], keys[i]))
    k = ceil(q * scores.size)
    flagged = order[:k]
    n_pos = int(labels.sum())
    tp = sum(int(labels[i]) for i in flagged)
    return tp / n_pos


# ---------------------------------------------------------------------------
# pointwise peak confusion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConfusionCounts:
    """Pointwise confusion over a window; total always equals its length."""

    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            if getattr(self, name) < 0:
                raise ShapeError(f"{name} must be nonnegative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def pointwise_classify(peaks: Iterable[int], window: Tuple[int, int],
                       tolerance: int) -> np.ndarray:
    """Mark each timestamp in [window) that lies within tolerance of a peak."""
    lo, hi = int(window[0]), int(window[1])
    if hi <= lo:
        raise ShapeError(f"empty window {window!r}")
    if tolerance < 0:
        raise ConfigError(f"tolerance must be >= 0, got {tolerance!r}")
    out = np.zeros(hi - lo, dtype=np.uint8)
    for p in peaks:
        a = max(lo, int(p) - tolerance)
        b = min(hi, int(p) + tolerance + 1)
        if a < b:
            out[a - lo : b - lo] = 1
    return out


def peak_confusion(gt_peaks: Iterable[int], pred_peaks: Iterable[int],
                   window: Tuple[int, int], tolerance: int) -> ConfusionCounts:
    """Compare predicted against ground-truth peaks timestamp by timestamp."""
    gt = pointwise_classify(gt_peaks, window, tolerance)
    pred = pointwise_classify(pred_peaks, window, tolerance)
    tp = int(np.sum((gt == 1) & (pred == 1)))
    fp = int(np.sum((gt == 0) & (pred == 1)))
    tn = int(np.sum((gt == 0) & (pred == 0)))
    fn = int(np.sum((gt == 1) & (pred == 0)))
    return ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)


def precision_recall(c: ConfusionCounts) -> Tuple[Optional[float], Optional[float]]:
    """(precision, recall); a 0/0 division yields None for that entry."""
    precision = c.tp / (c.tp + c.fp) if c.tp + c.fp > 0 else None
    recall = c.tp / (c.tp + c.fn) if c.tp + c.fn > 0 else None
    return precision, recall


# ---------------------------------------------------------------------------
# Pearson correlation with p-value
# ---------------------------------------------------------------------------

def _pearson_r(xc: np.ndarray, yc: np.ndarray) -> float:
    denom = sqrt(float(xc @ xc) * float(yc @ yc))
    r = float(xc @ yc) / denom
    return min(1.0, max(-1.0, r))


def _p_exact_permutation(xc: np.ndarray, yc: np.ndarray) -> float:
    # denominators are permutation-invariant, so compare |dot| directly
    obs = abs(float(xc @ yc))
    tol = 1e-12 * sqrt(float(xc @ xc) * float(yc @ yc))
    hits = 0
    total = 0
    y_list = yc.tolist()
    for perm in permutations(y_list):
        total += 1
        dot = 0.0
        for a, b in zip(xc, perm):
            dot += a * b
        if abs(dot) >= obs - tol:
            hits += 1
    return hits / total


def _p_sampled_permutation(xc: np.ndarray, yc: np.ndarray, n_permutations: int,
                           seed: int) -> float:
    obs = abs(float(xc @ yc))
    tol = 1e-12 * sqrt(float(xc @ xc) * float(yc @ yc))
    rng = np.random.default_rng(seed)
    tiled = np.tile(yc, (n_permutations, 1))
    permuted = rng.permuted(tiled, axis=1)
    dots = permuted @ xc
    hits = int(np.sum(np.abs(dots) >= obs - tol))
    # add-one smoothing keeps the estimate away from an impossible 0
    return (1 + hits) / (1 + n_permutations)


def _p_t_distribution(r: float, n: int) -> float:
    nu = n - 2
    if 1.0 - r * r <= 0.0:
        return 0.0
    t_sq = r * r * nu / (1.0 - r * r)
    return float(betainc(nu / 2.0, 0.5, nu / (nu + t_sq)))


def pearson(x: Sequence[float], y: Sequence[float], *, p_method: str = "auto",
            n_permutations: int = DEFAULT_PERMUTATIONS, seed: int = 0
            ) -> Tuple[float, float]:
    """Pearson r with a two-sided p-value for H0: no association.

    p_method:
      "auto"        exact permutation enumeration for n <= 9, else the
                    t-distribution transform;
      "permutation" stays in the permutation family: exact for n <= 9,
                    seeded sampling with add-one smoothing above;
      "t"           always the t transform (via the regularized
                    incomplete beta function).
    """
    if p_method not in ("auto", "permutation", "t"):
        raise ConfigError(f"unknown p_method {p_method!r}")
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.ndim != 1 or ya.ndim != 1:
        raise ShapeError("pearson expects 1-D inputs")
    if xa.size != ya.size:
        raise ShapeError(f"length mismatch: {xa.size} vs {ya.size}")
    n = xa.size
    if n < 3:
        raise DegenerateInputError(f"pearson needs n >= 3, got {n}")
    if not (np.all(np.isfinite(xa)) and np.all(np.isfinite(ya))):
        raise DegenerateInputError("pearson inputs must be finite")
    xc = xa - xa.mean()
    yc = ya - ya.mean()
    if float(xc @ xc) == 0.0 or float(yc @ yc) == 0.0:
        raise DegenerateInputError("pearson needs nonzero variance in both inputs")
    r = _pearson_r(xc, yc)
    if p_method == "t":
        p = _p_t_distribution(r, n)
    elif p_method == "permutation":
        if n <= EXACT_PERMUTATION_MAX_N:
            p = _p_exact_permutation(xc, yc)
        else:
            p = _p_sampled_permutation(xc, yc, n_permutations, seed)
    else:
        if n <= EXACT_PERMUTATION_MAX_N:
            p = _p_exact_permutation(xc, yc)
        else:
            p = _p_t_distribution(r, n)
    return r, p


# ---------------------------------------------------------------------------
# ROC CSV
# ---------------------------------------------------------------------------

_ROC_HEADER = ["threshold", "fpr", "tpr"]


def write_roc_csv(curve: RocCurve, path) -> None:
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(_ROC_HEADER)
            for (fpr, tpr), threshold in zip(curve.points, curve.thresholds):
                writer.writerow([repr(threshold), repr(fpr), repr(tpr)])
    except OSError as exc:
        raise IoError(f"cannot write ROC file {path}: {exc}") from exc


def read_roc_csv(path) -> RocCurve:
    with open(path, "r", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != _ROC_HEADER:
        raise SchemaError(f"{path}: expected header {','.join(_ROC_HEADER)}")
    points = []
    thresholds = []
    for row in rows[1:]:
        if not row:
            continue
        if len(row) != 3:
            raise SchemaError(f"{path}: wrong field count in ROC row")
        thresholds.append(float(row[0]))
        points.append((float(row[1]), float(row[2])))
    return RocCurve(points=tuple(points), thresholds=tuple(thresholds))
