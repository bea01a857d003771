"""Sliding-window attribute-inference attack.

Each window of a suspect series is masked in full, the model imputes it,
and CWT peak detection runs on the reconstructed window slice and on the
ground-truth slice. The two peak sets are compared pointwise within a
temporal tolerance. A model that memorized the series reproduces its
transient peaks inside regions it never observed at attack time; a model
that only learned population structure cannot.

Peaks are detected window-restricted (on the slice, not the full
series), so peaks near window borders may differ from what full-series
detection would find. Detected columns are slice-relative and are
shifted back to absolute time indices before comparison.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from math import sqrt
from typing import Optional, Sequence, Tuple

import numpy as np

from .dataset import MaskSpec, TimeSeriesRecord, apply_mask
from .errors import ConfigError, DegenerateAggregateError, IoError, SchemaError
from .imputers import ImputerHandle, impute
from .metrics import ConfusionCounts, peak_confusion, precision_recall
from .signal_math import CwtConfig, PeakSet, detect_peaks_cwt


@dataclass(frozen=True)
class AiaConfig:
    """Window sweep parameters plus the detector configuration."""

    window: int = 24
    stride: int = 24
    tolerance: int = 2
    cwt: CwtConfig = field(default_factory=CwtConfig)

    def __post_init__(self):
        if self.window < 1:
            raise ConfigError(f"window must be >= 1, got {self.window!r}")
        if self.stride < 1:
            raise ConfigError(f"stride must be >= 1, got {self.stride!r}")
        if self.tolerance < 0:
            raise ConfigError(f"tolerance must be >= 0, got {self.tolerance!r}")


@dataclass(frozen=True)
class WindowResult:
    """One attacked window: peak sets in absolute indices and the scores."""

    series_id: str
    window_interval: Tuple[int, int]
    gt_peaks: PeakSet
    pred_peaks: PeakSet
    confusion: ConfusionCounts
    precision: Optional[float]
    recall: Optional[float]

    @property
    def degenerate(self) -> bool:
        """True when precision or recall hit a 0/0 division."""
        return self.precision is None or self.recall is None


@dataclass(frozen=True)
class AiaAggregate:
    """Means and sample stds over all attacked windows.

    Windows whose precision is undefined (no predicted marks) are
    excluded from the precision mean and counted; likewise for recall
    (no ground-truth marks). A window with ground-truth peaks but no
    predictions still counts in recall, as a miss.
    """

    precision_mean: float
    precision_std: float
    recall_mean: float
    recall_std: float
    n_windows: int
    degenerate_precision_count: int
    degenerate_recall_count: int
    per_window: Tuple[WindowResult, ...]


def sliding_windows(length: int, cfg: AiaConfig) -> list:
    """Intervals [t, t+W) swept with the stride; a short tail is skipped."""
    if length < cfg.window:
        return []
    count = (length - cfg.window) // cfg.stride + 1
    return [(t * cfg.stride, t * cfg.stride + cfg.window) for t in range(count)]


def attack_window(model: ImputerHandle, x: TimeSeriesRecord,
                  interval: Tuple[int, int], cfg: AiaConfig) -> WindowResult:
    """Mask one window, impute, and compare detected peaks pointwise."""
    start, stop = interval
    if not 0 <= start < stop <= len(x):
        raise ConfigError(f"window {interval!r} out of range for length {len(x)}")
    if stop - start != cfg.window:
        raise ConfigError(f"window {interval!r} does not match length {cfg.window}")
    masked = apply_mask(x, [MaskSpec(start=start, width=stop - start)])
    prediction = impute(model, masked)
    gt_slice = np.asarray(x.values[start:stop], dtype=np.float64)
    pred_slice = np.asarray(prediction[start:stop], dtype=np.float64)
    gt_peaks = detect_peaks_cwt(gt_slice, cfg.cwt).shifted(start)
    pred_peaks = detect_peaks_cwt(pred_slice, cfg.cwt).shifted(start)
    confusion = peak_confusion(gt_peaks, pred_peaks, interval, cfg.tolerance)
    precision, recall = precision_recall(confusion)
    return WindowResult(
        series_id=x.id,
        window_interval=(start, stop),
        gt_peaks=gt_peaks,
        pred_peaks=pred_peaks,
        confusion=confusion,
        precision=precision,
        recall=recall,
    )


def _mean_std(values: Sequence[float]) -> Tuple[float, float]:
    n = len(values)
    mean = sum(values) / n
    if n < 2:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, sqrt(var)


def aggregate_windows(results: Sequence[WindowResult]) -> AiaAggregate:
    """Reduce attacked windows to precision and recall summaries.

    Sorts kept values by (series_id, window_start) before reducing, so
    results are bit-identical under any input ordering. Raises
    DegenerateAggregateError when no window yields a defined precision
    (or none a defined recall).
    """
    results = list(results)
    keyed = sorted(results, key=lambda r: (r.series_id, r.window_interval[0]))
    precisions = [r.precision for r in keyed if r.precision is not None]
    recalls = [r.recall for r in keyed if r.recall is not None]
    if not precisions:
        raise DegenerateAggregateError(
            "no window produced a defined precision; nothing to aggregate"
        )
    if not recalls:
        raise DegenerateAggregateError(
            "no window produced a defined recall; nothing to aggregate"
        )
    precision_mean, precision_std = _mean_std(precisions)
    recall_mean, recall_std = _mean_std(recalls)
    return AiaAggregate(
        precision_mean=precision_mean,
        precision_std=precision_std,
        recall_mean=recall_mean,
        recall_std=recall_std,
        n_windows=len(results),
        degenerate_precision_count=len(results) - len(precisions),
        degenerate_recall_count=len(results) - len(recalls),
        per_window=tuple(results),
    )


def run_aia(model: ImputerHandle, data: Sequence[TimeSeriesRecord],
            cfg: AiaConfig = AiaConfig()) -> AiaAggregate:
    """Attack every window of every series and aggregate the scores."""
    results = []
    for x in data:
        for interval in sliding_windows(len(x), cfg):
            results.append(attack_window(model, x, interval, cfg))
    return aggregate_windows(results)


# ---------------------------------------------------------------------------
# per-window CSV
# ---------------------------------------------------------------------------

_WINDOW_HEADER = ["series_id", "window_start", "tp", "fp", "tn", "fn",
                  "precision", "recall", "degenerate"]


def write_window_csv(results: Sequence[WindowResult], path) -> None:
    """Per-window rows; undefined precision or recall is left empty."""
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(_WINDOW_HEADER)
            for r in results:
                writer.writerow([
                    r.series_id,
                    r.window_interval[0],
                    r.confusion.tp,
                    r.confusion.fp,
                    r.confusion.tn,
                    r.confusion.fn,
                    "" if r.precision is None else repr(r.precision),
                    "" if r.recall is None else repr(r.recall),
                    int(r.degenerate),
                ])
    except OSError as exc:
        raise IoError(f"cannot write window file {path}: {exc}") from exc


def read_window_csv(path):
    """Read the per-window CSV back as a list of plain dict rows."""
    with open(path, "r", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != _WINDOW_HEADER:
        raise SchemaError(f"{path}: expected header {','.join(_WINDOW_HEADER)}")
    out = []
    for row in rows[1:]:
        if not row:
            continue
        if len(row) != len(_WINDOW_HEADER):
            raise SchemaError(f"{path}: wrong field count in window row")
        out.append({
            "series_id": row[0],
            "window_start": int(row[1]),
            "tp": int(row[2]),
            "fp": int(row[3]),
            "tn": int(row[4]),
            "fn": int(row[5]),
            "precision": None if row[6] == "" else float(row[6]),
            "recall": None if row[7] == "" else float(row[7]),
            "degenerate": bool(int(row[8])),
        })
    return out
