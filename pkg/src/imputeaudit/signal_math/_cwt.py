"""Continuous wavelet transform and ridge-line peak detection.

The transform correlates the input with ricker (Mexican hat) kernels at a
ladder of widths. Peaks are columns where relative maxima persist across
adjacent widths: maxima are linked into ridge lines from the largest width
downward, then lines are kept only if long enough and loud enough against
the noise floor of the smallest-width row. The reported peak index of a
line is its column at the smallest surviving width.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil
from typing import Optional

import numpy as np

from ..errors import ConfigError, ShapeError


@dataclass(frozen=True)
class CwtConfig:
    """Transform and ridge-detection settings.

    widths is the strictly increasing ladder of wavelet widths.
    gap_threshold=None resolves to ceil(widths[0]): how many consecutive
    rows a ridge line may miss before it is finalized. A ridge line must
    span at least ceil(min_ridge_length_fraction * len(widths)) rows and
    reach SNR >= min_snr, where the noise floor is the noise_percentile
    percentile of |row 0| of the transform.
    """

    widths: tuple = (1.0, 2.0, 3.0, 4.0)
    wavelet: str = "ricker"
    min_snr: float = 1.0
    gap_threshold: Optional[int] = None
    min_ridge_length_fraction: float = 0.25
    noise_percentile: float = 10.0

    def __post_init__(self):
        widths = tuple(float(w) for w in self.widths)
        if not widths:
            raise ConfigError("widths must be non-empty")
        if any(w <= 0 for w in widths):
            raise ConfigError("widths must be positive")
        if any(b <= a for a, b in zip(widths, widths[1:])):
            raise ConfigError("widths must be strictly increasing")
        object.__setattr__(self, "widths", widths)
        if self.wavelet != "ricker":
            raise ConfigError(f"unsupported wavelet {self.wavelet!r}")
        if not self.min_snr > 0:
            raise ConfigError("min_snr must be positive")
        if self.gap_threshold is not None:
            if int(self.gap_threshold) != self.gap_threshold or self.gap_threshold < 1:
                raise ConfigError("gap_threshold must be a positive integer")
            object.__setattr__(self, "gap_threshold", int(self.gap_threshold))
        if not 0 < self.min_ridge_length_fraction <= 1:
            raise ConfigError("min_ridge_length_fraction must be in (0, 1]")
        if not 0 < self.noise_percentile < 100:
            raise ConfigError("noise_percentile must be in (0, 100)")

    @property
    def resolved_gap_threshold(self) -> int:
        if self.gap_threshold is not None:
            return self.gap_threshold
        return ceil(self.widths[0])


@dataclass(frozen=True)
class PeakSet:
    """Strictly increasing unique peak indices."""

    indices: tuple

    def __post_init__(self):
        idx = tuple(sorted({int(i) for i in self.indices}))
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, item) -> bool:
        return item in self.indices

    def shifted(self, offset: int) -> "PeakSet":
        return PeakSet(tuple(i + offset for i in self.indices))


def ricker_wavelet(points: int, a: float) -> np.ndarray:
    """Ricker kernel: A (1 - (t/a)^2) exp(-t^2 / (2 a^2)), t centered."""
    if points < 1:
        raise ShapeError(f"kernel needs >= 1 point, got {points}")
    if a <= 0:
        raise ConfigError(f"width must be positive, got {a}")
    amp = 2.0 / (np.sqrt(3.0 * a) * np.pi**0.25)
    vec = np.arange(points, dtype=np.float64) - (points - 1.0) / 2.0
    return amp * (1.0 - (vec / a) ** 2) * np.exp(-(vec**2) / (2.0 * a**2))


def cwt(x, config: CwtConfig = CwtConfig()) -> np.ndarray:
    """Transform matrix of shape (len(widths), len(x)).

    Row k is the zero-padded same-length correlation of x with the ricker
    kernel of width widths[k]; kernel support is min(10 * width, len(x))
    points. Requires len(x) >= max(widths).
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeError(f"expected a 1-D series, got shape {x.shape}")
    n = x.shape[0]
    if n < max(config.widths):
        raise ShapeError(
            f"series length {n} shorter than the largest width {max(config.widths)}"
        )
    out = np.empty((len(config.widths), n), dtype=np.float64)
    for k, w in enumerate(config.widths):
        points = int(np.ceil(min(10.0 * w, float(n))))
        # odd support keeps the kernel symmetric on the integer grid, so
        # same-mode correlation introduces no half-sample shift between rows
        if points % 2 == 0:
            points = points + 1 if points < n else points - 1
        kernel = ricker_wavelet(points, w)
        out[k] = np.convolve(x, kernel[::-1], mode="same")
    return out


def _relative_maxima(row: np.ndarray) -> np.ndarray:
    """Boolean mask of strict local maxima; endpoints never qualify."""
    out = np.zeros(row.shape[0], dtype=bool)
    if row.shape[0] >= 3:
        out[1:-1] = (row[1:-1] > row[:-2]) & (row[1:-1] > row[2:])
    return out


def _identify_ridge_lines(matrix: np.ndarray, max_distances, gap_threshold: int):
    """Link per-row relative maxima into ridge lines.

    Lines start at the largest width that has any maxima and grow toward
    width 0, attaching each new maximum to the closest open line within
    max_distances[row]. A line that misses more than gap_threshold
    consecutive rows is finalized. Returns [rows, cols] pairs with rows
    ascending.
    """
    relmax = np.vstack([_relative_maxima(matrix[r]) for r in range(matrix.shape[0])])
    has_relmax = np.nonzero(relmax.any(axis=1))[0]
    if len(has_relmax) == 0:
        return []
    start_row = has_relmax[-1]
    # each open line is [row list, col list, current gap count]
    ridge_lines = [[[start_row], [col], 0] for col in np.nonzero(relmax[start_row])[0]]
    final_lines = []
    for row in range(start_row - 1, -1, -1):
        this_max_cols = np.nonzero(relmax[row])[0]
        for line in ridge_lines:
            line[2] += 1
        prev_ridge_cols = np.array([line[1][-1] for line in ridge_lines])
        for col in this_max_cols:
            line = None
            if prev_ridge_cols.size > 0:
                diffs = np.abs(col - prev_ridge_cols)
                closest = int(np.argmin(diffs))
                if diffs[closest] <= max_distances[row]:
                    line = ridge_lines[closest]
            if line is not None:
                line[1].append(int(col))
                line[0].append(int(row))
                line[2] = 0
            else:
                ridge_lines.append([[int(row)], [int(col)], 0])
        for ind in range(len(ridge_lines) - 1, -1, -1):
            if ridge_lines[ind][2] > gap_threshold:
                final_lines.append(ridge_lines[ind])
                del ridge_lines[ind]
    out_lines = []
    for line in final_lines + ridge_lines:
        order = np.argsort(line[0])
        rows = np.asarray(line[0])[order]
        cols = np.asarray(line[1])[order]
        out_lines.append([rows, cols])
    return out_lines


def _filter_ridge_lines(matrix: np.ndarray, ridge_lines, min_length: int,
                        min_snr: float, noise_percentile: float):
    """Keep lines that are long enough and loud enough.

    The noise floor is the global noise_percentile percentile of |row 0|.
    A line's signal is the signed coefficient at its smallest surviving
    row: a peak must respond positively at small scale, which rejects
    saddle ridges between nearby bumps. Zero noise with a positive signal
    counts as infinite SNR; zero or negative signal always fails.
    """
    noise = float(np.percentile(np.abs(matrix[0]), noise_percentile))
    kept = []
    for rows, cols in ridge_lines:
        if len(rows) < min_length:
            continue
        signal = float(matrix[rows[0], cols[0]])
        if signal <= 0.0:
            continue
        if noise == 0.0 or signal / noise >= min_snr:
            kept.append([rows, cols])
    return kept


def detect_peaks_cwt(x, config: CwtConfig = CwtConfig()) -> PeakSet:
    """Find peak positions in a 1-D series via CWT ridge lines.

    Requires len(x) >= 2 * max(widths). A constant series has no local
    maxima and returns an empty PeakSet before any transform work; this
    also sidesteps spurious edge ridges from zero padding.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeError(f"expected a 1-D series, got shape {x.shape}")
    n = x.shape[0]
    if n < 2 * max(config.widths):
        raise ShapeError(
            f"series length {n} shorter than 2 * max width "
            f"{2 * max(config.widths)}"
        )
    if n and float(np.ptp(x)) == 0.0:
        return PeakSet(())
    matrix = cwt(x, config)
    max_distances = [w / 4.0 for w in config.widths]
    lines = _identify_ridge_lines(matrix, max_distances, config.resolved_gap_threshold)
    min_length = ceil(config.min_ridge_length_fraction * len(config.widths))
    kept = _filter_ridge_lines(matrix, lines, min_length, config.min_snr,
                               config.noise_percentile)
    return PeakSet(tuple(int(cols[0]) for _, cols in kept))
