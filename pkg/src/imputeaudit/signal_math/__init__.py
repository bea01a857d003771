"""Alignment distances and wavelet peak detection.

dtw_distance dispatches to a compiled kernel when the extension built,
falling back to a line-equivalent pure Python dynamic program otherwise.
BACKEND names the active implementation; set IMPUTEAUDIT_PURE_PYTHON=1 to
force the fallback (used by the backend-parity tests and benchmarks).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import ConfigError, EmptyInputError, ShapeError
from ._cwt import (
    CwtConfig,
    PeakSet,
    cwt,
    detect_peaks_cwt,
    ricker_wavelet,
)

if os.environ.get("IMPUTEAUDIT_PURE_PYTHON", "") == "1":
    from ._dtw_py import dtw as _dtw_impl

    BACKEND = "python"
else:
    try:
        from ._dtw_kernel import dtw as _dtw_impl

        BACKEND = "compiled"
    except ImportError:
        from ._dtw_py import dtw as _dtw_impl

        BACKEND = "python"

__all__ = [
    "BACKEND",
    "DtwConfig",
    "dtw_distance",
    "mae",
    "CwtConfig",
    "PeakSet",
    "cwt",
    "detect_peaks_cwt",
    "ricker_wavelet",
]

_DISTANCES = ("absolute", "squared")


@dataclass(frozen=True)
class DtwConfig:
    """Pointwise distance and optional Sakoe-Chiba band radius."""

    pointwise_distance: str = "absolute"
    band_radius: Optional[int] = None

    def __post_init__(self):
        if self.pointwise_distance not in _DISTANCES:
            raise ConfigError(
                f"pointwise_distance must be one of {_DISTANCES}, "
                f"got {self.pointwise_distance!r}"
            )
        if self.band_radius is not None:
            if int(self.band_radius) != self.band_radius or self.band_radius < 0:
                raise ConfigError("band_radius must be a non-negative integer")
            object.__setattr__(self, "band_radius", int(self.band_radius))


def _as_series(x, name: str) -> np.ndarray:
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ShapeError(f"{name} must be 1-D, got shape {arr.shape}")
    return arr


def dtw_distance(a, b, config: DtwConfig = DtwConfig()) -> float:
    """Dynamic time warping distance between two series.

    Minimum over monotone boundary-anchored alignments of the summed
    pointwise distances; every visited cell contributes, with no path
    length normalization. With a band radius r only cells |i - j| <= r
    are reachable, so the radius must cover the length difference.
    """
    x = _as_series(a, "a")
    y = _as_series(b, "b")
    if x.shape[0] == 0 or y.shape[0] == 0:
        raise EmptyInputError("dtw_distance needs non-empty inputs")
    if config.band_radius is None:
        band = -1
    else:
        band = config.band_radius
        if abs(x.shape[0] - y.shape[0]) > band:
            raise ConfigError(
                f"band radius {band} cannot align lengths "
                f"{x.shape[0]} and {y.shape[0]}"
            )
    squared = config.pointwise_distance == "squared"
    if BACKEND == "compiled":
        return float(_dtw_impl(x, y, squared, band))
    return float(_dtw_impl(x.tolist(), y.tolist(), squared, band))


def mae(predicted, actual) -> float:
    """Mean absolute error between two equal-length series."""
    p = _as_series(predicted, "predicted")
    a = _as_series(actual, "actual")
    if p.shape[0] != a.shape[0]:
        raise ShapeError(f"length mismatch: {p.shape[0]} vs {a.shape[0]}")
    if p.shape[0] == 0:
        raise ShapeError("mae needs at least one point")
    return float(np.mean(np.abs(p - a)))
