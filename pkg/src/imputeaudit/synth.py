"""Synthetic benchmark constructions.

These generators build datasets whose privacy leakage is known by
construction, so attack quality can be asserted rather than eyeballed:

* bump windows with controlled SNR exercise the peak detector's
  localization;
* the membership benchmark builds members whose absolute target loss
  spans a wide difficulty range (so thresholding raw loss is weak) while
  the loss ratio stays uniformly small (so the reference-calibrated
  attack is strong);
* the linkage mixture varies how faithfully the target memorized each
  member, which ties the membership ratio to downstream peak-recovery
  precision and gives the risk-selection stage something real to find.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .dataset import TimeSeriesRecord, stable_seed
from .errors import ConfigError


def gaussian_bump(length: int, center: float, sigma: float,
                  amplitude: float = 1.0) -> np.ndarray:
    t = np.arange(length, dtype=np.float64)
    return amplitude * np.exp(-0.5 * ((t - center) / sigma) ** 2)


def noisy_bump_windows(count: int = 500, length: int = 48, seed: int = 0,
                       snr: float = 10.0, sigma_range: Tuple[float, float] = (1.0, 4.0),
                       amplitude: float = 1.0, margin: int = 8
                       ) -> List[Tuple[np.ndarray, int]]:
    """Windows with one Gaussian bump plus white noise at the given SNR.

    SNR is amplitude over noise standard deviation. Returns (values,
    true_center) pairs; centers stay margin points away from the edges.
    """
    if snr <= 0:
        raise ConfigError("snr must be positive")
    if not margin <= length - margin - 1:
        raise ConfigError("margin leaves no room for a center")
    rng = np.random.default_rng(seed)
    noise_std = amplitude / snr
    out = []
    for _ in range(count):
        center = int(rng.integers(margin, length - margin))
        sigma = float(rng.uniform(*sigma_range))
        values = gaussian_bump(length, center, sigma, amplitude)
        values = values + rng.normal(0.0, noise_std, length)
        out.append((values, center))
    return out


def flat_windows(count: int = 100, length: int = 48, seed: int = 0
                 ) -> List[np.ndarray]:
    """Constant windows at varied levels; no detector should fire here."""
    rng = np.random.default_rng(seed)
    return [np.full(length, float(rng.uniform(-5.0, 5.0))) for _ in range(count)]


def bump_train_values(rng: np.random.Generator, length: int, window: int = 24,
                      noise: float = 0.1, height: float = 4.0,
                      margin: int = 8) -> Tuple[np.ndarray, Tuple[int, ...]]:
    """Noise floor with one bump per window; returns values and centers."""
    t = np.arange(length, dtype=np.float64)
    x = rng.normal(0.0, noise, length)
    centers = []
    for w in range(length // window):
        c = window * w + int(rng.integers(margin, window - margin + 1))
        s = float(rng.uniform(1.0, 3.0))
        x = x + height * np.exp(-0.5 * ((t - c) / s) ** 2)
        centers.append(c)
    return x, tuple(centers)


def aia_member_set(n_series: int = 6, length: int = 240, seed: int = 0,
                   noise: float = 0.1, height: float = 4.0
                   ) -> List[TimeSeriesRecord]:
    """Bump-train members for the window-attack gap benchmark."""
    out = []
    for i in range(n_series):
        rng = np.random.default_rng(stable_seed(seed, f"aia-member:{i}"))
        values, _ = bump_train_values(rng, length, noise=noise, height=height)
        out.append(TimeSeriesRecord(id=f"m{i:03d}",
                                    values=tuple(float(v) for v in values),
                                    origin="private"))
    return out


def _curvy_shape(rng: np.random.Generator, length: int) -> np.ndarray:
    """Unit-amplitude mix of mid-frequency sines.

    Frequencies in [0.2, 0.5] keep every 48-step mask window wavy, so
    linear interpolation never gets lucky on a flat stretch and the
    reference loss scales cleanly with series amplitude.
    """
    t = np.arange(length, dtype=np.float64)
    x = np.zeros(length)
    for _ in range(3):
        freq = rng.uniform(0.2, 0.5)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        x += rng.uniform(0.5, 1.0) * np.sin(freq * t + phase)
    peak = np.max(np.abs(x))
    return x / peak


def _oscillation(rng: np.random.Generator, length: int) -> np.ndarray:
    """Unit distortion carrier above the shape band; warping cannot
    cancel a phase-random oscillation, so the memorization residual
    stays proportional to its amplitude."""
    t = np.arange(length, dtype=np.float64)
    return np.sin(rng.uniform(0.6, 1.2) * t + rng.uniform(0.0, 2.0 * np.pi))


@dataclass(frozen=True)
class MembershipBenchmark:
    """Target store plus labeled suspects with known membership."""

    store: Tuple[TimeSeriesRecord, ...]
    suspects: Tuple[TimeSeriesRecord, ...]
    labels: Dict[str, int]


def membership_benchmark(seed: int = 0, n_members: int = 40,
                         n_nonmembers: int = 40, length: int = 96,
                         scale_range: Tuple[float, float] = (0.125, 32.0),
                         distortion: float = 0.12) -> MembershipBenchmark:
    """Members memorized imperfectly, at difficulty scales spanning 256x.

    The store holds one distorted twin per member (twin = member +
    distortion * scale * oscillation). A memorizing target recalls the
    twin, so the member's absolute loss grows with its difficulty scale
    and overlaps the nonmember loss range; the reference loss grows with
    the same scale, so the ratio cancels it and stays small for every
    member. That is exactly the regime where raw-loss thresholding is
    mediocre and the ratio attack is not.
    """
    log_lo, log_hi = np.log(scale_range[0]), np.log(scale_range[1])
    store = []
    members = []
    labels = {}
    for i in range(n_members):
        rng = np.random.default_rng(stable_seed(seed, f"member:{i}"))
        scale = float(np.exp(rng.uniform(log_lo, log_hi)))
        values = scale * _curvy_shape(rng, length)
        member = TimeSeriesRecord(id=f"mem{i:03d}",
                                  values=tuple(float(v) for v in values),
                                  origin="private")
        twin = values + distortion * scale * _oscillation(rng, length)
        store.append(TimeSeriesRecord(id=f"twin{i:03d}",
                                      values=tuple(float(v) for v in twin),
                                      origin="private"))
        members.append(member)
        labels[member.id] = 1
    nonmembers = []
    for i in range(n_nonmembers):
        rng = np.random.default_rng(stable_seed(seed, f"nonmember:{i}"))
        scale = float(np.exp(rng.uniform(log_lo, log_hi)))
        values = scale * _curvy_shape(rng, length)
        nonmember = TimeSeriesRecord(id=f"non{i:03d}",
                                     values=tuple(float(v) for v in values),
                                     origin="test")
        nonmembers.append(nonmember)
        labels[nonmember.id] = 0
    return MembershipBenchmark(store=tuple(store),
                               suspects=tuple(members + nonmembers),
                               labels=labels)


@dataclass(frozen=True)
class LinkageBenchmark:
    """Mixture where memorization fidelity drives peak recoverability."""

    store: Tuple[TimeSeriesRecord, ...]
    suspects: Tuple[TimeSeriesRecord, ...]
    labels: Dict[str, int]
    fidelity: Dict[str, float]


def linkage_mixture(seed: int = 0, n_members: int = 24, n_nonmembers: int = 24,
                    length: int = 168, height: float = 4.0,
                    fidelity_range: Tuple[float, float] = (0.3, 1.0)
                    ) -> LinkageBenchmark:
    """Only the member series carry memorized bumps.

    Members are clean bump trains (zero noise floor, so ground-truth
    detection finds exactly the planted transients). A member twin at
    fidelity f keeps every bump but displaces its position by noise
    proportional to 1 - f, so low-fidelity members impute worse (higher
    ratio) and their recovered peaks land outside the tolerance (lower
    window precision). Nonmembers are slow smooth arcs with no twins at
    all: detection finds nothing real in their windows, the model can
    only hallucinate bumps there, so their precision collapses while
    their ratio stays far above one.
    """
    f_lo, f_hi = fidelity_range
    window = 24
    margin = 6
    t = np.arange(length, dtype=np.float64)
    store = []
    suspects = []
    labels = {}
    fidelity = {}
    for i in range(n_members):
        rng = np.random.default_rng(stable_seed(seed, f"link-member:{i}"))
        bumps = []
        for w in range(length // window):
            c = window * w + int(rng.integers(margin, window - margin + 1))
            s = float(rng.uniform(1.0, 2.5))
            bumps.append((c, s))
        values = np.zeros(length)
        for c, s in bumps:
            values += height * np.exp(-0.5 * ((t - c) / s) ** 2)
        member = TimeSeriesRecord(id=f"mem{i:03d}",
                                  values=tuple(float(v) for v in values),
                                  origin="private")
        f = float(rng.uniform(f_lo, f_hi))
        # imperfect memorization displaces each remembered bump; the
        # displacement shrinks to zero as fidelity approaches one
        twin_values = np.zeros(length)
        for c, s in bumps:
            shift = float(np.clip(rng.normal(0.0, (1.0 - f) * 5.0), -6.0, 6.0))
            twin_values += height * np.exp(-0.5 * ((t - (c + shift)) / s) ** 2)
        store.append(TimeSeriesRecord(id=f"twin{i:03d}",
                                      values=tuple(float(v) for v in twin_values),
                                      origin="private"))
        suspects.append(member)
        labels[member.id] = 1
        fidelity[member.id] = f
    t = np.arange(length, dtype=np.float64)
    for i in range(n_nonmembers):
        rng = np.random.default_rng(stable_seed(seed, f"link-nonmember:{i}"))
        amp = float(rng.uniform(0.5, 1.5))
        freq = float(rng.uniform(0.015, 0.03))
        phase = float(rng.uniform(0.0, 2.0 * np.pi))
        values = amp * np.sin(freq * t + phase)
        nonmember = TimeSeriesRecord(id=f"non{i:03d}",
                                     values=tuple(float(v) for v in values),
                                     origin="test")
        suspects.append(nonmember)
        labels[nonmember.id] = 0
        fidelity[nonmember.id] = 0.0
    return LinkageBenchmark(store=tuple(store), suspects=tuple(suspects),
                            labels=labels, fidelity=fidelity)
