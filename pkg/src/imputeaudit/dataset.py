"""Dataset model: immutable series records, partition splits, and masking.

A record is one complete real-valued series. Masking removes contiguous
spans and represents the gaps explicitly as None (JSON null on the wire);
magic fill values and NaN markers are never used for missingness.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, replace
from fractions import Fraction
from math import floor, isfinite
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .errors import (
    DuplicateError,
    EmptyDatasetError,
    MaskError,
    ParseError,
    SchemaError,
)

ORIGINS = ("public", "private", "test", "unknown")

FractionLike = Union[Fraction, int, float, str]


def _as_fraction(x: FractionLike) -> Fraction:
    # floats are converted through limit_denominator so 0.4 means 2/5,
    # not the exact binary expansion of 0.4
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**6)
    return Fraction(x)


def stable_seed(seed: int, key: str) -> int:
    """Derive a 63-bit sub-seed from a base seed and a string key.

    The derivation hashes rather than offsets, so results do not depend on
    the order in which keys are consumed. This is what makes per-series
    randomness identical across worker counts and processing orders.
    """
    digest = hashlib.sha256(f"{seed}:{key}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") & (2**63 - 1)


def series_rng(seed: int, key: str) -> np.random.Generator:
    """Seeded generator bound to (seed, key), independent of call order."""
    return np.random.default_rng(stable_seed(seed, key))


@dataclass(frozen=True)
class TimeSeriesRecord:
    """One complete series with a provenance tag.

    values must be finite floats of length >= 2. origin records which
    partition the series came from; "unknown" is the audit-time default
    when ground truth is not available.
    """

    id: str
    values: tuple
    origin: str = "unknown"

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ParseError("record id must be a non-empty string")
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 2:
            raise ParseError(f"series {self.id!r} has length {len(vals)}; need >= 2")
        for v in vals:
            if not isfinite(v):
                raise ParseError(f"series {self.id!r} contains a non-finite value")
        object.__setattr__(self, "values", vals)
        if self.origin not in ORIGINS:
            raise ParseError(f"unknown origin {self.origin!r}")

    def __len__(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


@dataclass(frozen=True)
class SplitSpec:
    """Partition fractions plus the shuffle seed.

    Fractions are exact rationals and must sum to 1. Floats are accepted
    for convenience and snapped to the nearest small-denominator rational.
    """

    public_fraction: FractionLike
    private_fraction: FractionLike
    test_fraction: FractionLike
    seed: int = 0

    def __post_init__(self):
        pub = _as_fraction(self.public_fraction)
        priv = _as_fraction(self.private_fraction)
        test = _as_fraction(self.test_fraction)
        for name, f in (("public", pub), ("private", priv), ("test", test)):
            if f < 0 or f > 1:
                raise ParseError(f"{name} fraction {f} outside [0, 1]")
        if pub + priv + test != 1:
            raise ParseError(f"fractions sum to {pub + priv + test}, expected 1")
        object.__setattr__(self, "public_fraction", pub)
        object.__setattr__(self, "private_fraction", priv)
        object.__setattr__(self, "test_fraction", test)


@dataclass(frozen=True)
class DatasetSplit:
    """Result of split_dataset: disjoint partitions covering the input."""

    public: tuple
    private: tuple
    test: tuple


@dataclass(frozen=True)
class MaskSpec:
    """Contiguous zero-based half-open span [start, start + width)."""

    start: int
    width: int

    def __post_init__(self):
        if int(self.start) != self.start or int(self.width) != self.width:
            raise MaskError("mask start and width must be integers")
        object.__setattr__(self, "start", int(self.start))
        object.__setattr__(self, "width", int(self.width))
        if self.start < 0:
            raise MaskError(f"mask start {self.start} is negative")
        if self.width < 1:
            raise MaskError(f"mask width {self.width} must be >= 1")

    @property
    def stop(self) -> int:
        return self.start + self.width

    def indices(self) -> range:
        return range(self.start, self.stop)


@dataclass(frozen=True)
class MaskedSeries:
    """A series with masked spans removed.

    observed holds None exactly at masked positions; masks are sorted and
    non-overlapping. source_id links back to the original record.
    """

    observed: tuple
    masks: tuple
    source_id: str

    def __post_init__(self):
        obs = tuple(
            None if v is None else float(v) for v in self.observed
        )
        object.__setattr__(self, "observed", obs)
        masks = tuple(sorted(self.masks, key=lambda m: m.start))
        object.__setattr__(self, "masks", masks)
        t = len(obs)
        prev_stop = 0
        covered = set()
        for m in masks:
            if not isinstance(m, MaskSpec):
                raise MaskError("masks must be MaskSpec instances")
            if m.start < prev_stop:
                raise MaskError(f"mask at {m.start} overlaps the previous one")
            if m.stop > t:
                raise MaskError(
                    f"mask [{m.start}, {m.stop}) exceeds series length {t}"
                )
            covered.update(m.indices())
            prev_stop = m.stop
        for i, v in enumerate(obs):
            if (v is None) != (i in covered):
                raise MaskError(
                    f"observed[{i}] disagrees with the mask layout"
                )

    def __len__(self) -> int:
        return len(self.observed)

    def masked_indices(self) -> tuple:
        out = []
        for m in self.masks:
            out.extend(m.indices())
        return tuple(out)

    def observed_indices(self) -> tuple:
        gone = set(self.masked_indices())
        return tuple(i for i in range(len(self.observed)) if i not in gone)


# ---------------------------------------------------------------------------
# CSV I/O
# ---------------------------------------------------------------------------

_LONG_HEADER = ["id", "t", "value"]


def _parse_float(text: str, where: str) -> float:
    try:
        v = float(text)
    except ValueError as exc:
        raise ParseError(f"bad float {text!r} at {where}") from exc
    if not isfinite(v):
        raise ParseError(f"non-finite value {text!r} at {where}")
    return v


def _parse_int(text: str, where: str) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise ParseError(f"bad integer {text!r} at {where}") from exc


def load_csv(path, schema: str = "long") -> list:
    """Load complete series records from a CSV file.

    schema="long": header id,t,value with one row per point; t must cover
    0..T-1 exactly once per series. schema="wide": header id,v0..v{T-1}
    with one row per series. Either schema may carry a trailing origin
    column; when present it must hold a known origin tag.

    Raises SchemaError on header mismatch, ParseError on bad cells, and
    DuplicateError when a series id repeats.
    """
    if schema not in ("long", "wide"):
        raise SchemaError(f"unknown schema {schema!r}")
    with open(path, "r", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: empty file, expected a header row")
    header = rows[0]
    body = rows[1:]
    if schema == "long":
        return _load_long(header, body, str(path))
    return _load_wide(header, body, str(path))


def _load_long(header, body, path) -> list:
    has_origin = header == _LONG_HEADER + ["origin"]
    if not has_origin and header != _LONG_HEADER:
        raise SchemaError(
            f"{path}: expected header {','.join(_LONG_HEADER)}, got {','.join(header)}"
        )
    width = len(header)
    series = {}
    origins = {}
    order = []
    for lineno, row in enumerate(body, start=2):
        if not row:
            continue
        if len(row) != width:
            raise SchemaError(f"{path}:{lineno}: expected {width} fields, got {len(row)}")
        sid = row[0]
        t = _parse_int(row[1], f"{path}:{lineno}")
        v = _parse_float(row[2], f"{path}:{lineno}")
        if sid not in series:
            series[sid] = {}
            order.append(sid)
        if t in series[sid]:
            raise DuplicateError(f"{path}:{lineno}: duplicate point ({sid!r}, t={t})")
        series[sid][t] = v
        if has_origin:
            origin = row[3]
            if origins.setdefault(sid, origin) != origin:
                raise ParseError(f"{path}:{lineno}: conflicting origin for {sid!r}")
    records = []
    for sid in order:
        points = series[sid]
        t_max = max(points)
        if set(points) != set(range(t_max + 1)):
            raise ParseError(f"{path}: series {sid!r} has gaps in its time index")
        values = tuple(points[t] for t in range(t_max + 1))
        origin = origins.get(sid, "unknown")
        if origin not in ORIGINS:
            raise ParseError(f"{path}: unknown origin {origin!r} for {sid!r}")
        records.append(TimeSeriesRecord(id=sid, values=values, origin=origin))
    return records


def _load_wide(header, body, path) -> list:
    if len(header) < 3 or header[0] != "id":
        raise SchemaError(f"{path}: wide header must start with id,v0,v1,...")
    has_origin = header[-1] == "origin"
    value_cols = header[1:-1] if has_origin else header[1:]
    expected = [f"v{i}" for i in range(len(value_cols))]
    if value_cols != expected:
        raise SchemaError(f"{path}: wide value columns must be v0..v{len(value_cols) - 1}")
    width = len(header)
    seen = set()
    records = []
    for lineno, row in enumerate(body, start=2):
        if not row:
            continue
        if len(row) != width:
            raise SchemaError(f"{path}:{lineno}: expected {width} fields, got {len(row)}")
        sid = row[0]
        if sid in seen:
            raise DuplicateError(f"{path}:{lineno}: duplicate series id {sid!r}")
        seen.add(sid)
        vals = tuple(
            _parse_float(cell, f"{path}:{lineno}") for cell in row[1 : 1 + len(value_cols)]
        )
        origin = row[-1] if has_origin else "unknown"
        if origin not in ORIGINS:
            raise ParseError(f"{path}:{lineno}: unknown origin {origin!r}")
        records.append(TimeSeriesRecord(id=sid, values=vals, origin=origin))
    return records


def write_csv(records: Sequence[TimeSeriesRecord], path, schema: str = "long",
              include_origin: bool = False) -> None:
    """Write records to CSV in the given schema (inverse of load_csv)."""
    if schema not in ("long", "wide"):
        raise SchemaError(f"unknown schema {schema!r}")
    records = list(records)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if schema == "long":
            header = _LONG_HEADER + (["origin"] if include_origin else [])
            writer.writerow(header)
            for rec in records:
                for t, v in enumerate(rec.values):
                    row = [rec.id, t, repr(v)]
                    if include_origin:
                        row.append(rec.origin)
                    writer.writerow(row)
        else:
            if records:
                t = len(records[0])
                for rec in records:
                    if len(rec) != t:
                        raise SchemaError(
                            "wide schema needs equal-length series; "
                            f"{rec.id!r} has {len(rec)} points, expected {t}"
                        )
                header = ["id"] + [f"v{i}" for i in range(t)]
            else:
                header = ["id", "v0", "v1"]
            if include_origin:
                header.append("origin")
            writer.writerow(header)
            for rec in records:
                row = [rec.id] + [repr(v) for v in rec.values]
                if include_origin:
                    row.append(rec.origin)
                writer.writerow(row)


# ---------------------------------------------------------------------------
# splitting and masking
# ---------------------------------------------------------------------------


def split_dataset(records: Sequence[TimeSeriesRecord], spec: SplitSpec) -> DatasetSplit:
    """Shuffle and partition records into public/private/test.

    Private and test sizes are floor(N * fraction); the remainder joins the
    public partition so neither the member pool nor the held-out pool is
    silently inflated. With seed fixed the assignment is deterministic.
    """
    records = list(records)
    n = len(records)
    if n == 0:
        raise EmptyDatasetError("cannot split an empty dataset")
    n_private = floor(n * spec.private_fraction)
    n_test = floor(n * spec.test_fraction)
    n_public = n - n_private - n_test
    rng = np.random.default_rng(spec.seed)
    order = rng.permutation(n)
    shuffled = [records[i] for i in order]
    pub = shuffled[:n_public]
    priv = shuffled[n_public : n_public + n_private]
    test = shuffled[n_public + n_private :]
    return DatasetSplit(
        public=tuple(replace(r, origin="public") for r in pub),
        private=tuple(replace(r, origin="private") for r in priv),
        test=tuple(replace(r, origin="test") for r in test),
    )


def apply_mask(record: TimeSeriesRecord, masks: Iterable[MaskSpec]) -> MaskedSeries:
    """Remove the masked spans from a record.

    Raises MaskError when a span exceeds the series bounds or overlaps
    another span. Masks may be given in any order.
    """
    masks = tuple(sorted(masks, key=lambda m: m.start))
    t = len(record)
    covered = set()
    prev_stop = 0
    for m in masks:
        if m.start < prev_stop:
            raise MaskError(f"mask at {m.start} overlaps the previous one")
        if m.stop > t:
            raise MaskError(f"mask [{m.start}, {m.stop}) exceeds series length {t}")
        covered.update(m.indices())
        prev_stop = m.stop
    observed = tuple(
        None if i in covered else v for i, v in enumerate(record.values)
    )
    return MaskedSeries(observed=observed, masks=masks, source_id=record.id)


def random_mask(record: TimeSeriesRecord, width: int,
                seed: Union[int, np.random.Generator]) -> MaskSpec:
    """Draw a mask of the given width with start uniform on [0, T - width]."""
    t = len(record)
    if width < 1 or width > t:
        raise MaskError(f"mask width {width} does not fit series length {t}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    start = int(rng.integers(0, t - width + 1))
    return MaskSpec(start=start, width=width)
