"""Long-format series CSV reader.

The on-disk format is the audit tooling's exchange format: a header of
``id,t,value`` (an extra ``origin`` column is tolerated and ignored),
one row per time step, steps numbered from zero within each series.
Every architecture here operates on a fixed series length, so all
series in one file must have the same length.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import List, Tuple

import numpy as np

from .errors import DataError

_REQUIRED = ["id", "t", "value"]


def load_series_csv(path) -> Tuple[List[str], np.ndarray]:
    """Return (ids, values) where values has shape (n_series, length)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise DataError(f"{path}: empty file")
    header = rows[0]
    if header[:3] != _REQUIRED or len(header) > 4:
        raise DataError(f"{path}: expected header id,t,value[,origin], "
                        f"got {','.join(header)}")
    series: dict = {}
    order: List[str] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} "
                            f"columns, got {len(row)}")
        sid, t_text, value_text = row[0], row[1], row[2]
        try:
            t = int(t_text)
            value = float(value_text)
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from exc
        if not np.isfinite(value):
            raise DataError(f"{path}:{lineno}: non-finite value")
        if sid not in series:
            series[sid] = []
            order.append(sid)
        if t != len(series[sid]):
            raise DataError(f"{path}:{lineno}: series {sid!r} expected "
                            f"t={len(series[sid])}, got t={t}")
        series[sid].append(value)
    if not order:
        raise DataError(f"{path}: no data rows")
    lengths = {len(series[sid]) for sid in order}
    if len(lengths) != 1:
        raise DataError(f"{path}: series lengths differ "
                        f"({sorted(lengths)}); all must match")
    values = np.array([series[sid] for sid in order], dtype=np.float64)
    return order, values
