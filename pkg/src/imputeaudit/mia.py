"""Loss-ratio membership inference and the naive-loss baseline.

A suspect series is masked, imputed by the audited target model and by a
reference model, and each reconstruction is scored with DTW against the
original. The membership signal is the ratio R = L_target / L_reference:
memorized series reconstruct unusually well under the target, pushing R
toward 0, while the reference calibrates away per-series difficulty. The
decision rule is member iff R <= theta (low ratio means memorized; the
source derivation states the rule both ways, the algorithmic form wins).
For ranking and ROC purposes the oriented score is s = -R, so higher
always means more member-like.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from math import ceil, isfinite, sqrt
from typing import Optional, Sequence

from .dataset import MaskSpec, TimeSeriesRecord, apply_mask
from .errors import (
    CalibrationError,
    ConfigError,
    DegenerateReferenceError,
    IoError,
    ParseError,
    SchemaError,
)
from .imputers import ImputerHandle, impute
from .signal_math import DtwConfig, dtw_distance

DEFAULT_EPSILON = 1e-12

_POLICY_KINDS = ("mean_std", "top_fraction", "fixed")


@dataclass(frozen=True)
class MembershipScore:
    """Per-series attack output: both losses, their ratio, and the mask."""

    series_id: str
    loss_target: float
    loss_reference: float
    ratio: float
    mask_used: MaskSpec

    def __post_init__(self):
        for name in ("loss_target", "loss_reference", "ratio"):
            v = getattr(self, name)
            if not isfinite(v):
                raise ParseError(f"{name} must be finite, got {v!r}")
        if self.loss_target < 0 or self.loss_reference < 0:
            raise ParseError("losses must be nonnegative")
        if self.loss_reference > 0 and self.ratio != self.loss_target / self.loss_reference:
            raise ParseError("ratio does not equal loss_target / loss_reference")

    @property
    def signal(self) -> float:
        """Oriented ROC score: higher = more member-like."""
        return -self.ratio


@dataclass(frozen=True)
class ThresholdPolicy:
    """How to pick theta: mean_std, top_fraction, or fixed.

    Only the fields of the active kind are read. Build via the
    classmethods or parse() for CLI strings like "top:0.25",
    "mean_std:2", "fixed:0.7".
    """

    kind: str
    n_sigmas: float = 2.0
    fraction: float = 0.25
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in _POLICY_KINDS:
            raise ConfigError(f"unknown threshold policy {self.kind!r}")
        if self.kind == "top_fraction" and not 0 < self.fraction < 1:
            raise ConfigError("top_fraction needs 0 < fraction < 1")
        if self.kind == "mean_std" and not isfinite(self.n_sigmas):
            raise ConfigError("n_sigmas must be finite")
        if self.kind == "fixed" and not isfinite(self.value):
            raise ConfigError("fixed threshold must be finite")

    @classmethod
    def mean_std(cls, n_sigmas: float = 2.0) -> "ThresholdPolicy":
        return cls(kind="mean_std", n_sigmas=n_sigmas)

    @classmethod
    def top_fraction(cls, fraction: float = 0.25) -> "ThresholdPolicy":
        return cls(kind="top_fraction", fraction=fraction)

    @classmethod
    def fixed(cls, value: float) -> "ThresholdPolicy":
        return cls(kind="fixed", value=value)

    @classmethod
    def parse(cls, text: str) -> "ThresholdPolicy":
        kind, sep, arg = text.partition(":")
        try:
            if kind == "top":
                return cls.top_fraction(float(arg) if sep else 0.25)
            if kind == "mean_std":
                return cls.mean_std(float(arg) if sep else 2.0)
            if kind == "fixed":
                if not sep:
                    raise ConfigError("fixed policy needs a value, e.g. fixed:0.7")
                return cls.fixed(float(arg))
        except ValueError as exc:
            raise ConfigError(f"bad threshold policy argument in {text!r}") from exc
        raise ConfigError(f"unknown threshold policy {text!r}")

    def describe(self) -> str:
        if self.kind == "mean_std":
            return f"mean_std:{self.n_sigmas!r}"
        if self.kind == "top_fraction":
            return f"top:{self.fraction!r}"
        return f"fixed:{self.value!r}"


def _loss(prediction, x: TimeSeriesRecord, mask: MaskSpec, dtw_cfg: DtwConfig,
          masked_only: bool) -> float:
    if masked_only:
        return dtw_distance(prediction[mask.start : mask.stop],
                            x.values[mask.start : mask.stop], dtw_cfg)
    return dtw_distance(prediction, x.values, dtw_cfg)


def lbrm_score(target: ImputerHandle, reference: ImputerHandle,
               x: TimeSeriesRecord, mask: MaskSpec,
               dtw_cfg: DtwConfig = DtwConfig(), *, masked_only: bool = False,
               epsilon: float = DEFAULT_EPSILON) -> MembershipScore:
    """Mask, impute with both models, and return the loss ratio.

    Losses are DTW over the full series (reconstruction vs original);
    masked_only=True restricts both losses to the masked window for
    ablation. A reference loss below epsilon means the ratio is undefined
    and raises DegenerateReferenceError rather than fabricating a score.
    """
    masked = apply_mask(x, [mask])
    pred_target = impute(target, masked)
    pred_reference = impute(reference, masked)
    loss_t = _loss(pred_target, x, mask, dtw_cfg, masked_only)
    loss_r = _loss(pred_reference, x, mask, dtw_cfg, masked_only)
    if loss_r < epsilon:
        raise DegenerateReferenceError(
            f"reference loss {loss_r!r} below epsilon {epsilon!r} for "
            f"series {x.id!r}; ratio undefined"
        )
    return MembershipScore(
        series_id=x.id,
        loss_target=loss_t,
        loss_reference=loss_r,
        ratio=loss_t / loss_r,
        mask_used=mask,
    )


def naive_loss_score(target: ImputerHandle, x: TimeSeriesRecord, mask: MaskSpec,
                     dtw_cfg: DtwConfig = DtwConfig(), *,
                     masked_only: bool = False) -> float:
    """Target loss alone (lower = more member-like); no reference model."""
    masked = apply_mask(x, [mask])
    prediction = impute(target, masked)
    return _loss(prediction, x, mask, dtw_cfg, masked_only)


def calibrate_threshold(scores: Sequence[float], policy: ThresholdPolicy) -> float:
    """Pick theta from a score collection according to the policy.

    mean_std calibrates on non-member ratios: theta = mean + n_sigmas *
    sample std (divisor N-1). top_fraction calibrates on the suspect-set
    ratios: theta is the ceil(q*N)-th smallest ratio, so at least that
    many suspects satisfy R <= theta (exact-count selection with
    tie-break lives in the risk-selection step). fixed passes through.
    """
    values = [float(s) for s in scores]
    if policy.kind == "fixed":
        return policy.value
    if policy.kind == "mean_std":
        if len(values) < 2:
            raise CalibrationError(
                f"mean_std needs >= 2 scores, got {len(values)}"
            )
        n = len(values)
        mean = sum(values) / n
        var = sum((v - mean) ** 2 for v in values) / (n - 1)
        return mean + policy.n_sigmas * sqrt(var)
    if not values:
        raise CalibrationError("top_fraction needs a non-empty suspect score set")
    k = ceil(policy.fraction * len(values))
    return sorted(values)[k - 1]


def classify_membership(score: MembershipScore, theta: float) -> int:
    """1 iff ratio <= theta (the boundary counts as member)."""
    return 1 if score.ratio <= theta else 0


# ---------------------------------------------------------------------------
# score file I/O
# ---------------------------------------------------------------------------

_SCORE_HEADER = ["series_id", "loss_target", "loss_reference", "ratio",
                 "mask_start", "mask_width"]


def write_scores_csv(scores: Sequence[MembershipScore], path,
                     labels: Optional[dict] = None) -> None:
    """Write the score file; labels (id -> 0/1), when given, add a column."""
    header = list(_SCORE_HEADER)
    if labels is not None:
        header.append("label")
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for s in scores:
                row = [s.series_id, repr(s.loss_target), repr(s.loss_reference),
                       repr(s.ratio), s.mask_used.start, s.mask_used.width]
                if labels is not None:
                    row.append(labels[s.series_id])
                writer.writerow(row)
    except OSError as exc:
        raise IoError(f"cannot write score file {path}: {exc}") from exc


def read_scores_csv(path):
    """Read a score file back; returns (scores, labels or None)."""
    with open(path, "r", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: empty score file")
    header = rows[0]
    if header == _SCORE_HEADER:
        has_label = False
    elif header == _SCORE_HEADER + ["label"]:
        has_label = True
    else:
        raise SchemaError(f"{path}: unexpected score file header {','.join(header)}")
    scores = []
    labels = {} if has_label else None
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise SchemaError(f"{path}:{lineno}: wrong field count")
        try:
            score = MembershipScore(
                series_id=row[0],
                loss_target=float(row[1]),
                loss_reference=float(row[2]),
                ratio=float(row[3]),
                mask_used=MaskSpec(start=int(row[4]), width=int(row[5])),
            )
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
        scores.append(score)
        if has_label:
            if row[6] not in ("0", "1"):
                raise ParseError(f"{path}:{lineno}: label must be 0 or 1")
            labels[row[0]] = int(row[6])
    return scores, labels
