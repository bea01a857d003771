"""End-to-end audit orchestration.

Chains the stages of a black-box audit: a parity check that the
reference model is a fair stand-in for the target, membership scoring
over a suspect pool, ranking by membership ratio, a window attack on an
unseen region of each series, and the correlation between the two
leakage signals. Emits one JSON report plus CSV sidecars so every
reported number can be traced back to per-series rows on disk.

Per-series work inside each stage runs on a thread pool; results are
collected by input position and every reduction sorts by series id
first, so worker count never changes any output byte.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import ceil
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .aia import AiaAggregate, AiaConfig, WindowResult, aggregate_windows, \
    attack_window, write_window_csv
from .dataset import MaskSpec, SplitSpec, TimeSeriesRecord, apply_mask, \
    random_mask, series_rng, stable_seed
from .errors import ConfigError, DegenerateAggregateError, \
    DegenerateInputError, DegenerateLabelsError, DegenerateReferenceError, \
    DuplicateError, EmptyDatasetError, IoError, SkippedSeriesError
from .imputers import ImputerHandle, impute
from .metrics import DEFAULT_PERMUTATIONS, MetricSummary, auroc, pearson, \
    roc_curve, tpr_at_fpr, tpr_at_top_fraction, write_roc_csv
from .mia import DEFAULT_EPSILON, MembershipScore, ThresholdPolicy, \
    calibrate_threshold, classify_membership, lbrm_score, write_scores_csv
from .signal_math import DtwConfig

REPORT_SCHEMA_VERSION = 1

SCENARIOS = ("scratch", "finetune", "synthetic")

# dataset-split presets: (public, private, test) fractions; the private
# partition trains the target, the public one primes the reference
SCENARIO_SPLITS = {
    "scratch": ("2/5", "2/5", "1/5"),
    "finetune": ("3/5", "1/5", "1/5"),
}


def scenario_split_spec(scenario: str, seed: int = 0) -> SplitSpec:
    """Split preset for a named training scenario."""
    if scenario not in SCENARIO_SPLITS:
        raise ConfigError(f"scenario {scenario!r} has no split preset")
    public, private, test = SCENARIO_SPLITS[scenario]
    return SplitSpec(public_fraction=public, private_fraction=private,
                     test_fraction=test, seed=seed)


def _map_series(fn: Callable, items: Sequence, workers: int) -> List:
    """Apply fn to each item, in parallel, preserving input order."""
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _check_unique_ids(records: Sequence[TimeSeriesRecord]) -> None:
    seen = set()
    for x in records:
        if x.id in seen:
            raise DuplicateError(f"duplicate series id {x.id!r}")
        seen.add(x.id)


# ---------------------------------------------------------------------------
# parity check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParityResult:
    """MAE of both models on the same randomly masked points.

    relative_gap is |mae_target - mae_reference| / mae_reference, or None
    when the reference error is zero while the difference is not.
    """

    mae_target: float
    mae_reference: float
    n_points: int
    relative_gap: Optional[float]
    warning: bool


def parity_check(target: ImputerHandle, reference: ImputerHandle,
                 holdout: Sequence[TimeSeriesRecord],
                 mask_fraction: float = 0.2, *, seed: int = 0,
                 workers: int = 1) -> ParityResult:
    """Compare reconstruction MAE of target and reference on a holdout.

    Masks a seeded random fraction of each series pointwise, has both
    models fill the gaps, and pools absolute errors across all series.
    A relative gap above 0.25 sets the warning flag; the check itself
    never fails on model quality.
    """
    records = list(holdout)
    if not records:
        raise EmptyDatasetError("parity check needs a nonempty holdout")
    if not 0.0 < mask_fraction < 1.0:
        raise ConfigError(f"mask_fraction must be in (0, 1), got {mask_fraction}")
    _check_unique_ids(records)

    def errors_one(x: TimeSeriesRecord) -> Tuple[List[float], List[float]]:
        t = len(x)
        k = min(max(1, round(t * mask_fraction)), t - 1)
        rng = series_rng(seed, f"parity:{x.id}")
        positions = np.sort(rng.choice(t, size=k, replace=False))
        masks = [MaskSpec(start=int(p), width=1) for p in positions]
        masked = apply_mask(x, masks)
        pred_t = impute(target, masked)
        pred_r = impute(reference, masked)
        err_t = [abs(pred_t[p] - x.values[p]) for p in positions]
        err_r = [abs(pred_r[p] - x.values[p]) for p in positions]
        return err_t, err_r

    target_errors: List[float] = []
    reference_errors: List[float] = []
    for err_t, err_r in _map_series(errors_one, records, workers):
        target_errors.extend(err_t)
        reference_errors.extend(err_r)
    mae_t = sum(target_errors) / len(target_errors)
    mae_r = sum(reference_errors) / len(reference_errors)
    diff = abs(mae_t - mae_r)
    if diff == 0.0:
        gap: Optional[float] = 0.0
        warning = False
    elif mae_r == 0.0:
        gap = None
        warning = True
    else:
        gap = diff / mae_r
        warning = gap > 0.25
    return ParityResult(mae_target=mae_t, mae_reference=mae_r,
                        n_points=len(target_errors), relative_gap=gap,
                        warning=warning)


# ---------------------------------------------------------------------------
# membership stage
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MiaConfig:
    """Knobs for the membership stage."""

    u_width: int = 48
    theta: ThresholdPolicy = field(
        default_factory=lambda: ThresholdPolicy.top_fraction(0.25))
    dtw: DtwConfig = field(default_factory=DtwConfig)
    seed: int = 0
    masked_only: bool = False
    epsilon: float = DEFAULT_EPSILON
    workers: int = 1

    def __post_init__(self):
        if self.u_width < 1:
            raise ConfigError(f"u_width must be >= 1, got {self.u_width}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True)
class MiaRun:
    """Everything the membership stage produced.

    Metric summaries are present only in evaluation mode (labels given)
    and None when the labels turned out single-class; audit mode leaves
    them None and still carries scores, the calibrated threshold, and
    per-series decisions.
    """

    scores: Tuple[MembershipScore, ...]
    labels: Optional[Dict[str, int]]
    theta: float
    decisions: Dict[str, int]
    lbrm: Optional[MetricSummary]
    naive: Optional[MetricSummary]
    excluded: Tuple[Tuple[str, str], ...]
    degenerate_events: Tuple[str, ...]


def _metric_summary(scored: Sequence[Tuple[float, int]],
                    ids: Sequence[str]) -> MetricSummary:
    curve = roc_curve(scored)
    return MetricSummary(
        auroc=auroc(curve),
        tpr_at_0_1=tpr_at_fpr(curve, 0.1),
        tpr_at_top25=tpr_at_top_fraction(scored, 0.25, ids=ids),
        roc=curve,
    )


def run_mia(target: ImputerHandle, reference: ImputerHandle,
            suspects: Sequence[TimeSeriesRecord],
            cfg: MiaConfig = MiaConfig(), *,
            labels: Optional[Mapping[str, int]] = None) -> MiaRun:
    """Score every suspect with one seeded random mask each.

    With labels the run is an evaluation: ROC metrics are computed for
    the ratio attack and for the naive raw-loss baseline, both read off
    the same score rows. Without labels only scores and threshold
    decisions are produced. A series whose reference loss collapses, or
    that is too short for the mask, is excluded and counted rather than
    failing the run.
    """
    records = list(suspects)
    if not records:
        raise EmptyDatasetError("no suspects to score")
    _check_unique_ids(records)
    label_map: Optional[Dict[str, int]] = None
    if labels is not None:
        label_map = {}
        for x in records:
            if x.id not in labels:
                raise ConfigError(f"suspect {x.id!r} has no label")
            value = int(labels[x.id])
            if value not in (0, 1):
                raise ConfigError(f"label for {x.id!r} must be 0 or 1")
            label_map[x.id] = value

    def score_suspect(x: TimeSeriesRecord) -> MembershipScore:
        if len(x) < cfg.u_width:
            raise SkippedSeriesError(
                f"series {x.id!r} is shorter than the mask width",
                reason="too_short")
        rng = series_rng(cfg.seed, f"mia-mask:{x.id}")
        mask = random_mask(x, cfg.u_width, rng)
        return lbrm_score(target, reference, x, mask, cfg.dtw,
                          masked_only=cfg.masked_only, epsilon=cfg.epsilon)

    def score_one(x: TimeSeriesRecord):
        try:
            return ("ok", score_suspect(x))
        except SkippedSeriesError as exc:
            return ("skip", x.id, exc.reason)
        except DegenerateReferenceError:
            return ("skip", x.id, "degenerate_reference")

    scores: List[MembershipScore] = []
    excluded: List[Tuple[str, str]] = []
    for row in _map_series(score_one, records, cfg.workers):
        if row[0] == "ok":
            scores.append(row[1])
        else:
            excluded.append((row[1], row[2]))
    if not scores:
        raise EmptyDatasetError("every suspect was excluded from scoring")

    theta = calibrate_threshold([s.ratio for s in scores], cfg.theta)
    decisions = {s.series_id: classify_membership(s, theta) for s in scores}
    events = [f"mia:excluded:{sid}:{reason}" for sid, reason in excluded]

    lbrm_summary = naive_summary = None
    kept_labels = None
    if label_map is not None:
        kept_labels = {s.series_id: label_map[s.series_id] for s in scores}
        ids = [s.series_id for s in scores]
        try:
            lbrm_summary = _metric_summary(
                [(s.signal, kept_labels[s.series_id]) for s in scores], ids)
            naive_summary = _metric_summary(
                [(-s.loss_target, kept_labels[s.series_id]) for s in scores],
                ids)
        except DegenerateLabelsError:
            lbrm_summary = naive_summary = None
            events.append("mia:single_class_labels")

    return MiaRun(
        scores=tuple(scores),
        labels=kept_labels,
        theta=theta,
        decisions=decisions,
        lbrm=lbrm_summary,
        naive=naive_summary,
        excluded=tuple(excluded),
        degenerate_events=tuple(events),
    )


# ---------------------------------------------------------------------------
# risk selection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RiskSelection:
    """Ranking by ascending ratio and the flagged top slice."""

    q: float
    ranked_ids: Tuple[str, ...]
    selected_ids: Tuple[str, ...]


def select_top_risk(scores: Sequence[MembershipScore],
                    q: float = 0.25) -> RiskSelection:
    """Rank series by ascending ratio (lowest = highest risk), keep top q.

    Ties break on series id so the selection is deterministic; the
    selected slice is the ceil(q * N)-element prefix of the ranking.
    """
    rows = list(scores)
    if not rows:
        raise EmptyDatasetError("cannot select from an empty score list")
    if not 0.0 < q <= 1.0:
        raise ConfigError(f"q must be in (0, 1], got {q}")
    _check_unique_ids_from(rows)
    ranked = sorted(rows, key=lambda s: (s.ratio, s.series_id))
    ranked_ids = tuple(s.series_id for s in ranked)
    k = ceil(q * len(ranked_ids))
    return RiskSelection(q=q, ranked_ids=ranked_ids,
                         selected_ids=ranked_ids[:k])


def _check_unique_ids_from(scores: Sequence[MembershipScore]) -> None:
    seen = set()
    for s in scores:
        if s.series_id in seen:
            raise DuplicateError(f"duplicate series id {s.series_id!r}")
        seen.add(s.series_id)


# ---------------------------------------------------------------------------
# linkage stage: membership ratio then window attack on unseen data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinkageConfig:
    """Knobs for the combined ratio-then-window-attack stage."""

    u_width: int = 48
    q: float = 0.25
    aia: AiaConfig = field(default_factory=AiaConfig)
    dtw: DtwConfig = field(default_factory=DtwConfig)
    seed: int = 0
    masked_only: bool = False
    epsilon: float = DEFAULT_EPSILON
    workers: int = 1
    correlation_method: str = "permutation"
    n_permutations: int = DEFAULT_PERMUTATIONS

    def __post_init__(self):
        if self.u_width < 1:
            raise ConfigError(f"u_width must be >= 1, got {self.u_width}")
        if not 0.0 < self.q <= 1.0:
            raise ConfigError(f"q must be in (0, 1], got {self.q}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True)
class SeriesLinkage:
    """One series' membership score and its unseen-window attack."""

    score: MembershipScore
    window: Tuple[int, int]
    target: WindowResult
    evaluation: WindowResult

    @property
    def series_id(self) -> str:
        return self.score.series_id


@dataclass(frozen=True)
class CorrelationResult:
    """Pearson r and p between -ratio and window-attack quality."""

    r_precision: Optional[float]
    p_precision: Optional[float]
    r_recall: Optional[float]
    p_recall: Optional[float]


@dataclass(frozen=True)
class LinkageRun:
    """Per-series linkage rows plus the stage's aggregates."""

    per_series: Tuple[SeriesLinkage, ...]
    selection: RiskSelection
    aia_all: Optional[AiaAggregate]
    aia_topq: Optional[AiaAggregate]
    eval_all: Optional[AiaAggregate]
    eval_topq: Optional[AiaAggregate]
    correlation: CorrelationResult
    skipped: Tuple[Tuple[str, str], ...]
    degenerate_events: Tuple[str, ...]


def _choose_unseen_window(length: int, mask: MaskSpec, cfg: AiaConfig,
                          rng: np.random.Generator) -> Optional[int]:
    """Pick a stride-aligned window disjoint from the mask.

    Candidates keep at least one stride of separation on either side so
    mask-boundary artifacts cannot bleed into the attacked window.
    """
    w_len, stride = cfg.window, cfg.stride
    candidates = [w for w in range(0, length - w_len + 1, stride)
                  if w + w_len + stride <= mask.start
                  or w >= mask.stop + stride]
    if not candidates:
        return None
    return int(candidates[int(rng.integers(0, len(candidates)))])


def _safe_aggregate(results: Sequence[WindowResult], name: str,
                    events: Optional[List[str]]) -> Optional[AiaAggregate]:
    """Aggregate or return None; events is None for the comparison-only
    evaluation aggregates, whose degeneracy is an expected finding rather
    than a lost deliverable."""
    try:
        return aggregate_windows(results)
    except DegenerateAggregateError:
        if events is not None:
            events.append(f"linkage:{name}_aggregate_degenerate")
        return None


def _correlate(pairs: List[Tuple[float, float]], name: str, events: List[str],
               cfg: LinkageConfig) -> Tuple[Optional[float], Optional[float]]:
    if len(pairs) < 3:
        events.append(f"linkage:correlation_{name}_too_few_pairs")
        return None, None
    xs = [a for a, _ in pairs]
    ys = [b for _, b in pairs]
    try:
        return pearson(xs, ys, p_method=cfg.correlation_method,
                       n_permutations=cfg.n_permutations,
                       seed=stable_seed(cfg.seed, f"correlation:{name}"))
    except DegenerateInputError:
        events.append(f"linkage:correlation_{name}_degenerate")
        return None, None


def run_mia_then_aia(target: ImputerHandle, reference: ImputerHandle,
                     eval_model: ImputerHandle,
                     data: Sequence[TimeSeriesRecord],
                     cfg: LinkageConfig = LinkageConfig()) -> LinkageRun:
    """Membership ratio from a seen mask, window attack on unseen data.

    Each series gets one seeded mask for the ratio and one stride-aligned
    window, disjoint from that mask, for the peak attack. The window
    attack runs under both the target and the evaluation model so their
    gap is measurable on exactly the same windows. Aggregates cover all
    series and the top-q slice of the ratio ranking; correlations pair
    -ratio against the target's per-series precision and recall. Series
    that cannot host both regions are skipped and counted.
    """
    records = list(data)
    if not records:
        raise EmptyDatasetError("no series to audit")
    _check_unique_ids(records)

    def link_series(x: TimeSeriesRecord) -> SeriesLinkage:
        if len(x) < cfg.u_width:
            raise SkippedSeriesError(
                f"series {x.id!r} is shorter than the mask width",
                reason="too_short")
        rng = series_rng(cfg.seed, f"link:{x.id}")
        mask = random_mask(x, cfg.u_width, rng)
        start = _choose_unseen_window(len(x), mask, cfg.aia, rng)
        if start is None:
            raise SkippedSeriesError(
                f"series {x.id!r} has no window disjoint from its mask",
                reason="no_unseen_window")
        score = lbrm_score(target, reference, x, mask, cfg.dtw,
                           masked_only=cfg.masked_only, epsilon=cfg.epsilon)
        interval = (start, start + cfg.aia.window)
        return SeriesLinkage(
            score=score,
            window=interval,
            target=attack_window(target, x, interval, cfg.aia),
            evaluation=attack_window(eval_model, x, interval, cfg.aia),
        )

    def link_one(x: TimeSeriesRecord):
        try:
            return ("ok", link_series(x))
        except SkippedSeriesError as exc:
            return ("skip", x.id, exc.reason)
        except DegenerateReferenceError:
            return ("skip", x.id, "degenerate_reference")

    rows: List[SeriesLinkage] = []
    skipped: List[Tuple[str, str]] = []
    for row in _map_series(link_one, records, cfg.workers):
        if row[0] == "ok":
            rows.append(row[1])
        else:
            skipped.append((row[1], row[2]))
    if not rows:
        raise EmptyDatasetError("every series was skipped")

    events = [f"linkage:skipped:{sid}:{reason}" for sid, reason in skipped]
    selection = select_top_risk([r.score for r in rows], cfg.q)
    chosen = set(selection.selected_ids)
    top_rows = [r for r in rows if r.series_id in chosen]

    aia_all = _safe_aggregate([r.target for r in rows], "all", events)
    aia_topq = _safe_aggregate([r.target for r in top_rows], "topq", events)
    eval_all = _safe_aggregate([r.evaluation for r in rows], "eval_all",
                               None)
    eval_topq = _safe_aggregate([r.evaluation for r in top_rows],
                                "eval_topq", None)

    ordered = sorted(rows, key=lambda r: r.series_id)
    precision_pairs = [(r.score.signal, r.target.precision)
                       for r in ordered if r.target.precision is not None]
    recall_pairs = [(r.score.signal, r.target.recall)
                    for r in ordered if r.target.recall is not None]
    r_p, p_p = _correlate(precision_pairs, "precision", events, cfg)
    r_r, p_r = _correlate(recall_pairs, "recall", events, cfg)

    return LinkageRun(
        per_series=tuple(rows),
        selection=selection,
        aia_all=aia_all,
        aia_topq=aia_topq,
        eval_all=eval_all,
        eval_topq=eval_topq,
        correlation=CorrelationResult(r_precision=r_p, p_precision=p_p,
                                      r_recall=r_r, p_recall=p_r),
        skipped=tuple(skipped),
        degenerate_events=tuple(events),
    )


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AuditReport:
    """The assembled report: one dict per block, None when absent."""

    scenario: str
    mia: Optional[dict]
    naive: Optional[dict]
    aia_all: Optional[dict]
    aia_topq: Optional[dict]
    correlation: Optional[dict]
    parity: Optional[dict]
    config_echo: Dict[str, object]
    degenerate_events: Tuple[str, ...] = ()

    @property
    def exit_code(self) -> int:
        """0 for a clean run, 2 when degenerate events were recorded."""
        return 2 if self.degenerate_events else 0

    def to_dict(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "scenario": self.scenario,
            "mia": self.mia,
            "naive": self.naive,
            "aia_all": self.aia_all,
            "aia_topq": self.aia_topq,
            "correlation": self.correlation,
            "parity": self.parity,
            "degenerate_events": list(self.degenerate_events),
            "config_echo": self.config_echo,
        }


def _sig12(value: float) -> float:
    return float(f"{value:.12g}")


def _rounded(obj):
    """Round every float to 12 significant digits, recursively."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return _sig12(obj)
    if isinstance(obj, dict):
        return {key: _rounded(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_rounded(value) for value in obj]
    raise ConfigError(f"cannot serialize {type(obj).__name__} in the report")


def _summary_dict(summary: Optional[MetricSummary],
                  roc_path: Optional[str]) -> Optional[dict]:
    if summary is None:
        return None
    return {
        "auroc": summary.auroc,
        "tpr_at_0_1": summary.tpr_at_0_1,
        "tpr_at_top25": summary.tpr_at_top25,
        "roc_path": roc_path,
    }


def _aggregate_dict(agg: Optional[AiaAggregate],
                    evaluation: Optional[AiaAggregate],
                    windows_path: Optional[str],
                    extra: Optional[dict] = None) -> Optional[dict]:
    if agg is None:
        return None

    def core(a: AiaAggregate) -> dict:
        return {
            "precision_mean": a.precision_mean,
            "precision_std": a.precision_std,
            "recall_mean": a.recall_mean,
            "recall_std": a.recall_std,
            "n_windows": a.n_windows,
            "degenerate_precision_count": a.degenerate_precision_count,
            "degenerate_recall_count": a.degenerate_recall_count,
        }

    block = core(agg)
    block["evaluation"] = core(evaluation) if evaluation is not None else None
    block["windows_path"] = windows_path
    if extra:
        block.update(extra)
    return block


def emit_report(outdir, *, scenario: str, config_echo: Mapping[str, object],
                mia_run: Optional[MiaRun] = None,
                linkage_run: Optional[LinkageRun] = None,
                parity_train: Optional[ParityResult] = None,
                parity_test: Optional[ParityResult] = None,
                report_name: str = "report.json") -> AuditReport:
    """Write the JSON report and its CSV sidecars into outdir.

    At least one stage result must be supplied. Sidecars land next to
    the report and are referenced by relative path, so the directory can
    be archived as a unit. All floats are serialized with 12 significant
    digits; absent blocks serialize as null.
    """
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}")
    if mia_run is None and linkage_run is None \
            and parity_train is None and parity_test is None:
        raise ConfigError("emit_report needs at least one stage result")
    out = Path(outdir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create report directory {out}: {exc}") from exc

    events: List[str] = []
    mia_block = naive_block = None
    if mia_run is not None:
        events.extend(mia_run.degenerate_events)
        write_scores_csv(mia_run.scores, out / "scores.csv",
                         labels=mia_run.labels)
        roc_lbrm = roc_naive = None
        if mia_run.lbrm is not None:
            roc_lbrm = "roc_lbrm.csv"
            write_roc_csv(mia_run.lbrm.roc, out / roc_lbrm)
        if mia_run.naive is not None:
            roc_naive = "roc_naive.csv"
            write_roc_csv(mia_run.naive.roc, out / roc_naive)
        mia_block = _summary_dict(mia_run.lbrm, roc_lbrm)
        naive_block = _summary_dict(mia_run.naive, roc_naive)

    aia_all_block = aia_topq_block = correlation_block = None
    if linkage_run is not None:
        events.extend(linkage_run.degenerate_events)
        write_scores_csv([r.score for r in linkage_run.per_series],
                         out / "linkage_scores.csv")
        write_window_csv([r.target for r in linkage_run.per_series],
                         out / "windows_target.csv")
        write_window_csv([r.evaluation for r in linkage_run.per_series],
                         out / "windows_evaluation.csv")
        aia_all_block = _aggregate_dict(
            linkage_run.aia_all, linkage_run.eval_all, "windows_target.csv")
        aia_topq_block = _aggregate_dict(
            linkage_run.aia_topq, linkage_run.eval_topq, "windows_target.csv",
            extra={
                "q": linkage_run.selection.q,
                "selected_ids": list(linkage_run.selection.selected_ids),
            })
        c = linkage_run.correlation
        correlation_block = {
            "r_precision": c.r_precision,
            "p_precision": c.p_precision,
            "r_recall": c.r_recall,
            "p_recall": c.p_recall,
        }

    parity_block = None
    if parity_train is not None or parity_test is not None:
        parity_block = {
            "mae_target_train":
                None if parity_train is None else parity_train.mae_target,
            "mae_target_test":
                None if parity_test is None else parity_test.mae_target,
            "mae_reference_train":
                None if parity_train is None else parity_train.mae_reference,
            "mae_reference_test":
                None if parity_test is None else parity_test.mae_reference,
            "warning": bool(parity_test is not None and parity_test.warning),
        }

    report = AuditReport(
        scenario=scenario,
        mia=mia_block,
        naive=naive_block,
        aia_all=aia_all_block,
        aia_topq=aia_topq_block,
        correlation=correlation_block,
        parity=parity_block,
        config_echo=dict(config_echo),
        degenerate_events=tuple(events),
    )
    payload = _rounded(report.to_dict())
    try:
        text = json.dumps(payload, indent=2, allow_nan=False)
    except ValueError as exc:
        raise ConfigError(f"report contains nonfinite values: {exc}") from exc
    try:
        (out / report_name).write_text(text + "\n")
    except OSError as exc:
        raise IoError(f"cannot write report {out / report_name}: {exc}") from exc
    return report


def read_report(path) -> dict:
    """Load a report JSON written by emit_report."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IoError(f"cannot read report {path}: {exc}") from exc
    return json.loads(text)


# ---------------------------------------------------------------------------
# one-call audit
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PipelineConfig:
    """Full-audit configuration; defaults mirror the standard recipe."""

    scenario: str = "synthetic"
    u_width: int = 48
    q: float = 0.25
    theta: ThresholdPolicy = field(
        default_factory=lambda: ThresholdPolicy.top_fraction(0.25))
    dtw: DtwConfig = field(default_factory=DtwConfig)
    aia: AiaConfig = field(default_factory=AiaConfig)
    mask_fraction: float = 0.2
    seed: int = 0
    workers: int = 1
    masked_only: bool = False
    epsilon: float = DEFAULT_EPSILON
    correlation_method: str = "permutation"
    n_permutations: int = DEFAULT_PERMUTATIONS

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}")

    def mia_config(self) -> MiaConfig:
        return MiaConfig(u_width=self.u_width, theta=self.theta,
                         dtw=self.dtw, seed=self.seed,
                         masked_only=self.masked_only, epsilon=self.epsilon,
                         workers=self.workers)

    def linkage_config(self) -> LinkageConfig:
        return LinkageConfig(u_width=self.u_width, q=self.q, aia=self.aia,
                             dtw=self.dtw, seed=self.seed,
                             masked_only=self.masked_only,
                             epsilon=self.epsilon, workers=self.workers,
                             correlation_method=self.correlation_method,
                             n_permutations=self.n_permutations)


def run_full_audit(target: ImputerHandle, reference: ImputerHandle,
                   eval_model: ImputerHandle,
                   suspects: Sequence[TimeSeriesRecord],
                   outdir, cfg: PipelineConfig = PipelineConfig(), *,
                   labels: Optional[Mapping[str, int]] = None,
                   parity_train: Optional[Sequence[TimeSeriesRecord]] = None,
                   parity_holdout: Optional[Sequence[TimeSeriesRecord]] = None,
                   config_echo: Optional[Mapping[str, object]] = None
                   ) -> AuditReport:
    """Run every stage against one suspect pool and emit the report.

    parity_train measures both models on data the target trained on,
    parity_holdout on data neither saw; only the holdout comparison can
    raise the parity warning. Either may be omitted.
    """
    train_res = None
    if parity_train:
        train_res = parity_check(target, reference, parity_train,
                                 cfg.mask_fraction, seed=cfg.seed,
                                 workers=cfg.workers)
    test_res = None
    if parity_holdout:
        test_res = parity_check(target, reference, parity_holdout,
                                cfg.mask_fraction, seed=cfg.seed,
                                workers=cfg.workers)
    mia_run = run_mia(target, reference, suspects, cfg.mia_config(),
                      labels=labels)
    linkage_run = run_mia_then_aia(target, reference, eval_model, suspects,
                                   cfg.linkage_config())
    return emit_report(
        outdir,
        scenario=cfg.scenario,
        config_echo=dict(config_echo) if config_echo is not None else {},
        mia_run=mia_run,
        linkage_run=linkage_run,
        parity_train=train_res,
        parity_test=test_res,
    )
