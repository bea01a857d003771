"""Black-box privacy auditing for time-series imputation models.

The package measures two leakage channels of an imputation model that is
only reachable through its predictions: membership inference via a
loss-ratio against a reference model, and pointwise attribute inference
via wavelet peak detection on imputed windows. A pipeline links the two,
using membership risk to rank series and then confirming per-point leakage
on the highest-risk fraction.
"""

__version__ = "0.1.0"

from .aia import (
    AiaAggregate,
    AiaConfig,
    WindowResult,
    aggregate_windows,
    attack_window,
    run_aia,
    sliding_windows,
)
from .cli import build_parser, main
from .conformance import (
    ProtocolReport,
    check_protocol,
    check_round_trip,
    random_cases,
    serve_and_check,
)
from .dataset import (
    DatasetSplit,
    MaskSpec,
    MaskedSeries,
    SplitSpec,
    TimeSeriesRecord,
    apply_mask,
    load_csv,
    random_mask,
    split_dataset,
    write_csv,
)
from .errors import ImputeAuditError
from .imputers import (
    ImputerHandle,
    ImputerService,
    impute,
    interpolating,
    memorizing,
    remote,
    seasonal_mean,
    serve_imputer,
)
from .metrics import (
    ConfusionCounts,
    MetricSummary,
    RocCurve,
    auroc,
    peak_confusion,
    pearson,
    pointwise_classify,
    precision_recall,
    roc_curve,
    tpr_at_fpr,
    tpr_at_top_fraction,
)
from .mia import (
    MembershipScore,
    ThresholdPolicy,
    calibrate_threshold,
    classify_membership,
    lbrm_score,
    naive_loss_score,
    read_scores_csv,
    write_scores_csv,
)
from .pipeline import (
    AuditReport,
    LinkageConfig,
    LinkageRun,
    MiaConfig,
    MiaRun,
    ParityResult,
    PipelineConfig,
    REPORT_SCHEMA_VERSION,
    RiskSelection,
    emit_report,
    parity_check,
    read_report,
    run_full_audit,
    run_mia,
    run_mia_then_aia,
    scenario_split_spec,
    select_top_risk,
)
from .signal_math import (
    BACKEND,
    CwtConfig,
    DtwConfig,
    PeakSet,
    detect_peaks_cwt,
    dtw_distance,
    mae,
)

__all__ = [
    "__version__",
    "ImputeAuditError",
    # data handling
    "TimeSeriesRecord",
    "SplitSpec",
    "DatasetSplit",
    "MaskSpec",
    "MaskedSeries",
    "load_csv",
    "write_csv",
    "split_dataset",
    "apply_mask",
    "random_mask",
    # signal kernels
    "BACKEND",
    "DtwConfig",
    "CwtConfig",
    "dtw_distance",
    "mae",
    "detect_peaks_cwt",
    "PeakSet",
    # models
    "ImputerHandle",
    "ImputerService",
    "memorizing",
    "interpolating",
    "seasonal_mean",
    "remote",
    "impute",
    "serve_imputer",
    # membership attack
    "MembershipScore",
    "ThresholdPolicy",
    "lbrm_score",
    "naive_loss_score",
    "calibrate_threshold",
    "classify_membership",
    "write_scores_csv",
    "read_scores_csv",
    # metrics
    "RocCurve",
    "MetricSummary",
    "roc_curve",
    "auroc",
    "tpr_at_fpr",
    "tpr_at_top_fraction",
    "ConfusionCounts",
    "pointwise_classify",
    "peak_confusion",
    "precision_recall",
    "pearson",
    # window attack
    "AiaConfig",
    "WindowResult",
    "AiaAggregate",
    "sliding_windows",
    "attack_window",
    "aggregate_windows",
    "run_aia",
    # pipeline
    "REPORT_SCHEMA_VERSION",
    "ParityResult",
    "parity_check",
    "MiaConfig",
    "MiaRun",
    "run_mia",
    "RiskSelection",
    "select_top_risk",
    "LinkageConfig",
    "LinkageRun",
    "run_mia_then_aia",
    "AuditReport",
    "emit_report",
    "read_report",
    "PipelineConfig",
    "run_full_audit",
    "scenario_split_spec",
    # cli
    "build_parser",
    "main",
    # conformance
    "ProtocolReport",
    "check_protocol",
    "check_round_trip",
    "random_cases",
    "serve_and_check",
]
