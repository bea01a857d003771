"""Command-line front door.

Five subcommands: `mia` scores a suspect pool, `aia` sweeps the window
attack over a dataset, `pipeline` runs the full audit and emits the JSON
report, `serve` exposes a builtin imputer over HTTP, and `report` turns
an existing report into plot-ready CSV tables.

Every run writes a config-echo file holding the resolved value of every
flag, so the exact invocation can be replayed later. Exit codes: 0 clean,
2 completed with degenerate events, 1 fatal error, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from . import __version__
from .aia import AiaConfig, aggregate_windows, attack_window, \
    sliding_windows, write_window_csv
from .dataset import TimeSeriesRecord, load_csv, split_dataset, stable_seed
from .errors import ConfigError, DegenerateAggregateError, ImputeAuditError, \
    ParseError, SchemaError
from .imputers import ImputerHandle, interpolating, memorizing, remote, \
    seasonal_mean, serve_imputer
from .mia import ThresholdPolicy
from .pipeline import LinkageConfig, MiaConfig, PipelineConfig, _rounded, \
    parity_check, read_report, run_full_audit, run_mia, scenario_split_spec
from .signal_math import CwtConfig, DtwConfig
from .synth import linkage_mixture


class _UsageError(Exception):
    """A flag value that cannot be turned into a config."""


class _Parser(argparse.ArgumentParser):
    """argparse with the conventional 64 exit for usage errors."""

    def error(self, message):
        self.exit(64, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# flag resolution
# ---------------------------------------------------------------------------


def _resolve_imputer(spec: str, role: str,
                     store: Optional[Sequence[TimeSeriesRecord]] = None
                     ) -> ImputerHandle:
    """Turn a model spec string into a handle.

    Accepts http(s) endpoints, or builtin names with an optional
    "builtin:" prefix: interpolating, memorizing (needs a store),
    seasonal_mean, seasonal_mean:PERIOD.
    """
    if spec.startswith("http://") or spec.startswith("https://"):
        return remote(spec)
    name = spec[len("builtin:"):] if spec.startswith("builtin:") else spec
    if name == "interpolating":
        return interpolating()
    if name == "memorizing":
        if not store:
            raise _UsageError(
                f"{role} model 'memorizing' needs training data; pass a "
                f"store file or use a scenario that provides one")
        return memorizing(store)
    if name == "seasonal_mean":
        return seasonal_mean()
    if name.startswith("seasonal_mean:"):
        tail = name[len("seasonal_mean:"):]
        try:
            period = int(tail)
        except ValueError:
            raise _UsageError(f"bad seasonal_mean period {tail!r}") from None
        return seasonal_mean(period=period)
    raise _UsageError(f"unknown {role} model spec {spec!r}")


def _parse_widths(text: str) -> tuple:
    try:
        widths = tuple(float(w) for w in text.split(","))
    except ValueError:
        raise _UsageError(f"bad widths list {text!r}") from None
    if not widths:
        raise _UsageError("widths list is empty")
    return widths


def _parse_theta(text: str) -> ThresholdPolicy:
    try:
        return ThresholdPolicy.parse(text)
    except ConfigError as exc:
        raise _UsageError(str(exc)) from None


def _dtw_config(args) -> DtwConfig:
    try:
        return DtwConfig(pointwise_distance=args.pointwise,
                         band_radius=args.band_radius)
    except ConfigError as exc:
        raise _UsageError(str(exc)) from None


def _aia_config(args) -> AiaConfig:
    try:
        cwt = CwtConfig(widths=_parse_widths(args.widths))
        return AiaConfig(window=args.window, stride=args.stride,
                         tolerance=args.tolerance, cwt=cwt)
    except ConfigError as exc:
        raise _UsageError(str(exc)) from None


def _load_records(path: str, what: str) -> List[TimeSeriesRecord]:
    try:
        return load_csv(path)
    except OSError as exc:
        raise ImputeAuditError(f"cannot read {what} file {path}: {exc}") \
            from exc


def _load_labels(path: str) -> Dict[str, int]:
    """Read an id,label CSV into a membership map."""
    try:
        with open(path, "r", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ImputeAuditError(f"cannot read label file {path}: {exc}") \
            from exc
    if not rows or rows[0] != ["id", "label"]:
        raise SchemaError(f"label file {path} must start with header id,label")
    labels = {}
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise SchemaError(f"{path}:{line_no}: expected 2 fields")
        sid, value = row
        if value not in ("0", "1"):
            raise ParseError(f"{path}:{line_no}: label must be 0 or 1")
        labels[sid] = int(value)
    return labels


def _write_config_echo(outdir: Path, args) -> dict:
    """Record every resolved flag so the run can be replayed exactly.

    The output directory is deliberately left out: it does not affect
    any computed value, and omitting it keeps artifacts byte-identical
    across reruns into different destinations.
    """
    flags = {k: v for k, v in sorted(vars(args).items())
             if k not in ("func", "command", "outdir")}
    echo = {"version": __version__, "command": args.command, "flags": flags}
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config_echo.json").write_text(
        json.dumps(echo, indent=2) + "\n")
    return echo


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(_rounded(payload), indent=2,
                               allow_nan=False) + "\n")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_mia(args) -> int:
    outdir = Path(args.outdir)
    suspects = _load_records(args.suspects, "suspect")
    labels = _load_labels(args.labels) if args.labels else None
    store = _load_records(args.target_store, "target store") \
        if args.target_store else None
    ref_store = _load_records(args.reference_store, "reference store") \
        if args.reference_store else None
    target = _resolve_imputer(args.target, "target", store)
    reference = _resolve_imputer(args.reference, "reference", ref_store)
    cfg = MiaConfig(u_width=args.uwidth, theta=_parse_theta(args.theta),
                    dtw=_dtw_config(args), seed=args.seed,
                    masked_only=args.masked_only, workers=args.workers)
    _write_config_echo(outdir, args)
    run = run_mia(target, reference, suspects, cfg, labels=labels)

    from .mia import write_scores_csv
    from .metrics import write_roc_csv
    write_scores_csv(run.scores, outdir / "scores.csv", labels=run.labels)
    metrics: dict = {
        "theta": run.theta,
        "theta_policy": cfg.theta.describe(),
        "n_scored": len(run.scores),
        "flagged_member_count": sum(run.decisions.values()),
        "excluded": [list(pair) for pair in run.excluded],
        "lbrm": None,
        "naive": None,
    }
    if run.lbrm is not None:
        write_roc_csv(run.lbrm.roc, outdir / "roc_lbrm.csv")
        metrics["lbrm"] = {"auroc": run.lbrm.auroc,
                           "tpr_at_0_1": run.lbrm.tpr_at_0_1,
                           "tpr_at_top25": run.lbrm.tpr_at_top25,
                           "roc_path": "roc_lbrm.csv"}
    if run.naive is not None:
        write_roc_csv(run.naive.roc, outdir / "roc_naive.csv")
        metrics["naive"] = {"auroc": run.naive.auroc,
                            "tpr_at_0_1": run.naive.tpr_at_0_1,
                            "tpr_at_top25": run.naive.tpr_at_top25,
                            "roc_path": "roc_naive.csv"}
    _write_json(outdir / "metrics.json", metrics)
    return 2 if run.degenerate_events else 0


def cmd_aia(args) -> int:
    outdir = Path(args.outdir)
    data = _load_records(args.data, "data")
    model = _resolve_imputer(args.model, "attacked", data)
    cfg = _aia_config(args)
    _write_config_echo(outdir, args)
    results = []
    for x in data:
        for interval in sliding_windows(len(x), cfg):
            results.append(attack_window(model, x, interval, cfg))
    write_window_csv(results, outdir / "windows.csv")
    degenerate = False
    metrics: dict = {"n_windows": len(results), "aggregate": None}
    try:
        agg = aggregate_windows(results)
        metrics["aggregate"] = {
            "precision_mean": agg.precision_mean,
            "precision_std": agg.precision_std,
            "recall_mean": agg.recall_mean,
            "recall_std": agg.recall_std,
            "degenerate_precision_count": agg.degenerate_precision_count,
            "degenerate_recall_count": agg.degenerate_recall_count,
        }
    except DegenerateAggregateError as exc:
        metrics["degenerate"] = str(exc)
        degenerate = True
    _write_json(outdir / "metrics.json", metrics)
    return 2 if degenerate else 0


def _synthetic_inputs(args):
    mix = linkage_mixture(seed=args.seed, n_members=args.n_members,
                          n_nonmembers=args.n_nonmembers)
    holdout_mix = linkage_mixture(
        seed=stable_seed(args.seed, "parity-holdout"), n_members=0,
        n_nonmembers=max(4, args.n_nonmembers // 2))
    return (mix.store, list(mix.suspects), dict(mix.labels),
            list(mix.store), list(holdout_mix.suspects))


def _split_inputs(args):
    records = _load_records(args.data, "data")
    split = split_dataset(records, scenario_split_spec(args.scenario,
                                                       args.seed))
    members = list(split.private)
    if args.scenario == "finetune":
        # the target saw the public slice during pretraining too
        target_store = list(split.public) + members
    else:
        target_store = members
    suspects = members + list(split.test)
    labels = {x.id: 1 for x in members}
    labels.update({x.id: 0 for x in split.test})
    return (target_store, suspects, labels, members, list(split.test),
            list(split.public))


def cmd_pipeline(args) -> int:
    outdir = Path(args.outdir)
    if args.scenario == "synthetic":
        if args.data:
            raise _UsageError("--data is only for scratch/finetune scenarios")
        target_store, suspects, labels, parity_train, parity_holdout = \
            _synthetic_inputs(args)
        reference_store = None
    else:
        if not args.data:
            raise _UsageError(
                f"scenario {args.scenario!r} needs --data")
        (target_store, suspects, labels, parity_train, parity_holdout,
         reference_store) = _split_inputs(args)
    target = _resolve_imputer(args.target, "target", target_store)
    reference = _resolve_imputer(args.reference, "reference",
                                 reference_store)
    eval_model = _resolve_imputer(args.eval_model, "evaluation",
                                  reference_store)
    cfg = PipelineConfig(
        scenario=args.scenario, u_width=args.uwidth, q=args.q,
        theta=_parse_theta(args.theta), dtw=_dtw_config(args),
        aia=_aia_config(args), mask_fraction=args.mask_fraction,
        seed=args.seed, workers=args.workers, masked_only=args.masked_only,
        correlation_method=args.corr_method,
        n_permutations=args.n_permutations)
    echo = _write_config_echo(outdir, args)
    report = run_full_audit(
        target, reference, eval_model, suspects, outdir, cfg,
        labels=labels, parity_train=parity_train,
        parity_holdout=parity_holdout, config_echo=echo)
    return report.exit_code


def cmd_serve(args) -> int:
    store = _load_records(args.store, "store") if args.store else None
    handle = _resolve_imputer(args.imputer, "served", store)
    service = serve_imputer(handle, f"{args.host}:{args.port}")
    print(f"serving {args.imputer} at {service.url}", flush=True)
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        return 0
    finally:
        service.close()


def cmd_report(args) -> int:
    outdir = Path(args.outdir)
    report = read_report(args.report)
    _write_config_echo(outdir, args)

    summary_rows = []
    for name in ("mia", "naive"):
        block = report.get(name)
        if block:
            for metric in ("auroc", "tpr_at_0_1", "tpr_at_top25"):
                summary_rows.append([name, metric, repr(block[metric])])
            curve = Path(args.report).parent / block["roc_path"]
            if curve.is_file():
                (outdir / f"roc_{name}.csv").write_bytes(curve.read_bytes())
    if summary_rows:
        with open(outdir / "mia_summary.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["attack", "metric", "value"])
            writer.writerows(summary_rows)

    comparison_rows = []
    for scope in ("aia_all", "aia_topq"):
        block = report.get(scope)
        if not block:
            continue
        variants = [("target", block)]
        if block.get("evaluation"):
            variants.append(("evaluation", block["evaluation"]))
        for model_name, stats in variants:
            comparison_rows.append([
                scope, model_name,
                repr(stats["precision_mean"]), repr(stats["precision_std"]),
                repr(stats["recall_mean"]), repr(stats["recall_std"]),
                stats["n_windows"],
            ])
    if comparison_rows:
        with open(outdir / "precision_comparison.csv", "w",
                  newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["scope", "model", "precision_mean",
                             "precision_std", "recall_mean", "recall_std",
                             "n_windows"])
            writer.writerows(comparison_rows)

    correlation = report.get("correlation")
    if correlation:
        with open(outdir / "correlation.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["pair", "r", "p"])
            for pair in ("precision", "recall"):
                r = correlation.get(f"r_{pair}")
                p = correlation.get(f"p_{pair}")
                writer.writerow([pair,
                                 "" if r is None else repr(r),
                                 "" if p is None else repr(p)])
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0,
                        help="base seed for every random draw")
    parser.add_argument("--workers", type=int, default=1,
                        help="parallel per-series workers")
    parser.add_argument("--outdir", default="audit_out",
                        help="directory for artifacts")


def _add_dtw_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--pointwise", default="absolute",
                        choices=("absolute", "squared"),
                        help="pointwise distance inside the alignment loss")
    parser.add_argument("--band-radius", type=int, default=None,
                        help="alignment band radius (default: unbanded)")


def _add_window_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--window", type=int, default=24,
                        help="attacked window length")
    parser.add_argument("--stride", type=int, default=24,
                        help="window step")
    parser.add_argument("--tolerance", type=int, default=2,
                        help="peak match tolerance in indices")
    parser.add_argument("--widths", default="1,2,3,4",
                        help="wavelet widths, comma separated")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="imputeaudit",
                     description="Privacy audits for black-box time-series "
                                 "imputation models.")
    parser.add_argument("--version", action="version",
                        version=f"imputeaudit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p_mia = sub.add_parser("mia", help="membership scoring over suspects")
    p_mia.add_argument("--target", required=True,
                       help="audited model: http(s) endpoint or builtin name")
    p_mia.add_argument("--reference", default="builtin:interpolating",
                       help="reference model spec")
    p_mia.add_argument("--suspects", required=True,
                       help="suspect series CSV")
    p_mia.add_argument("--labels", default=None,
                       help="optional id,label CSV for evaluation mode")
    p_mia.add_argument("--target-store", default=None,
                       help="training CSV for a builtin memorizing target")
    p_mia.add_argument("--reference-store", default=None,
                       help="training CSV for a builtin memorizing reference")
    p_mia.add_argument("--uwidth", type=int, default=48,
                       help="masked unit width")
    p_mia.add_argument("--theta", default="top:0.25",
                       help="threshold policy: top:F, mean_std:N or fixed:V")
    p_mia.add_argument("--masked-only", action="store_true",
                       help="restrict both losses to the masked span")
    _add_dtw_flags(p_mia)
    _add_common(p_mia)
    p_mia.set_defaults(func=cmd_mia)

    p_aia = sub.add_parser("aia", help="sliding-window peak recovery attack")
    p_aia.add_argument("--model", required=True,
                       help="attacked model spec; memorizing binds to --data")
    p_aia.add_argument("--data", required=True, help="series CSV to attack")
    _add_window_flags(p_aia)
    _add_common(p_aia)
    p_aia.set_defaults(func=cmd_aia)

    p_pipe = sub.add_parser("pipeline", help="full audit with JSON report")
    p_pipe.add_argument("--scenario", default="synthetic",
                        choices=("synthetic", "scratch", "finetune"),
                        help="data regime preset")
    p_pipe.add_argument("--data", default=None,
                        help="series CSV (scratch/finetune scenarios)")
    p_pipe.add_argument("--target", default="builtin:memorizing",
                        help="audited model spec")
    p_pipe.add_argument("--reference", default="builtin:interpolating",
                        help="reference model spec")
    p_pipe.add_argument("--eval-model", default="builtin:interpolating",
                        help="weak comparison model for the window attack")
    p_pipe.add_argument("--q", type=float, default=0.25,
                        help="top risk fraction")
    p_pipe.add_argument("--uwidth", type=int, default=48,
                        help="masked unit width")
    p_pipe.add_argument("--theta", default="top:0.25",
                        help="threshold policy")
    p_pipe.add_argument("--mask-fraction", type=float, default=0.2,
                        help="parity check point fraction")
    p_pipe.add_argument("--masked-only", action="store_true",
                        help="restrict both losses to the masked span")
    p_pipe.add_argument("--corr-method", default="permutation",
                        choices=("permutation", "t", "auto"),
                        help="correlation p-value method")
    p_pipe.add_argument("--n-permutations", type=int, default=100_000,
                        help="samples for the permutation p-value")
    p_pipe.add_argument("--n-members", type=int, default=24,
                        help="member count (synthetic scenario)")
    p_pipe.add_argument("--n-nonmembers", type=int, default=24,
                        help="non-member count (synthetic scenario)")
    _add_window_flags(p_pipe)
    _add_dtw_flags(p_pipe)
    _add_common(p_pipe)
    p_pipe.set_defaults(func=cmd_pipeline)

    p_serve = sub.add_parser("serve", help="serve a builtin imputer over "
                                           "HTTP")
    p_serve.add_argument("--imputer", default="interpolating",
                         help="model spec to serve")
    p_serve.add_argument("--store", default=None,
                         help="training CSV for a memorizing imputer")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8080)
    _add_common(p_serve)
    p_serve.set_defaults(func=cmd_serve)

    p_report = sub.add_parser("report", help="plot-ready CSV tables from a "
                                             "report")
    p_report.add_argument("--report", required=True,
                          help="path to a report.json")
    _add_common(p_report)
    p_report.set_defaults(func=cmd_report)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 64
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 64
    except ImputeAuditError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
