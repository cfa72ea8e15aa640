"""Command-line entry point tying the pipeline together.

Subcommands: validate | split | train | predict | evaluate | synth |
experiment | features.  Options can come from a JSON config file
(``--config``); explicit flags take precedence over the file, which takes
precedence over built-in defaults.  Every machine-readable report echoes the
effective configuration.

Exit codes: 0 ok, 1 validation error, 2 runtime error, 3 suffix/step cap
exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import evaluation, event_log, sweepline, synth, training
from .encoding import DEFAULT_NGRAM
from .errors import ConfigError, LogParseError, LogValidationError, SuffixSweepError
from .features import WorkloadIndex, default_tau, enhance_rows
from .predictors import SamplingStrategy, load_bundle, save_bundle

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_CAP = 3

DEFAULTS = {
    "ngram": DEFAULT_NGRAM,
    "cutoff_fraction": 0.8,
    "tau_fraction": 0.2,
    "sampling": "argmax",
    "seed": 0,
    "arch": "mm",
    "inter": False,
    "eot_label": "EOT",
    "max_suffix_len": None,
}


def _merge_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            cfg.update(json.load(fh))
    for key in cfg:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if not 0.0 < cfg["cutoff_fraction"] < 1.0:
        raise ConfigError(f"cutoff_fraction must be in (0,1), got {cfg['cutoff_fraction']}")
    if not 0.0 < cfg["tau_fraction"] < 1.0:
        raise ConfigError(f"tau_fraction must be in (0,1), got {cfg['tau_fraction']}")
    return cfg


def _parse_cutoff(value: str) -> int:
    if value.lstrip("-").isdigit():
        return int(value)
    return event_log.parse_timestamp(value, "iso")


def _resolve_cutoff(log, args, cfg) -> int:
    if getattr(args, "cutoff", None):
        return _parse_cutoff(args.cutoff)
    return event_log.cutoff_at_fraction(log, cfg["cutoff_fraction"])


def cmd_validate(args) -> int:
    log = event_log.parse_log(args.log)
    n_instances = sum(len(t) for t in log)
    open_instances = sum(1 for i in log.instances() if i.end is None)
    print(f"{args.log}: valid")
    print(f"  cases: {len(log)}")
    print(f"  activity instances: {n_instances}")
    print(f"  distinct activities: {len(log.activity_vocab_raw)}")
    print(f"  open instances: {open_instances}")
    return EXIT_OK


def cmd_split(args) -> int:
    cfg = _merge_config(args)
    log = event_log.parse_log(args.log)
    cutoff = _resolve_cutoff(log, args, cfg)
    train = event_log.extract_training_log(log, cutoff)
    test = event_log.extract_test_log(log, cutoff)
    event_log.serialize_log(train, args.train_out)
    event_log.serialize_log(test, args.test_out)
    print(f"cutoff: {event_log.format_timestamp(cutoff, log.time_format)} ({cutoff})")
    print(f"train: {len(train)} cases -> {args.train_out}")
    print(f"test:  {len(test)} cases -> {args.test_out}")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _merge_config(args)
    log = event_log.parse_log(args.log)
    cutoff = _resolve_cutoff(log, args, cfg)
    train_log = event_log.extract_training_log(log, cutoff)
    fit = training.fit_sm_bundle if cfg["arch"] == "sm" else training.fit_mm_bundle
    bundle = fit(
        train_log,
        n=cfg["ngram"],
        use_inter=bool(cfg["inter"]),
        eot_label=cfg["eot_label"],
        tau_fraction=cfg["tau_fraction"],
    )
    save_bundle(bundle, args.out)
    if getattr(args, "dump_samples", None):
        from .encoding import samples_to_csv

        samples, _, _, _, _ = training.training_samples(
            train_log, n=cfg["ngram"], eot_label=cfg["eot_label"],
            tau_fraction=cfg["tau_fraction"],
        )
        samples_to_csv(samples, args.dump_samples)
    print(
        f"trained {cfg['arch']} bundle on {len(train_log)} cases "
        f"(cutoff {cutoff}, n={cfg['ngram']}, inter={'on' if cfg['inter'] else 'off'}) "
        f"-> {args.out}"
    )
    return EXIT_OK


def cmd_predict(args) -> int:
    cfg = _merge_config(args)
    log = event_log.parse_log(args.log)
    cutoff = _resolve_cutoff(log, args, cfg)
    bundle = load_bundle(args.model)
    test_log = event_log.extract_test_log(log, cutoff)
    config = sweepline.SweepConfig(
        max_suffix_len=cfg["max_suffix_len"],
        strategy=SamplingStrategy(kind=cfg["sampling"], seed=cfg["seed"]),
    )
    result = sweepline.run_sweep(test_log, bundle, cutoff, config)
    sweepline.write_predicted_csv(result.records, args.out, time_format=log.time_format)
    report = dict(result.report)
    report["config"] = {**cfg, "cutoff": cutoff, "log": str(args.log), "model": str(args.model)}
    if getattr(args, "report", None):
        Path(args.report).write_text(json.dumps(report, indent=2), encoding="utf-8")
    print(
        f"predicted {report['predicted_events']} events for {report['cases']} cases "
        f"({report.get('events_per_second', 0):.0f} events/s) -> {args.out}"
    )
    if report["failures"]:
        print(f"failed cases: {sorted(report['failures'])}", file=sys.stderr)
        return EXIT_RUNTIME
    if report["cap_exceeded"]:
        print(f"step cap exceeded; unfinished: {report['unfinished_cases']}", file=sys.stderr)
        return EXIT_CAP
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = _merge_config(args)
    truth = event_log.parse_log(args.truth)
    cutoff = _resolve_cutoff(truth, args, cfg)
    records = sweepline.read_predicted_csv(args.predicted)
    report = evaluation.evaluate_run(
        records,
        truth,
        cutoff,
        include_ongoing=not args.exclude_ongoing,
        variant=args.distance_variant,
    )
    if getattr(args, "report", None):
        Path(args.report).write_text(report.to_json(), encoding="utf-8")
    if getattr(args, "per_case", None):
        evaluation.per_case_csv(report, args.per_case)
    print(f"mean normalized DL: {report.mean_normalized_dl:.4f}")
    print(f"MAE inter-start (s): {report.mae_delta_start}")
    print(f"MAE processing (s): {report.mae_delta_proc}")
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = synth.ProcessSpec.from_json(Path(args.spec).read_text(encoding="utf-8"))
    if args.seed is not None:
        spec.seed = args.seed
    log = synth.generate(spec, args.cases)
    event_log.serialize_log(log, args.out)
    print(f"generated {args.cases} cases / {sum(len(t) for t in log)} instances -> {args.out}")
    return EXIT_OK


def cmd_features(args) -> int:
    cfg = _merge_config(args)
    log = event_log.parse_log(args.log)
    tau = default_tau(log, fraction=cfg["tau_fraction"])
    index = WorkloadIndex(log)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["case_id", "index", "activity", "delta_start", "delta_proc",
             "wip", "utilization", "lambda"]
        )
        for trace in log:
            for i, row in enumerate(enhance_rows(index, trace, tau)):
                writer.writerow(
                    [
                        trace.case_id,
                        i,
                        row.base.activity,
                        row.intra.delta_start,
                        "" if row.intra.delta_proc is None else row.intra.delta_proc,
                        row.inter.wip,
                        row.inter.utilization,
                        f"{row.inter.lam:.9f}",
                    ]
                )
    print(f"features for {len(log)} cases -> {args.out}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    """Train and score every architecture/feature combination on one log."""
    cfg = _merge_config(args)
    log = event_log.parse_log(args.log)
    cutoff = _resolve_cutoff(log, args, cfg)
    train_log = event_log.extract_training_log(log, cutoff)
    test_log = event_log.extract_test_log(log, cutoff)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    exit_code = EXIT_OK
    for arch in ("mm", "sm"):
        for inter in (False, True):
            fit = training.fit_mm_bundle if arch == "mm" else training.fit_sm_bundle
            bundle = fit(
                train_log,
                n=cfg["ngram"],
                use_inter=inter,
                eot_label=cfg["eot_label"],
                tau_fraction=cfg["tau_fraction"],
            )
            config = sweepline.SweepConfig(
                max_suffix_len=cfg["max_suffix_len"],
                strategy=SamplingStrategy(kind=cfg["sampling"], seed=cfg["seed"]),
            )
            result = sweepline.run_sweep(test_log, bundle, cutoff, config)
            if result.report["cap_exceeded"]:
                exit_code = EXIT_CAP
            report = evaluation.evaluate_run(
                result.records, log, cutoff, include_ongoing=(arch == "mm")
            )
            rows.append(
                {
                    "architecture": arch,
                    "inter_case_features": "on" if inter else "off",
                    "mean_normalized_dl": report.mean_normalized_dl,
                    "mae_delta_start_seconds": report.mae_delta_start,
                    "mae_delta_proc_seconds": report.mae_delta_proc,
                    "scored_cases": report.scored_cases,
                    "predicted_events": result.report["predicted_events"],
                }
            )

    table_csv = out_dir / "experiment.csv"
    with open(table_csv, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    (out_dir / "experiment.json").write_text(
        json.dumps({"config": {**cfg, "cutoff": cutoff}, "results": rows}, indent=2),
        encoding="utf-8",
    )
    for row in rows:
        print(
            f"{row['architecture']:>2} inter={row['inter_case_features']:<3} "
            f"DL={row['mean_normalized_dl']:.4f} "
            f"MAE_start={row['mae_delta_start_seconds']} "
            f"MAE_proc={row['mae_delta_proc_seconds']}"
        )
    print(f"results -> {table_csv}")
    return exit_code


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file (flags override it)")
    parser.add_argument("--ngram", type=int, default=None)
    parser.add_argument("--cutoff-fraction", dest="cutoff_fraction", type=float, default=None)
    parser.add_argument("--tau-fraction", dest="tau_fraction", type=float, default=None)
    parser.add_argument("--sampling", choices=["argmax", "random_choice"], default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--eot-label", dest="eot_label", default=None)
    parser.add_argument("--max-suffix-len", dest="max_suffix_len", type=int, default=None)
    parser.add_argument("--cutoff", default=None, help="explicit cutoff (epoch seconds or ISO-8601)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="suffixsweep",
        description="Case suffix prediction with start and end timestamps",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a log file against the format contract")
    p.add_argument("log")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("split", help="temporal train/test split at a cutoff")
    p.add_argument("--log", required=True)
    p.add_argument("--train-out", required=True)
    p.add_argument("--test-out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="fit predictor models on the pre-cutoff log")
    p.add_argument("--log", required=True)
    p.add_argument("--out", required=True, help="model bundle file to write")
    p.add_argument("--arch", choices=["mm", "sm"], default=None)
    p.add_argument("--inter", action="store_true", default=None,
                   help="enable the workload adjustment of the time models")
    p.add_argument("--dump-samples", help="optionally dump encoded n-gram samples as CSV")
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict case suffixes with the sweep engine")
    p.add_argument("--log", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True, help="predicted-log CSV")
    p.add_argument("--report", help="JSON run report")
    _add_common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score a predicted log against ground truth")
    p.add_argument("--predicted", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--report", help="JSON report file")
    p.add_argument("--per-case", dest="per_case", help="per-case CSV file")
    p.add_argument("--exclude-ongoing", action="store_true",
                   help="single-model scoring: skip instances open at the cutoff")
    p.add_argument("--distance-variant", choices=["osa", "full"], default="osa")
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="generate a synthetic log from a process spec")
    p.add_argument("--spec", required=True, help="JSON process spec")
    p.add_argument("--cases", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("features", help="dump intra/inter-case features as CSV")
    p.add_argument("--log", required=True)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("experiment", help="multi-model vs single-model comparison table")
    p.add_argument("--log", required=True)
    p.add_argument("--out-dir", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (LogParseError, LogValidationError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SuffixSweepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
