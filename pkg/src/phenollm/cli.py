"""Command-line entry point: ``phenollm <group> <command> [flags]``."""
from __future__ import annotations

import argparse
import json
import logging
import platform
import secrets
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .baseline import ForestConfig, evaluate, train_forest
from .dataset import DatasetError, Label, Target, balanced_sample, load_dataset
from .harness import (
    AbortedAllCells, ConfigError, CurationCriteria, EmptyRecords, ExperimentConfig,
    InsufficientQualifying, IoFailure, compute_metrics, curate_finetune_set, emit_report,
    export_grader_packets, read_records, run_experiment,
)
from .harness.report import summary_text
from .harness.runner import GRADED
from .interpret import grade_response
from .llmgate import BackendConfig, GatewayError, MockPolicy
from .prompts import PromptTooLong, Strategy, build_prompt
from .synthetic import InvalidSpec, SyntheticSpec, generate_synthetic
from .tables import DataFormat, TableParseError

OPERATIONAL_ERRORS = (
    DatasetError, TableParseError, GatewayError, AbortedAllCells, ConfigError, EmptyRecords,
    InsufficientQualifying, IoFailure, InvalidSpec, PromptTooLong, OSError, ValueError, KeyError,
)


class _Version(argparse.Action):
    def __init__(self, option_strings, dest=argparse.SUPPRESS, **kw):
        super().__init__(option_strings, dest, nargs=0, default=argparse.SUPPRESS, **kw)

    def __call__(self, parser, namespace, values, option_string=None):
        print(f"phenollm {__version__} (python {platform.python_version()}, numpy {np.__version__})")
        parser.exit()


def _seed(args) -> int:
    """The explicit seed, or a fresh one that is printed so the run can be repeated."""
    if args.seed is None:
        args.seed = secrets.randbelow(2**31)
        print(f"seed: {args.seed}", file=sys.stderr)
    return args.seed


def _sample(pool, ref: str):
    """A sample by position in key order or by ``pid@YYYY-MM-DD`` id."""
    ordered = sorted(pool, key=lambda s: s.key)
    if ref.isdigit():
        i = int(ref)
        if i >= len(ordered):
            raise KeyError(f"sample index {i} out of range (pool has {len(ordered)})")
        return ordered[i]
    for s in ordered:
        if s.sample_id == ref:
            return s
    raise KeyError(f"no sample {ref!r}")


# -- dataset ---------------------------------------------------------------------

def cmd_dataset_gen(args) -> int:
    spec = SyntheticSpec(
        seed=_seed(args), subjects=args.subjects, years=args.years, weeks=args.weeks,
        start_year=args.start_year, day_dropout=args.day_dropout, cell_missing=args.cell_missing,
    )
    data, meta = generate_synthetic(spec, args.out)
    print(f"wrote {data} and {meta}")
    return 0


def cmd_dataset_sample(args) -> int:
    pool = load_dataset(args.data, window_length=args.window_length)
    split = balanced_sample(pool, args.per_year, _seed(args), args.target)
    target = Target(args.target)

    def rows(samples):
        return [{"sample_id": s.sample_id, "study_year": s.study_year,
                 "label": s.label_for(target).value, "phq4_total": s.phq4_total,
                 "phq4_anxiety": s.anxiety_sub} for s in sorted(samples, key=lambda s: s.key)]

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = {"seed": args.seed, "per_year": args.per_year, "target": target.value,
               "test": rows(split.test), "train": rows(split.train)}
    (out / "split.json").write_text(json.dumps(payload, indent=1) + "\n")
    n_pos = sum(s.label_for(target) is Label.POSITIVE for s in split.test)
    print(f"test: {len(split.test)} samples ({n_pos} Positive, {len(split.test) - n_pos} Negative); "
          f"train: {len(split.train)}; dropped windows: {pool.dropped}")
    print(f"wrote {out / 'split.json'}")
    return 0


# -- prompt ------------------------------------------------------------------------

def cmd_prompt_build(args) -> int:
    pool = load_dataset(args.data, window_length=args.window_length)
    sample = _sample(pool, args.sample)
    bundle = build_prompt(sample.window, args.strategy, args.format, target=args.target,
                          max_chars=args.max_chars)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(bundle.rendered)
    print(f"{sample.sample_id}: {len(bundle.rendered)} characters, sha256 {bundle.prompt_hash[:12]}")
    print(f"wrote {out}")
    return 0


# -- run ---------------------------------------------------------------------------

def _experiment(args, default_strategy: Strategy) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.load(args.config)
        overrides = {k: v for k, v in (("output_dir", args.out), ("seed", args.seed)) if v is not None}
        return ExperimentConfig.from_dict({**cfg.to_dict(), **overrides}) if overrides else cfg
    if not args.data or not args.out:
        raise ConfigError("either --config or both --data and --out are required")
    policy = MockPolicy(
        seed=_seed(args), answer_mode=args.answer_mode,
        numeric_error_rate=args.numeric_error_rate, trend_error_rate=args.trend_error_rate,
        claims_per_response=args.claims,
    )
    backend = BackendConfig(
        kind=args.backend, model_name=args.model or ("mock" if args.backend == "mock" else ""),
        endpoint_url=args.endpoint_url or "", api_key_env_var=args.api_key_env,
        temperature=args.temperature, rate_limit=args.rate_limit, mock=policy,
    )
    return ExperimentConfig(
        dataset_path=args.data, output_dir=args.out,
        strategies=tuple(args.strategy or [default_strategy]),
        formats=tuple(args.format or [DataFormat.MARKDOWN]),
        backends=(backend,), target=args.target, seed=args.seed, per_year=args.per_year,
        repetitions=args.repetitions, max_samples=args.max_samples,
        cache_dir=args.cache_dir, replay_only=args.replay_only,
    )


def _run(args, default_strategy: Strategy) -> int:
    cfg = _experiment(args, default_strategy)
    Path(cfg.output_dir).mkdir(parents=True, exist_ok=True)
    cfg.save(Path(cfg.output_dir) / "config.json")
    records = run_experiment(cfg)
    print(summary_text(compute_metrics(records)), end="")
    print(f"{len(records)} records in {cfg.records_path}")
    return 0


def cmd_run_classify(args) -> int:
    return _run(args, Strategy.COT)


def cmd_run_reason(args) -> int:
    return _run(args, Strategy.REASONING)


# -- verify / curate / report ------------------------------------------------------

def cmd_verify(args) -> int:
    if args.records:
        records = read_records(args.records)
        pool = {s.sample_id: s for s in load_dataset(args.data)} if args.data else None
        graded = []
        for r in records:
            if r.strategy not in GRADED or r.error is not None:
                continue
            if pool is not None and r.sample_id in pool:
                graded.append({"cell": list(r.cell),
                               **grade_response(r.reply, pool[r.sample_id].window).to_dict()})
            elif r.report is not None:
                graded.append({"cell": list(r.cell), **r.report})
        rates = [sum(bool(g[q]) for g in graded) / len(graded) if graded else 0.0
                 for q in ("q1_has_numbers", "q2_numbers_consistent",
                           "q3_has_trends", "q4_trends_consistent")]
        print(f"{len(graded)} graded replies; Q1-Q4 yes rates: "
              + " ".join(f"{r:.2%}" for r in rates))
        result = graded
    else:
        if not (args.reply and args.data and args.sample is not None):
            raise ConfigError("verify needs --records, or --reply with --data and --sample")
        sample = _sample(load_dataset(args.data), args.sample)
        report = grade_response(Path(args.reply).read_text(), sample.window)
        print(report.annotate(sample.window.schema))
        result = report.to_dict()
    if args.out:
        Path(args.out).write_text(json.dumps(result, indent=1, default=str) + "\n")
        print(f"wrote {args.out}")
    return 0


def cmd_curate(args) -> int:
    criteria = CurationCriteria(
        require_correct_label=not args.allow_incorrect,
        require_clean_numbers=not args.allow_numeric_errors,
        target_size=args.target_size, epochs=args.epochs,
    )
    result = curate_finetune_set(read_records(args.records), criteria, _seed(args), args.out)
    print(f"{len(result.examples)} examples -> {result.data_path}; manifest {result.manifest_path}")
    return 0


def cmd_report(args) -> int:
    records = read_records(args.records)
    metrics = compute_metrics(records)
    paths = emit_report(metrics, args.out)
    if args.packets:
        paths += export_grader_packets(records, Path(args.out) / "packets", seed=args.seed or 0)
    print(summary_text(metrics), end="")
    print(f"wrote {len(paths)} files to {args.out}")
    return 0


# -- baseline ----------------------------------------------------------------------

def cmd_baseline_rf(args) -> int:
    seed = _seed(args)
    pool = load_dataset(args.data, window_length=args.window_length)
    split = balanced_sample(pool, args.per_year, seed, args.target)
    fps = args.features_per_split if args.features_per_split == "sqrt" else int(args.features_per_split)
    cfg = ForestConfig(tree_count=args.trees, max_depth=args.max_depth,
                       min_samples_split=args.min_samples_split, features_per_split=fps, seed=seed)
    forest = train_forest(split.train, cfg, args.target)
    result = evaluate(forest, split.test)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    forest.save(out / "forest.json")
    (out / "evaluation.json").write_text(json.dumps({
        "accuracy": result.accuracy, "n": result.n, "seed": seed,
        "predictions": dict(zip((s.sample_id for s in split.test), result.predictions)),
    }, indent=1) + "\n")
    print(f"random forest: {len(split.train)} train, {result.n} test, accuracy {result.accuracy:.2%}")
    print(f"wrote {out / 'forest.json'}")
    return 0


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="seed for every random step (omitted: generated and printed)")
    common.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS,
                        help="more logging (repeatable)")

    p = argparse.ArgumentParser(prog="phenollm", parents=[common],
                                description="LLM depression-detection experiments on wearable data.")
    p.add_argument("--version", action=_Version, help="print version and exit")
    groups = p.add_subparsers(dest="group", metavar="COMMAND", required=True)

    def data_flags(sp, required=True):
        sp.add_argument("--data", required=required, help="dataset CSV file or directory")
        sp.add_argument("--window-length", type=int, default=28, help="days per window")

    def target_flag(sp):
        sp.add_argument("--target", choices=[t.value for t in Target], default="depression")

    # dataset
    ds = groups.add_parser("dataset", help="synthetic data and test-set sampling")
    ds_cmds = ds.add_subparsers(dest="command", metavar="SUBCOMMAND", required=True)
    gen = ds_cmds.add_parser("gen", parents=[common], help="write a synthetic dataset")
    spec = SyntheticSpec()
    gen.add_argument("--subjects", type=int, default=spec.subjects)
    gen.add_argument("--years", type=int, default=spec.years)
    gen.add_argument("--weeks", type=int, default=spec.weeks, help="assessments per subject-year")
    gen.add_argument("--start-year", type=int, default=spec.start_year)
    gen.add_argument("--day-dropout", type=float, default=0.0, help="probability a day is absent")
    gen.add_argument("--cell-missing", type=float, default=0.0, help="probability a value is blank")
    gen.add_argument("--out", required=True, help="output directory")
    gen.set_defaults(func=cmd_dataset_gen)

    smp = ds_cmds.add_parser("sample", parents=[common], help="draw the class-balanced test set")
    data_flags(smp)
    target_flag(smp)
    smp.add_argument("--per-year", type=int, default=30, help="test samples per study year")
    smp.add_argument("--out", required=True, help="output directory for split.json")
    smp.set_defaults(func=cmd_dataset_sample)

    # prompt
    pr = groups.add_parser("prompt", help="render prompts")
    pr_cmds = pr.add_subparsers(dest="command", metavar="SUBCOMMAND", required=True)
    build = pr_cmds.add_parser("build", parents=[common], help="write one prompt to a file")
    data_flags(build)
    target_flag(build)
    build.add_argument("--sample", required=True, help="index in key order, or pid@date id")
    build.add_argument("--strategy", choices=[s.value for s in Strategy], default="cot")
    build.add_argument("--format", choices=[f.value for f in DataFormat], default="markdown")
    build.add_argument("--max-chars", type=int, default=None)
    build.add_argument("--out", required=True, help="output file")
    build.set_defaults(func=cmd_prompt_build)

    # run
    run = groups.add_parser("run", help="query a model over the test set")
    run_cmds = run.add_subparsers(dest="command", metavar="SUBCOMMAND", required=True)
    for name, func, blurb in (("classify", cmd_run_classify, "classification grid"),
                              ("reason", cmd_run_reason, "reasoning generation")):
        sp = run_cmds.add_parser(name, parents=[common], help=blurb)
        sp.add_argument("--config", help="experiment JSON; other grid flags are then ignored")
        data_flags(sp, required=False)
        target_flag(sp)
        sp.add_argument("--out", help="output directory (records.jsonl, cache/)")
        sp.add_argument("--strategy", action="append", choices=[s.value for s in Strategy],
                        help="repeatable")
        sp.add_argument("--format", action="append", choices=[f.value for f in DataFormat],
                        help="repeatable")
        sp.add_argument("--per-year", type=int, default=30)
        sp.add_argument("--max-samples", type=int, default=None)
        sp.add_argument("--repetitions", type=int, default=1)
        sp.add_argument("--backend", choices=["mock", "http"], default="mock")
        sp.add_argument("--model", default=None, help="model name sent to the endpoint")
        sp.add_argument("--endpoint-url", default=None)
        sp.add_argument("--api-key-env", default="OPENAI_API_KEY",
                        help="environment variable holding the API key")
        sp.add_argument("--temperature", type=float, default=0.0)
        sp.add_argument("--rate-limit", type=float, default=60.0, help="requests per minute")
        sp.add_argument("--cache-dir", default=None)
        sp.add_argument("--replay-only", action="store_true", help="never call the backend")
        sp.add_argument("--answer-mode", default="always-no",
                        choices=["always-no", "always-yes", "oracle", "coin"], help="mock only")
        sp.add_argument("--numeric-error-rate", type=float, default=0.0, help="mock only")
        sp.add_argument("--trend-error-rate", type=float, default=0.0, help="mock only")
        sp.add_argument("--claims", type=int, default=4, help="mock claims per reply")
        sp.set_defaults(func=func)

    # verify
    ver = groups.add_parser("verify", parents=[common], help="grade replies against their data")
    ver.add_argument("--records", help="records.jsonl to (re)grade")
    ver.add_argument("--reply", help="a single reply text file")
    data_flags(ver, required=False)
    ver.add_argument("--sample", help="index or id of the reply's sample")
    ver.add_argument("--out", help="write the grading as JSON")
    ver.set_defaults(func=cmd_verify)

    # curate
    cur = groups.add_parser("curate", parents=[common], help="build the fine-tuning set")
    cur.add_argument("--records", required=True)
    cur.add_argument("--target-size", type=int, default=70)
    cur.add_argument("--epochs", type=int, default=2)
    cur.add_argument("--allow-incorrect", action="store_true")
    cur.add_argument("--allow-numeric-errors", action="store_true")
    cur.add_argument("--out", required=True)
    cur.set_defaults(func=cmd_curate)

    # baseline
    bl = groups.add_parser("baseline", help="classical baselines")
    bl_cmds = bl.add_subparsers(dest="command", metavar="SUBCOMMAND", required=True)
    rf = bl_cmds.add_parser("rf", parents=[common], help="random forest on window averages")
    data_flags(rf)
    target_flag(rf)
    rf.add_argument("--per-year", type=int, default=30)
    rf.add_argument("--trees", type=int, default=100)
    rf.add_argument("--max-depth", type=int, default=8)
    rf.add_argument("--min-samples-split", type=int, default=2)
    rf.add_argument("--features-per-split", default="sqrt", help="a count or 'sqrt'")
    rf.add_argument("--out", required=True)
    rf.set_defaults(func=cmd_baseline_rf)

    # report
    rep = groups.add_parser("report", parents=[common], help="metrics CSV, charts and summary")
    rep.add_argument("--records", required=True)
    rep.add_argument("--out", required=True)
    rep.add_argument("--packets", action="store_true", help="also export human grader packets")
    rep.set_defaults(func=cmd_report)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.seed = getattr(args, "seed", None)
    verbose = getattr(args, "verbose", 0) or 0
    logging.basicConfig(level=logging.WARNING - 10 * min(verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except OPERATIONAL_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
