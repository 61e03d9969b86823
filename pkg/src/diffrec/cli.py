"""Command line interface.

Subcommands: ingest, recommend, evaluate, sweep, grid, compare. Settings
resolve in three layers: built-in defaults, then a ``--config`` file of flat
``key=value`` lines (keys are the long flag names without dashes), then
explicit flags.

Exit codes: 0 success, 1 unreadable or unusable input file, 2 bad arguments
or unknown entity, 3 a sweep or grid finished with failed points.

Report files embed the resolved configuration and the split checksum. The
worker count is deliberately left out of reports so reruns of the same
configuration are byte-identical at any parallelism.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from .datasets import FieldLayout, ingest, load_split, save_split, split
from .errors import SplitCorruptionError, SplitValidationError
from .experiment import (DEFAULT_SWEEPS, GridPlan, SweepPlan, compare_algorithms,
                         find_optimal, run_grid, run_sweep)
from .kernels import KernelScorer, kernel_label, kernel_params, recommend, resolve_kernel
from .metrics import degree_binned_ranking_score, evaluate_kernel

_DELIMITER_NAMES = {"tab": "\t", "comma": ",", "space": " ", "pipe": "|", "semicolon": ";"}


def _delimiter_type(value: str) -> str:
    return _DELIMITER_NAMES.get(value, value)


def _range_type(value: str):
    parts = value.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {value!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"range bounds must be numbers, got {value!r}")
    return lo, hi


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="diffrec",
        description="Diffusion-based recommendation on bipartite user-object networks.")
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="command")
    registry = {}

    def command(name, help_text, func):
        sub = subparsers.add_parser(name, help=help_text)
        sub.set_defaults(func=func, command=name)
        flags = {}

        def add(*names, **kwargs):
            action = sub.add_argument(*names, **kwargs)
            for opt in action.option_strings:
                if opt.startswith("--"):
                    flags[opt[2:]] = action
            return action

        add("--config", help="flat key=value settings file, overridden by flags")
        registry[name] = (sub, flags)
        return add

    def add_kernel_flags(add, default_kernel=None):
        add("--kernel", default=default_kernel, required=default_kernel is None,
            help="kernel name: md, hc, hhp, bhc, bd, pd, general")
        add("--lambda", dest="lam", type=float, default=None,
            help="parameter for hhp, bhc and bd kernels")
        add("--epsilon", type=float, default=None, help="parameter for the pd kernel")
        add("--a", type=float, default=None, help="target exponent for kernel=general")
        add("--b", type=float, default=None, help="source exponent for kernel=general")

    def add_output_flags(add):
        add("--out", default=None, help="report file to write")
        add("--out-format", choices=("json", "csv"), default="json",
            help="report file format")

    # ingest
    add = command("ingest", "parse an interaction file and write a split file", cmd_ingest)
    add("--input", required=True, help="delimited interaction file")
    add("--format", default="user,object,rating,timestamp",
        help="comma-separated column names; use - to skip a column")
    add("--delimiter", type=_delimiter_type, default="\t",
        help="field delimiter, or one of: " + ", ".join(sorted(_DELIMITER_NAMES)))
    add("--threshold", type=float, default=None,
        help="keep only records with rating at or above this value")
    add("--ratio", type=float, default=0.9, help="training fraction of links")
    add("--seed", type=int, default=42, help="split random seed")
    add("--out", required=True, help="split file to write")

    # recommend
    add = command("recommend", "print top recommendations for one user", cmd_recommend)
    add("--input", required=True, help="split file")
    add("--user", required=True, help="raw user id as it appears in the source file")
    add_kernel_flags(add)
    add("--top-l", dest="top_l", type=int, default=20, help="list length")
    add_output_flags(add)

    # evaluate
    add = command("evaluate", "evaluate one kernel on a split", cmd_evaluate)
    add("--input", required=True, help="split file")
    add_kernel_flags(add)
    add("--top-l", dest="top_l", type=int, default=20, help="list length for list metrics")
    add("--degree-bins", action="store_true",
        help="include the degree-binned ranking score curve")
    add("--bin-log-base", type=float, default=None,
        help="log base for degree bin widths (default: natural log)")
    add_output_flags(add)

    # sweep
    add = command("sweep", "sweep one kernel family parameter", cmd_sweep)
    add("--input", required=True, help="split file")
    add("--kernel", default="bd", choices=sorted(DEFAULT_SWEEPS),
        help="kernel family to sweep")
    add("--range", dest="sweep_range", type=_range_type, default=None,
        help="parameter range LO:HI (default: family-specific)")
    add("--step", type=float, default=None, help="parameter step (default 0.01)")
    add("--top-l", dest="top_l", type=int, default=20, help="list length for list metrics")
    add("--workers", type=int, default=1, help="parallel workers (-1 = all cores)")
    add_output_flags(add)

    # grid
    add = command("grid", "evaluate a square exponent grid", cmd_grid)
    add("--input", required=True, help="split file")
    add("--range", dest="grid_range", type=_range_type, default=(0.0, 1.0),
        help="exponent range LO:HI for both axes (default 0:1)")
    add("--step", type=float, default=0.05, help="exponent step for both axes")
    add("--top-l", dest="top_l", type=int, default=20, help="list length for list metrics")
    add("--workers", type=int, default=1, help="parallel workers (-1 = all cores)")
    add_output_flags(add)

    # compare
    add = command("compare", "tune and compare kernel families", cmd_compare)
    add("--input", required=True, help="split file")
    add("--families", default="hhp,bhc,pd,bd",
        help="comma-separated families; md and hc run without tuning")
    add("--top-l", dest="top_l", type=int, default=20, help="list length for list metrics")
    add("--workers", type=int, default=1, help="parallel workers (-1 = all cores)")
    add_output_flags(add)

    return parser, registry


def _read_config_file(path: str):
    entries = {}
    errors = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            errors.append(f"{path}:{lineno}: expected key=value, got {line!r}")
            continue
        entries[key.strip()] = value.strip()
    return entries, errors


_TRUE_WORDS = {"1", "true", "yes", "on"}
_FALSE_WORDS = {"0", "false", "no", "off"}


def _convert_config_value(action, raw: str):
    if isinstance(action, argparse._StoreTrueAction):
        word = raw.lower()
        if word in _TRUE_WORDS:
            return True
        if word in _FALSE_WORDS:
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if action.type is not None:
        try:
            value = action.type(raw)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise ValueError(str(exc))
    else:
        value = raw
    if action.choices is not None and value not in action.choices:
        raise ValueError(f"must be one of {sorted(action.choices)}, got {raw!r}")
    return value


def _apply_config(argv, registry) -> list:
    """Merge a --config file into parser defaults; returns error strings."""
    command = argv[0] if argv and not argv[0].startswith("-") else None
    if command not in registry:
        return []
    boot = argparse.ArgumentParser(add_help=False)
    boot.add_argument("--config", default=None)
    known, _ = boot.parse_known_args(argv[1:])
    if not known.config:
        return []
    sub, flags = registry[command]
    entries, errors = _read_config_file(known.config)
    defaults = {}
    satisfied = []
    for key, raw in sorted(entries.items()):
        if key == "config":
            errors.append("config files cannot nest another config")
            continue
        action = flags.get(key)
        if action is None:
            errors.append(f"unknown config key {key!r} for command {command!r}")
            continue
        try:
            defaults[action.dest] = _convert_config_value(action, raw)
            satisfied.append(action)
        except ValueError as exc:
            errors.append(f"config key {key!r}: {exc}")
    if errors:
        return errors
    sub.set_defaults(**defaults)
    for action in satisfied:
        action.required = False
    return []


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser, registry = _build_parser()

    try:
        config_errors = _apply_config(argv, registry)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 1
    if config_errors:
        for line in config_errors:
            print(f"error: {line}", file=sys.stderr)
        return 2

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        return int(args.func(args) or 0)
    except (OSError, SplitCorruptionError, SplitValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry():
    sys.exit(main())


# ---------------------------------------------------------------------------
# shared helpers

def _resolved_config(args) -> dict:
    skip = {"config", "workers", "func", "command"}
    out = {}
    for dest, value in vars(args).items():
        if dest in skip or callable(value):
            continue
        key = "lambda" if dest == "lam" else dest.replace("_", "-")
        if isinstance(value, tuple):
            value = ":".join(repr(v) if not isinstance(v, str) else v for v in value)
        out[key] = value
    return out


def _cli_kernel(args):
    """Resolve kernel flags, reporting every problem at once."""
    name = args.kernel.lower()
    supplied = {flag: value for flag, value in
                (("lambda", args.lam), ("epsilon", args.epsilon),
                 ("a", args.a), ("b", args.b)) if value is not None}
    wanted = {"hhp": ("lambda",), "bhc": ("lambda",), "bd": ("lambda",),
              "pd": ("epsilon",), "general": ("a", "b"),
              "md": (), "hc": ()}.get(name)
    if wanted is None:
        raise ValueError(f"unknown kernel {args.kernel!r}")
    problems = [f"kernel {name!r} requires --{flag}" for flag in wanted
                if flag not in supplied]
    problems += [f"kernel {name!r} does not take --{flag}" for flag in supplied
                 if flag not in wanted]
    if problems:
        raise ValueError("; ".join(problems))
    if name == "general":
        return resolve_kernel("general", a=args.a, b=args.b)
    if name in ("md", "hc"):
        return resolve_kernel(name)
    param = args.lam if "lambda" in wanted else args.epsilon
    return resolve_kernel(name, param)


def _metrics_dict(report) -> dict:
    return {
        "ranking_score": report.ranking_score,
        "precision_enhancement": report.precision_enhancement,
        "hamming": report.hamming,
        "self_information": report.self_information,
        "length": report.length,
        "users_evaluated": report.users_evaluated,
        "links_evaluated": report.links_evaluated,
        "links_skipped": report.links_skipped,
    }


_METRIC_COLUMNS = ("ranking_score", "precision_enhancement", "hamming",
                   "self_information", "users_evaluated", "links_evaluated",
                   "links_skipped")


def _write_json(path, document):
    Path(path).write_text(json.dumps(document, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def _write_csv(path, config, split_info, header, rows):
    lines = [f"# {key}={value}" for key, value in sorted(config.items())]
    lines += [f"# split.{key}={value}" for key, value in sorted(asdict(split_info).items())]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join("" if cell is None else str(cell) for cell in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _metric_summary(report) -> str:
    return (f"r={report.ranking_score:.5f} ep={report.precision_enhancement:.5f} "
            f"h={report.hamming:.5f} I={report.self_information:.5f}")


def _report_rows(report, error=None):
    if report is None:
        return [None] * len(_METRIC_COLUMNS) + [error]
    return [report.ranking_score, report.precision_enhancement, report.hamming,
            report.self_information, report.users_evaluated,
            report.links_evaluated, report.links_skipped, None]


# ---------------------------------------------------------------------------
# commands

def cmd_ingest(args) -> int:
    layout = FieldLayout.from_spec(args.format, delimiter=args.delimiter)
    result = ingest(args.input, layout, rating_threshold=args.threshold)
    ds = split(result.records, ratio=args.ratio, seed=args.seed)
    checksum = save_split(ds, args.out)
    links = ds.train.num_links + ds.test.num_links
    density = links / (ds.num_users * ds.num_objects)
    print(f"users={ds.num_users} objects={ds.num_objects} links={links} "
          f"sparsity={density:.5f} duplicates={ds.duplicates_dropped} "
          f"malformed={result.malformed_lines} train={ds.train.num_links} "
          f"test={ds.test.num_links}")
    print(f"split written to {args.out} (checksum {checksum})")
    return 0


def cmd_recommend(args) -> int:
    ds = load_split(args.input)
    kernel = _cli_kernel(args)
    user = ds.user_index.get(args.user)
    if user is None:
        raise ValueError(f"unknown user id {args.user!r}")
    scorer = KernelScorer(ds.train, kernel)
    scores = scorer.score_vector(user)
    ranked = recommend(scores, ds.train, args.top_l)
    rows = [(rank, ds.object_ids[obj], f"{scores.scores[obj]:.6f}")
            for rank, obj in enumerate(ranked.items, start=1)]
    for rank, object_id, value in rows:
        print(f"{rank}\t{object_id}\t{value}")
    if args.out:
        config = _resolved_config(args)
        if args.out_format == "json":
            _write_json(args.out, {
                "command": "recommend", "config": config,
                "split": asdict(ds.describe()), "kernel": kernel_params(kernel),
                "items": [{"rank": r, "object_id": o, "score": float(v)}
                          for r, o, v in rows],
            })
        else:
            _write_csv(args.out, config, ds.describe(),
                       ("rank", "object_id", "score"), rows)
    return 0


def cmd_evaluate(args) -> int:
    ds = load_split(args.input)
    kernel = _cli_kernel(args)
    result = evaluate_kernel(ds, kernel, length=args.top_l)
    report = result.report
    print(f"kernel={kernel_label(kernel)} L={args.top_l} {_metric_summary(report)} "
          f"users={report.users_evaluated} links={report.links_evaluated} "
          f"skipped={report.links_skipped}")

    curve = None
    if args.degree_bins or args.bin_log_base is not None:
        curve = degree_binned_ranking_score(result.link_ranks, log_base=args.bin_log_base)
        for b in curve.bins:
            mean = "-" if b.mean_rank is None else f"{b.mean_rank:.5f}"
            print(f"bin {b.index}: degrees [{b.lower:.3f}, {b.upper:.3f}) "
                  f"links={b.link_count} r={mean}")

    if args.out:
        config = _resolved_config(args)
        if args.out_format == "json":
            document = {
                "command": "evaluate", "config": config,
                "split": asdict(ds.describe()), "kernel": kernel_params(kernel),
                "metrics": _metrics_dict(report),
            }
            if curve is not None:
                document["degree_bins"] = [
                    {"index": b.index, "lower": b.lower, "upper": b.upper,
                     "mean_rank": b.mean_rank, "link_count": b.link_count}
                    for b in curve.bins]
            _write_json(args.out, document)
        else:
            rows = [(key, value) for key, value in sorted(_metrics_dict(report).items())]
            if curve is not None:
                rows += [(f"degree_bin_{b.index}",
                          "" if b.mean_rank is None else b.mean_rank)
                         for b in curve.bins]
            _write_csv(args.out, config, ds.describe(), ("metric", "value"), rows)
    return 0


def cmd_sweep(args) -> int:
    ds = load_split(args.input)
    default_start, default_stop, default_step = DEFAULT_SWEEPS[args.kernel]
    start, stop = args.sweep_range if args.sweep_range else (default_start, default_stop)
    plan = SweepPlan(family=args.kernel, start=start, stop=stop,
                     step=args.step if args.step is not None else default_step,
                     length=args.top_l)
    points = run_sweep(ds, plan, n_jobs=args.workers)
    succeeded = [p for p in points if p.report is not None]
    failed = len(points) - len(succeeded)

    best = None
    if succeeded:
        best = find_optimal(points)
        print(f"optimum {kernel_label(resolve_kernel(plan.family, best.parameter))} "
              f"{_metric_summary(best.report)} points={len(points)} failed={failed}")
    else:
        print(f"sweep produced no successful evaluation "
              f"(points={len(points)} failed={failed})", file=sys.stderr)

    if args.out:
        config = _resolved_config(args)
        if args.out_format == "json":
            document = {
                "command": "sweep", "config": config, "split": asdict(ds.describe()),
                "family": plan.family,
                "points": [
                    {"parameter": p.parameter,
                     **({"metrics": _metrics_dict(p.report)} if p.report else
                        {"error": p.error})}
                    for p in points],
            }
            if best is not None:
                document["optimal"] = {"parameter": best.parameter,
                                       "metrics": _metrics_dict(best.report)}
            _write_json(args.out, document)
        else:
            rows = [[p.parameter] + _report_rows(p.report, p.error) for p in points]
            _write_csv(args.out, config, ds.describe(),
                       ("parameter",) + _METRIC_COLUMNS + ("error",), rows)
    return 3 if failed else 0


def cmd_grid(args) -> int:
    ds = load_split(args.input)
    lo, hi = args.grid_range
    plan = GridPlan.square(lo, hi, args.step, length=args.top_l)
    result = run_grid(ds, plan, n_jobs=args.workers)
    cells = result.a_values.size * result.b_values.size
    failed = len(result.errors)

    summary = None
    if result.reports:
        a_min, b_min, lowest = result.argmin()
        summary = {"a": a_min, "b": b_min, "ranking_score": lowest}
        line = f"minimum r={lowest:.5f} at a={a_min:.5f} b={b_min:.5f}"
        diagonal = result.diagonal_best()
        if diagonal is not None:
            line += f"; diagonal best r={diagonal[2]:.5f} at {diagonal[0]:.5f}"
        print(f"{line}; cells={cells} failed={failed}")
    else:
        diagonal = None
        print(f"grid produced no successful evaluation (cells={cells})", file=sys.stderr)

    if args.out:
        config = _resolved_config(args)
        if args.out_format == "json":
            document = {
                "command": "grid", "config": config, "split": asdict(ds.describe()),
                "a_values": [float(v) for v in result.a_values],
                "b_values": [float(v) for v in result.b_values],
                "cells": [
                    {"a": float(result.a_values[i]), "b": float(result.b_values[j]),
                     **({"metrics": _metrics_dict(result.reports[i, j])}
                        if (i, j) in result.reports
                        else {"error": result.errors[i, j]})}
                    for i in range(result.a_values.size)
                    for j in range(result.b_values.size)],
            }
            if summary is not None:
                document["argmin"] = summary
            if diagonal is not None:
                document["diagonal_best"] = {"a": diagonal[0], "b": diagonal[1],
                                             "ranking_score": diagonal[2]}
            _write_json(args.out, document)
        else:
            rows = []
            for i in range(result.a_values.size):
                for j in range(result.b_values.size):
                    report = result.reports.get((i, j))
                    error = result.errors.get((i, j))
                    rows.append([float(result.a_values[i]), float(result.b_values[j])]
                                + _report_rows(report, error))
            _write_csv(args.out, config, ds.describe(),
                       ("a", "b") + _METRIC_COLUMNS + ("error",), rows)
    return 3 if failed else 0


def cmd_compare(args) -> int:
    ds = load_split(args.input)
    families = tuple(f.strip() for f in args.families.split(",") if f.strip())
    if not families:
        raise ValueError("no families to compare")
    comparison = compare_algorithms(ds, families, length=args.top_l, n_jobs=args.workers)
    for row in comparison.rows:
        parameter = "-" if row.parameter is None else f"{row.parameter:.5f}"
        print(f"{row.family:<4} param={parameter} {_metric_summary(row.report)}")
    best = comparison.best("ranking_score")
    print(f"best ranking_score: {best.family}")

    if args.out:
        config = _resolved_config(args)
        if args.out_format == "json":
            _write_json(args.out, {
                "command": "compare", "config": config, "split": asdict(ds.describe()),
                "rows": [
                    {"family": row.family, "parameter": row.parameter,
                     "kernel": kernel_params(row.report.kernel),
                     "metrics": _metrics_dict(row.report)}
                    for row in comparison.rows],
                "best_ranking_score": best.family,
            })
        else:
            rows = [[row.family,
                     "" if row.parameter is None else row.parameter]
                    + _report_rows(row.report)
                    for row in comparison.rows]
            _write_csv(args.out, config, ds.describe(),
                       ("family", "parameter") + _METRIC_COLUMNS + ("error",), rows)
    return 0


if __name__ == "__main__":
    entry()
