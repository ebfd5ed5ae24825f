"""Command-line entry point: ``arffml <command> ...``.

Exit codes: 0 success, 1 usage error, 2 data or schema error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path

import jsonschema
import yaml

from . import classifiers
from .arff import Dataset, column_stats, format_number, read_arff, write_arff
from .eval import ExperimentError, render_table, report_lines, run_experiment
from .experiments import (
    BUILTINS,
    STEP_SCHEMA,
    ConfigError,
    build_experiment,
    builtin,
    load_config,
    step_from_config,
)
from .filters import fit_pipeline, load_pipeline
from .synthetic import CITIES, COUPLINGS, SyntheticConfig, generate

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

# Parse, filter, classifier and config errors all subclass ValueError; bad
# attribute references raise KeyError/IndexError.
DATA_ERRORS = (ValueError, KeyError, IndexError, ExperimentError, OSError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# inspect


def _percent(part: int, whole: int) -> str:
    return f"{math.floor(100 * part / whole + 0.5) if whole else 0}%"


def _stat(x: float | None) -> str:
    return "?" if x is None else f"{x:.3f}"


def inspect_text(d: Dataset, only=None) -> str:
    """Per-attribute summary blocks for ``d``."""
    out = [f"Relation: {d.relation}", f"Instances: {d.n_rows}", f"Attributes: {d.n_attributes}", ""]
    targets = range(d.n_attributes) if only is None else [d.attribute_index(only)]
    for j in targets:
        s = column_stats(d, j)
        out.append(f"Name: {s.name}\t\tType: {s.kind.capitalize()}")
        out.append(
            f"Missing: {s.missing} ({_percent(s.missing, s.count)})\t\t"
            f"Distinct: {s.distinct}\t\tUnique: {s.unique} ({_percent(s.unique, s.count)})"
        )
        if s.label_counts is not None:
            out.append("No.\tLabel\tCount")
            out += [f"{i}\t{lab}\t{c}" for i, (lab, c) in enumerate(s.label_counts, 1)]
        else:
            out.append("Statistic\tValue")
            out.append(f"Minimum\t{'?' if s.minimum is None else format_number(s.minimum)}")
            out.append(f"Maximum\t{'?' if s.maximum is None else format_number(s.maximum)}")
            out.append(f"Mean\t{_stat(s.mean)}")
            out.append(f"StdDev\t{_stat(s.stddev)}")
        out.append("")
    return "\n".join(out)


def cmd_inspect(args) -> str:
    return inspect_text(read_arff(args.path), args.attribute)


# --------------------------------------------------------------------------
# generate


def cmd_generate(args) -> str:
    cfg = SyntheticConfig(
        n_rows=args.rows,
        seed=args.seed,
        city=args.city,
        missing_rate=args.missing_rate,
        coupling=args.coupling,
    )
    return write_arff(generate(cfg))


# --------------------------------------------------------------------------
# filter / train / predict


def _parse_step(text: str):
    try:
        obj = yaml.safe_load(text)
        if isinstance(obj, str):
            obj = {"kind": obj}
        jsonschema.validate(obj, STEP_SCHEMA)
    except (yaml.YAMLError, jsonschema.ValidationError) as exc:
        msg = exc.message if isinstance(exc, jsonschema.ValidationError) else str(exc)
        raise UsageError(f"bad --step {text!r}: {msg}") from exc
    return step_from_config(obj)


def _load_steps(path):
    doc = yaml.safe_load(Path(path).read_text())
    items = doc.get("steps") if isinstance(doc, dict) else doc
    if not isinstance(items, list):
        raise ConfigError(f"{path}: expected a list of filter steps (or a mapping with 'steps')")
    steps = []
    for i, obj in enumerate(items):
        try:
            jsonschema.validate(obj, STEP_SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"{path}: steps[{i}]: {exc.message}") from exc
        steps.append(step_from_config(obj))
    return steps


def cmd_filter(args) -> str:
    d = read_arff(args.input)
    if args.load_filter:
        if args.step or args.steps:
            raise UsageError("--load-filter cannot be combined with --step/--steps")
        pipeline = load_pipeline(Path(args.load_filter).read_text())
    else:
        steps = (_load_steps(args.steps) if args.steps else []) + [_parse_step(s) for s in args.step]
        if not steps:
            raise UsageError("give filter steps with --step/--steps, or --load-filter")
        pipeline = fit_pipeline(steps, d, args.class_attr)
    if args.save_filter:
        Path(args.save_filter).write_text(pipeline.dumps())
    return write_arff(pipeline.apply(d))


def _param_value(text: str):
    value = yaml.safe_load(text)
    return None if value == "auto" else value


def cmd_train(args) -> str:
    d = read_arff(args.input)
    params = {}
    for item in args.param:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--param expects key=value, got {item!r}")
        params[key.strip()] = _param_value(value)
    if args.algorithm == "random_forest" and "seed" not in params:
        params["seed"] = args.seed
    spec = classifiers.ClassifierSpec(args.algorithm, params)
    model = classifiers.train(spec, d, args.class_attr)
    Path(args.model).write_text(classifiers.dumps(model))
    note = f"trained {args.algorithm} on {d.n_rows - model.n_skipped} rows"
    if model.n_skipped:
        note += f" ({model.n_skipped} rows with a missing class skipped)"
    print(note, file=sys.stderr)
    return ""


def cmd_predict(args) -> str:
    model = classifiers.loads(Path(args.model).read_text())
    d = read_arff(args.input)
    model.check(d)
    labels = model.class_labels
    pred = model.predict_indices(d.values)
    dist = model.proba(d.values) if args.distribution else None
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["row", "predicted"] + ([f"p_{lab}" for lab in labels] if args.distribution else []))
        for i, p in enumerate(pred):
            extra = [format_number(float(v)) for v in dist[i]] if args.distribution else []
            w.writerow([i + 1, labels[p]] + extra)
        return buf.getvalue()
    lines = []
    for i, p in enumerate(pred):
        line = labels[p]
        if args.distribution:
            line += "\t" + " ".join(f"{v:.6f}" for v in dist[i])
        lines.append(line)
    return "\n".join(lines) + ("\n" if lines else "")


# --------------------------------------------------------------------------
# experiment


def cmd_experiment(args) -> str:
    if args.config in BUILTINS and not Path(args.config).exists():
        doc, base = builtin(args.config), Path(".")
    else:
        doc, base = load_config(args.config), Path(args.config).parent
    fmt = args.format or doc.get("format", "plain")
    spec = build_experiment(
        doc, base, seed=args.seed_given, train_rows=args.train_rows, dev_rows=args.dev_rows
    )
    table = run_experiment(spec, jobs=args.jobs)
    if args.report:
        Path(args.report).write_text(report_lines(table))
    return render_table(table, fmt)


# --------------------------------------------------------------------------
# argument parsing


def _add_globals(p, suppress: bool):
    default = argparse.SUPPRESS if suppress else None
    p.add_argument("--seed", type=int, default=default, help="random seed (default 1)")
    p.add_argument(
        "--format", choices=["plain", "markdown", "csv"], default=default, help="output format"
    )
    p.add_argument("--out", default=default, help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="arffml", description="ARFF classification toolkit and experiment runner")
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("inspect", help="per-attribute statistics of an ARFF file")
    p.add_argument("path")
    p.add_argument("--attribute", help="only this attribute (name or 0-based index)")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("generate", help="write a synthetic weather dataset")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--city", choices=sorted(CITIES), default="brisbane")
    p.add_argument("--missing-rate", type=float, default=0.0)
    p.add_argument("--coupling", choices=COUPLINGS, default="weather_coupled")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("filter", help="fit filters on a dataset (or load fitted ones) and apply them")
    p.add_argument("input")
    p.add_argument("--step", action="append", default=[],
                   help="filter step as YAML, e.g. '{kind: equal_width, bins: 10}'; repeatable")
    p.add_argument("--steps", help="YAML file holding a list of filter steps")
    p.add_argument("--class", dest="class_attr", help="class attribute (excluded from imputation/MDL)")
    p.add_argument("--save-filter", help="write the fitted filters here")
    p.add_argument("--load-filter", help="apply previously fitted filters instead of fitting")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("train", help="train a classifier and save the model")
    p.add_argument("input")
    p.add_argument("--algorithm", required=True, choices=classifiers.ALGORITHMS)
    p.add_argument("--class", dest="class_attr", required=True)
    p.add_argument("--param", action="append", default=[], help="hyperparameter key=value")
    p.add_argument("--model", required=True, help="model output path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict one label per row with a saved model")
    p.add_argument("model")
    p.add_argument("input")
    p.add_argument("--distribution", action="store_true", help="also print class probabilities")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("experiment", help="run an experiment grid and render its table")
    p.add_argument("config", help=f"config file, or a builtin: {', '.join(sorted(BUILTINS))}")
    p.add_argument("--jobs", type=int, default=1, help="grid cells run concurrently")
    p.add_argument("--train-rows", type=int, help="override synthetic train size")
    p.add_argument("--dev-rows", type=int, help="override synthetic dev size")
    p.add_argument("--report", help="write per-cell JSON lines here")
    p.set_defaults(func=cmd_experiment)

    for action in sub.choices.values():
        _add_globals(action, suppress=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, or a usage error already printed
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    args.seed_given = args.seed
    if args.seed is None:
        args.seed = 1
    try:
        text = args.func(args)
        if text:
            if args.out:
                Path(args.out).write_text(text)
            else:
                sys.stdout.write(text)
        return EXIT_OK
    except UsageError as exc:
        print(f"arffml: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DATA_ERRORS as exc:
        # str(KeyError) wraps the message in quotes.
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"arffml: error: {msg}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - last-resort report
        print(f"arffml: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
