"""Dev-set evaluation and the dataset x filter x classifier experiment grid."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .arff import Dataset
from .classifiers import ClassifierSpec, Model, train
from .classifiers._rng import derive_seed
from .filters import FilterStep, fit_pipeline

DISPLAY_NAMES = {
    "naive_bayes": "Naive Bayes",
    "random_forest": "Random Forest",
    "j48": "J48",
    "ib1": "IB1",
    "majority": "Majority",
}


class ExperimentError(RuntimeError):
    """A grid cell failed; the message says which one."""


# Bad data, filter or classifier settings; a KeyError names a missing attribute.
_CELL_ERRORS = (ValueError, KeyError, IndexError)


def _reason(exc: Exception) -> str:
    return str(exc.args[0]) if isinstance(exc, KeyError) and exc.args else str(exc)


@dataclass
class EvaluationReport:
    labels: tuple[str, ...]
    confusion: np.ndarray  # [true, predicted] counts
    n_unseen: int = 0  # dev rows whose class never occurred in training
    n_skipped: int = 0  # dev rows with a missing class
    dev_is_train: bool = False

    @property
    def n_total(self) -> int:
        return int(self.confusion.sum())

    @property
    def n_correct(self) -> int:
        return int(np.trace(self.confusion))

    @property
    def accuracy(self) -> float:
        return self.n_correct / self.n_total if self.n_total else math.nan

    def precision(self) -> np.ndarray:
        predicted = self.confusion.sum(axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(predicted > 0, np.diag(self.confusion) / predicted, np.nan)

    def recall(self) -> np.ndarray:
        actual = self.confusion.sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(actual > 0, np.diag(self.confusion) / actual, np.nan)

    def to_json(self) -> dict:
        def clean(a):
            return [None if math.isnan(v) else v for v in a.tolist()]

        return {
            "labels": list(self.labels),
            "n_total": self.n_total,
            "n_correct": self.n_correct,
            "accuracy": self.accuracy,
            "n_unseen": self.n_unseen,
            "n_skipped": self.n_skipped,
            "dev_is_train": self.dev_is_train,
            "confusion": self.confusion.tolist(),
            "precision": clean(self.precision()),
            "recall": clean(self.recall()),
        }


def evaluate(model: Model, dev: Dataset, dev_is_train: bool = False) -> EvaluationReport:
    """Score ``model`` on ``dev``; rows with a missing class are excluded and counted."""
    model.check(dev)
    c = model.class_index
    truth = dev.values[:, c]
    rows = np.flatnonzero(~np.isnan(truth))
    y = truth[rows].astype(np.int64)
    pred = model.predict_indices(dev.values[rows]) if rows.size else np.zeros(0, np.int64)
    C = model.n_classes
    confusion = np.zeros((C, C), dtype=np.int64)
    np.add.at(confusion, (y, pred), 1)
    n_unseen = 0
    if model.train_counts is not None:
        unseen = model.train_counts == 0
        n_unseen = int(unseen[y].sum())
        # Models never predict a class with no training rows, so these rows are
        # already off the diagonal; the assertion guards that contract.
        assert not np.diag(confusion)[unseen].any()
    return EvaluationReport(
        dev.attributes[c].labels, confusion, n_unseen, int(dev.n_rows - rows.size), dev_is_train
    )


def majority_baseline(train_set: Dataset, class_attr) -> Model:
    return train("majority", train_set, class_attr)


# --------------------------------------------------------------------------
# Experiment grid


@dataclass(frozen=True)
class DataSource:
    name: str
    train: Dataset
    dev: Dataset

    @property
    def dev_is_train(self) -> bool:
        return self.train is self.dev


@dataclass(frozen=True)
class GridRow:
    """One table row: a filter chain plus the class target it predicts.

    ``scheme`` remaps a weekday class before any other filter is fitted.
    """

    label: str
    steps: tuple[FilterStep, ...]
    target: str
    scheme: str | None = None
    target_label: str | None = None

    def pipeline(self) -> list[FilterStep]:
        steps = list(self.steps)
        if self.scheme is not None:
            steps.insert(0, FilterStep("class_remap", scheme=self.scheme, attribute=self.target))
        return steps


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    sources: tuple[DataSource, ...]
    rows: tuple[GridRow, ...]
    classifiers: tuple[ClassifierSpec, ...]
    seed: int = 1
    repeats: int = 1


def cell_seed(spec: ExperimentSpec, source: int, row: int, clf: int, repeat: int = 0) -> int:
    return derive_seed(spec.seed, source, row, clf, repeat)


def _seeded(spec: ClassifierSpec, seed: int) -> ClassifierSpec:
    if spec.algorithm != "random_forest":
        return spec
    base = spec.params.get("seed")
    # An explicit forest seed is still varied per cell so repeats differ.
    s = seed if base is None else derive_seed(base, seed)
    return ClassifierSpec(spec.algorithm, {**spec.params, "seed": s})


@dataclass
class Cell:
    reports: list[EvaluationReport]
    seeds: list[int]

    @property
    def accuracy(self) -> float:
        return float(np.mean([r.accuracy for r in self.reports]))

    @property
    def stddev(self) -> float | None:
        if len(self.reports) < 2:
            return None
        return float(np.std([r.accuracy for r in self.reports], ddof=1))


@dataclass
class ResultRow:
    dataset: str
    label: str
    target: str
    cells: list[Cell]


@dataclass
class ResultTable:
    title: str
    classifiers: tuple[str, ...]
    rows: list[ResultRow] = field(default_factory=list)

    @property
    def datasets(self) -> list[str]:
        return list(dict.fromkeys(r.dataset for r in self.rows))

    def for_dataset(self, name: str) -> list[ResultRow]:
        return [r for r in self.rows if r.dataset == name]

    def accuracy_grid(self) -> np.ndarray:
        return np.array([[c.accuracy for c in r.cells] for r in self.rows])


def run_cell(spec: ExperimentSpec, si: int, ri: int) -> ResultRow:
    """Fit one row's filters on one source's train split and score every classifier."""
    source, row = spec.sources[si], spec.rows[ri]
    where = f"dataset {source.name!r}, row {row.label!r}"
    try:
        pipeline = fit_pipeline(row.pipeline(), source.train, row.target)
        train_set = pipeline.apply(source.train)
        dev = train_set if source.dev_is_train else pipeline.apply(source.dev)
    except _CELL_ERRORS as exc:
        raise ExperimentError(f"{where}: {_reason(exc)}") from exc
    cells = []
    for ci, clf in enumerate(spec.classifiers):
        reports, seeds = [], []
        for rep in range(spec.repeats):
            seed = cell_seed(spec, si, ri, ci, rep)
            try:
                model = train(_seeded(clf, seed), train_set, row.target)
                reports.append(evaluate(model, dev, dev_is_train=source.dev_is_train))
            except _CELL_ERRORS as exc:
                raise ExperimentError(f"{where}, classifier {clf.algorithm}: {_reason(exc)}") from exc
            seeds.append(seed)
        cells.append(Cell(reports, seeds))
    return ResultRow(source.name, row.label, row.target_label or row.target, cells)


def run_experiment(spec: ExperimentSpec, jobs: int = 1) -> ResultTable:
    """Run every (source, row) cell; results come back in grid order whatever ``jobs`` is."""
    coords = [(si, ri) for si in range(len(spec.sources)) for ri in range(len(spec.rows))]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(lambda c: run_cell(spec, *c), coords))
    else:
        rows = [run_cell(spec, *c) for c in coords]
    return ResultTable(spec.name, tuple(c.algorithm for c in spec.classifiers), rows)


# --------------------------------------------------------------------------
# Rendering


def format_percent(acc: float, std: float | None = None, sign: bool = True) -> str:
    if math.isnan(acc):
        return "n/a"
    text = f"{100 * acc:.4f}" + ("%" if sign else "")
    if std is not None:
        text += f" ± {100 * std:.4f}"
    return text


def _header(t: ResultTable) -> list[str]:
    return ["Configuration", "Class"] + [DISPLAY_NAMES.get(c, c) for c in t.classifiers]


def _body(t: ResultTable, rows: list[ResultRow]) -> list[list[str]]:
    return [[r.label, r.target] + [format_percent(c.accuracy, c.stddev) for c in r.cells] for r in rows]


def _plain(t: ResultTable) -> str:
    out = [t.title, ""]
    for name in t.datasets:
        table = [_header(t)] + _body(t, t.for_dataset(name))
        widths = [max(len(r[i]) for r in table) for i in range(len(table[0]))]
        out.append(f"Dataset: {name}")
        for k, r in enumerate(table):
            cells = [r[i].ljust(widths[i]) if i < 2 else r[i].rjust(widths[i]) for i in range(len(r))]
            out.append("  ".join(cells).rstrip())
            if k == 0:
                out.append("  ".join("-" * w for w in widths))
        out.append("")
    return "\n".join(out)


def _markdown(t: ResultTable) -> str:
    def esc(s: str) -> str:
        return s.replace("|", "\\|")

    out = [f"# {t.title}", ""]
    for name in t.datasets:
        header = _header(t)
        out += [f"## {name}", "", "| " + " | ".join(header) + " |"]
        out.append("|" + "|".join(["---", "---"] + ["---:"] * len(t.classifiers)) + "|")
        for r in _body(t, t.for_dataset(name)):
            out.append("| " + " | ".join(esc(c) for c in r) + " |")
        out.append("")
    return "\n".join(out)


def _csv(t: ResultTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    repeated = any(c.stddev is not None for r in t.rows for c in r.cells)
    head = ["dataset", "configuration", "class"]
    for c in t.classifiers:
        head.append(c)
        if repeated:
            head.append(c + "_std")
    w.writerow(head)
    for r in t.rows:
        line = [r.dataset, r.label, r.target]
        for c in r.cells:
            line.append(format_percent(c.accuracy, sign=False))
            if repeated:
                line.append(format_percent(c.stddev, sign=False) if c.stddev is not None else "")
        w.writerow(line)
    return buf.getvalue()


RENDERERS = {"plain": _plain, "markdown": _markdown, "csv": _csv}


def render_table(t: ResultTable, fmt: str = "plain") -> str:
    if fmt not in RENDERERS:
        raise ValueError(f"unknown format {fmt!r}; expected one of {sorted(RENDERERS)}")
    return RENDERERS[fmt](t)


def report_lines(t: ResultTable) -> str:
    """JSON lines, one object per (row, classifier, repeat) evaluation."""
    lines = []
    for r in t.rows:
        for clf, cell in zip(t.classifiers, r.cells):
            for rep, (report, seed) in enumerate(zip(cell.reports, cell.seeds)):
                obj = {
                    "table": t.title,
                    "dataset": r.dataset,
                    "configuration": r.label,
                    "class": r.target,
                    "classifier": clf,
                    "repeat": rep,
                    "seed": seed,
                }
                obj.update(report.to_json())
                lines.append(json.dumps(obj, allow_nan=False))
    return "\n".join(lines) + ("\n" if lines else "")
