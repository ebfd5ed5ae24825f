"""Experiment configuration documents and the two builtin result-set grids.

A config is a YAML mapping::

    name: my-grid
    seed: 7
    classifiers: [naive_bayes, {algorithm: j48, confidence: 0.1}]
    datasets:
      - {name: bris, train: bris.train.arff, dev: bris.dev.arff}
      - {name: perth, synthetic: {city: perth, train_rows: 2000, dev_rows: 500}}
    rows:
      - label: Raw
        target: F21
        filters: []
      - label: All attributes into 4 bins
        target: F21
        scheme: weekday_weekend
        filters: [{kind: equal_width, bins: 4}]

Instead of ``rows`` a config may give ``filters`` (labelled step lists) and
``targets``; every filter is then crossed with every target.
"""

from __future__ import annotations

import copy
from pathlib import Path

import jsonschema
import yaml

from .arff import read_arff
from .classifiers import ALGORITHMS, ClassifierSpec
from .classifiers._rng import derive_seed
from .eval import DataSource, ExperimentSpec, GridRow
from .filters import REMAP_SCHEMES, STEP_KINDS, FilterStep
from .synthetic import CITIES, COUPLINGS, SyntheticConfig, generate


class ConfigError(ValueError):
    pass


STEP_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": list(STEP_KINDS)},
        "bins": {"type": "integer", "minimum": 1},
        "attributes": {"type": "array", "items": {"type": "string"}},
        "scheme": {"enum": sorted(REMAP_SCHEMES)},
        "attribute": {"type": "string"},
    },
}

_CLASSIFIER_OBJECT = {
    "type": "object",
    "required": ["algorithm"],
    "additionalProperties": False,
    "properties": {
        "algorithm": {"enum": list(ALGORITHMS)},
        "confidence": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "min_leaf": {"type": "integer", "minimum": 1},
        "subtree_raising": {"type": "boolean"},
        "prune": {"type": "boolean"},
        "n_trees": {"type": "integer", "minimum": 1},
        "features_per_split": {"anyOf": [{"type": "integer", "minimum": 1}, {"const": "auto"}]},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
    },
}

_SYNTHETIC = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "city": {"enum": sorted(CITIES)},
        "train_rows": {"type": "integer", "minimum": 1},
        "dev_rows": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "missing_rate": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
        "coupling": {"enum": list(COUPLINGS)},
    },
}

_TARGET = {
    "type": "object",
    "required": ["attribute"],
    "additionalProperties": False,
    "properties": {
        "attribute": {"type": "string"},
        "label": {"type": "string"},
        "scheme": {"enum": sorted(REMAP_SCHEMES)},
    },
}

SCHEMA = {
    "type": "object",
    "required": ["classifiers", "datasets"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "repeats": {"type": "integer", "minimum": 1},
        "format": {"enum": ["plain", "markdown", "csv"]},
        "classifiers": {
            "type": "array",
            "minItems": 1,
            "items": {
                "if": {"type": "string"},
                "then": {"enum": list(ALGORITHMS)},
                "else": _CLASSIFIER_OBJECT,
            },
        },
        "datasets": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string"},
                    "train": {"type": "string"},
                    "dev": {"type": "string"},
                    "synthetic": _SYNTHETIC,
                },
            },
        },
        "rows": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["label", "target"],
                "additionalProperties": False,
                "properties": {
                    "label": {"type": "string"},
                    "target": {"type": "string"},
                    "target_label": {"type": "string"},
                    "scheme": {"enum": sorted(REMAP_SCHEMES)},
                    "filters": {"type": "array", "items": STEP_SCHEMA},
                },
            },
        },
        "filters": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["label"],
                "additionalProperties": False,
                "properties": {
                    "label": {"type": "string"},
                    "steps": {"type": "array", "items": STEP_SCHEMA},
                },
            },
        },
        "targets": {"type": "array", "minItems": 1, "items": _TARGET},
    },
}


def _where(path) -> str:
    out = "config"
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def validate(doc) -> None:
    """Raise ConfigError naming the path of the first schema violation."""
    errors = sorted(
        jsonschema.Draft202012Validator(SCHEMA).iter_errors(doc),
        key=lambda e: (len(e.absolute_path), [str(p) for p in e.absolute_path]),
    )
    if errors:
        e = errors[0]
        raise ConfigError(f"{_where(e.absolute_path)}: {e.message}")
    for i, ds in enumerate(doc["datasets"]):
        has_files = "train" in ds or "dev" in ds
        if has_files == ("synthetic" in ds):
            raise ConfigError(
                f"{_where(['datasets', i])}: give either train and dev paths or a synthetic block"
            )
        if has_files and not ("train" in ds and "dev" in ds):
            raise ConfigError(f"{_where(['datasets', i])}: both train and dev are required")
    if ("rows" in doc) == ("filters" in doc or "targets" in doc):
        raise ConfigError("config: give either rows, or filters together with targets")
    if "rows" not in doc and not ("filters" in doc and "targets" in doc):
        raise ConfigError("config: filters and targets must be given together")


def step_from_config(obj) -> FilterStep:
    return FilterStep(
        obj["kind"],
        bins=obj.get("bins"),
        attributes=obj.get("attributes"),
        scheme=obj.get("scheme"),
        attribute=obj.get("attribute"),
    )


def _classifier(obj) -> ClassifierSpec:
    if isinstance(obj, str):
        return ClassifierSpec(obj)
    params = {k: v for k, v in obj.items() if k != "algorithm"}
    if params.get("features_per_split") == "auto":
        params["features_per_split"] = None
    return ClassifierSpec(obj["algorithm"], params)


def _rows(doc) -> tuple[GridRow, ...]:
    if "rows" in doc:
        return tuple(
            GridRow(
                r["label"],
                tuple(step_from_config(s) for s in r.get("filters", [])),
                r["target"],
                r.get("scheme"),
                r.get("target_label"),
            )
            for r in doc["rows"]
        )
    return tuple(
        GridRow(
            f["label"],
            tuple(step_from_config(s) for s in f.get("steps", [])),
            t["attribute"],
            t.get("scheme"),
            t.get("label"),
        )
        for f in doc["filters"]
        for t in doc["targets"]
    )


def _sources(doc, seed: int, base_dir: Path, train_rows=None, dev_rows=None):
    sources = []
    for i, ds in enumerate(doc["datasets"]):
        if "synthetic" in ds:
            syn = ds["synthetic"]
            root = syn.get("seed", derive_seed(seed, i))
            common = dict(
                city=syn.get("city", "brisbane"),
                missing_rate=syn.get("missing_rate", 0.0),
                coupling=syn.get("coupling", "weather_coupled"),
            )
            n_train = train_rows or syn.get("train_rows", 3000)
            n_dev = dev_rows or syn.get("dev_rows", 1000)
            train = generate(SyntheticConfig(n_train, derive_seed(root, 0), **common))
            dev = generate(SyntheticConfig(n_dev, derive_seed(root, 1), **common))
        else:
            train = read_arff(base_dir / ds["train"])
            dev = train if ds["dev"] == ds["train"] else read_arff(base_dir / ds["dev"])
        sources.append(DataSource(ds["name"], train, dev))
    return tuple(sources)


def build_experiment(
    doc, base_dir=".", seed: int | None = None, train_rows=None, dev_rows=None
) -> ExperimentSpec:
    """Validate a parsed config and load its data into an ExperimentSpec.

    ``seed``, ``train_rows`` and ``dev_rows`` override the document's values
    (the row counts only affect synthetic datasets).
    """
    validate(doc)
    seed = doc.get("seed", 1) if seed is None else seed
    return ExperimentSpec(
        name=doc.get("name", "experiment"),
        sources=_sources(doc, seed, Path(base_dir), train_rows, dev_rows),
        rows=_rows(doc),
        classifiers=tuple(_classifier(c) for c in doc["classifiers"]),
        seed=seed,
        repeats=doc.get("repeats", 1),
    )


def load_config(path) -> dict:
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected a mapping at the top level")
    return doc


# --------------------------------------------------------------------------
# Builtin grids

CLASSIFIERS = ["naive_bayes", "random_forest", "j48", "ib1"]
WEATHER = [f"F{i}" for i in range(1, 21)]
_SYNTHETIC_CITIES = [
    {
        "name": city,
        "synthetic": {
            "city": city,
            "train_rows": 3000,
            "dev_rows": 1000,
            "missing_rate": 0.02,
            "coupling": "weather_coupled",
        },
    }
    for city in ("brisbane", "adelaide", "perth", "hobart")
]

_IMPUTE = {"kind": "replace_missing"}


def _all_bins(k):
    return {"kind": "equal_width", "bins": k, "attributes": WEATHER}


def _all_label(k):
    return f"Unsupervised Discretisation of all Attributes (F1-F20) into {k} Bin{'s' if k > 1 else ''}"


_DAY = "Week day (F21)"

RESULTSET1 = {
    "name": "Result Set 1",
    "seed": 1,
    "classifiers": CLASSIFIERS,
    "datasets": _SYNTHETIC_CITIES,
    "rows": [
        {"label": "Raw (No Pre-Processing)", "target": "F21", "target_label": _DAY, "filters": []},
        {"label": "Replace Missing Values", "target": "F21", "target_label": _DAY,
         "filters": [_IMPUTE]},
        {"label": "Supervised Discretisation of all attributes", "target": "F21",
         "target_label": _DAY,
         "filters": [_IMPUTE, {"kind": "supervised_mdl", "attributes": WEATHER}]},
        {"label": "Unsupervised Discretisation of Year attribute into 2 Bins", "target": "F21",
         "target_label": _DAY,
         "filters": [_IMPUTE, {"kind": "equal_width", "bins": 2, "attributes": ["F1"]}]},
        {"label": "Unsupervised Discretisation of Year attribute into 10 Bins", "target": "F21",
         "target_label": _DAY,
         "filters": [_IMPUTE, {"kind": "equal_width", "bins": 10, "attributes": ["F1"]}]},
        *[
            {"label": _all_label(k), "target": "F21", "target_label": _DAY,
             "filters": [_IMPUTE, _all_bins(k)]}
            for k in (10, 4, 2, 1)
        ],
        {"label": _all_label(4), "target": "F21", "scheme": "weekday_sat_sun",
         "target_label": "Weekday/Sat/Sun", "filters": [_IMPUTE, _all_bins(4)]},
        {"label": _all_label(4), "target": "F21", "scheme": "weekday_weekend",
         "target_label": "Weekday/Weekend", "filters": [_IMPUTE, _all_bins(4)]},
    ],
}

RESULTSET2 = {
    "name": "Result Set 2",
    "seed": 1,
    "classifiers": CLASSIFIERS,
    "datasets": _SYNTHETIC_CITIES,
    "filters": [{"label": _all_label(k), "steps": [_IMPUTE, _all_bins(k)]} for k in (10, 4, 2)],
    "targets": [
        {"attribute": "F4", "label": "Rainfall (F4)"},
        {"attribute": "F7", "label": "Avg Temperature (F7)"},
        {"attribute": "F8", "label": "Max Wind (F8)"},
    ],
}

BUILTINS = {"resultset1": RESULTSET1, "resultset2": RESULTSET2}


def builtin(name: str) -> dict:
    if name not in BUILTINS:
        raise ConfigError(f"unknown builtin config {name!r}; expected one of {sorted(BUILTINS)}")
    return copy.deepcopy(BUILTINS[name])
