"""Classifiers over encoded datasets, plus a text format for trained models."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..arff import AttributeSpec, Dataset
from .base import ClassifierError, MajorityModel, Model, SchemaMismatch, train_majority
from .ib1 import IB1Model, train_ib1
from .naive_bayes import NaiveBayesModel, train_naive_bayes
from .trees import ForestModel, J48Model, auto_features, train_forest, train_j48

__all__ = [
    "ALGORITHMS",
    "ClassifierError",
    "ClassifierSpec",
    "Model",
    "SchemaMismatch",
    "dumps",
    "loads",
    "predict",
    "predict_distribution",
    "train",
    "train_majority",
    "auto_features",
]

MODEL_VERSION_LINE = "# arffml-model 1"

_MODELS = {
    cls.algorithm: cls
    for cls in (NaiveBayesModel, IB1Model, J48Model, ForestModel, MajorityModel)
}
ALGORITHMS = ("naive_bayes", "random_forest", "j48", "ib1")

_PARAMS = {
    "naive_bayes": set(),
    "ib1": set(),
    "j48": {"confidence", "min_leaf", "subtree_raising", "prune"},
    "random_forest": {"n_trees", "features_per_split", "seed"},
    "majority": set(),
}


@dataclass(frozen=True)
class ClassifierSpec:
    """Algorithm name plus hyperparameters (only those relevant to it are used)."""

    algorithm: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.algorithm not in _PARAMS:
            raise ClassifierError(
                f"unknown classifier {self.algorithm!r}; valid: {', '.join(sorted(_PARAMS))}"
            )
        extra = set(self.params) - _PARAMS[self.algorithm]
        if extra:
            raise ClassifierError(
                f"{self.algorithm} does not take {', '.join(sorted(extra))}"
            )

    @property
    def name(self) -> str:
        return self.algorithm


def train(spec: ClassifierSpec | str, d: Dataset, class_attr) -> Model:
    """Train ``spec`` on ``d``; rows with a missing class are skipped and counted."""
    if isinstance(spec, str):
        spec = ClassifierSpec(spec)
    p = spec.params
    if spec.algorithm == "naive_bayes":
        model = train_naive_bayes(d, class_attr)
    elif spec.algorithm == "ib1":
        model = train_ib1(d, class_attr)
    elif spec.algorithm == "j48":
        model = train_j48(d, class_attr, **p)
    elif spec.algorithm == "random_forest":
        model = train_forest(d, class_attr, **p)
    else:
        model = train_majority(d, class_attr)
    cls = d.values[:, model.class_index]
    cls = cls[~np.isnan(cls)].astype(int)
    model.train_counts = np.bincount(cls, minlength=model.n_classes)
    return model


def predict(model: Model, row) -> str:
    """Predicted class label for one encoded row."""
    return model.class_labels[int(model.predict_indices(row)[0])]


def predict_distribution(model: Model, row) -> np.ndarray:
    """Class distribution (sums to 1) for one encoded row."""
    return model.proba(row)[0]


def dumps(model: Model) -> str:
    body = {
        "algorithm": model.algorithm,
        "attributes": [
            {"name": a.name, "labels": None if a.labels is None else list(a.labels)}
            for a in model.attributes
        ],
        "class_index": model.class_index,
        "n_skipped": model.n_skipped,
        "train_counts": None if model.train_counts is None else model.train_counts.tolist(),
        "params": model.params(),
    }
    # repr-based float formatting in json keeps every double exact.
    return MODEL_VERSION_LINE + "\n" + json.dumps(body, allow_nan=False) + "\n"


def loads(text: str) -> Model:
    head, _, rest = text.partition("\n")
    if head.strip() != MODEL_VERSION_LINE:
        raise ClassifierError(
            f"unsupported model file: expected first line {MODEL_VERSION_LINE!r}, got {head.strip()!r}"
        )
    try:
        body = json.loads(rest)
        cls = _MODELS[body["algorithm"]]
        attributes = tuple(
            AttributeSpec(a["name"], None if a["labels"] is None else tuple(a["labels"]))
            for a in body["attributes"]
        )
        model = cls.from_params(attributes, body["class_index"], body["n_skipped"], body["params"])
        if body.get("train_counts") is not None:
            model.train_counts = np.asarray(body["train_counts"], dtype=np.int64)
        return model
    except (ValueError, KeyError, TypeError) as exc:
        raise ClassifierError(f"corrupt model file: {exc}") from exc
