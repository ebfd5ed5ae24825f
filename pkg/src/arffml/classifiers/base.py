"""Shared model plumbing: schema checks, training-data preparation, baselines."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..arff import AttributeSpec, Dataset


class ClassifierError(ValueError):
    pass


class SchemaMismatch(ClassifierError):
    """Data does not match the attribute specs a model was trained on."""


def _describe(a: AttributeSpec) -> str:
    return "numeric" if a.is_numeric else f"nominal with {len(a.labels)} labels"


@dataclass
class TrainingData:
    X: np.ndarray
    y: np.ndarray
    rows: np.ndarray
    class_index: int
    n_classes: int
    feature_ids: np.ndarray
    n_values: np.ndarray
    n_skipped: int


def training_data(d: Dataset, class_attr) -> TrainingData:
    """Validate the class column and drop rows whose class is missing."""
    c = d.attribute_index(class_attr)
    spec = d.attributes[c]
    if spec.is_numeric:
        raise ClassifierError(f"class attribute {spec.name!r} is numeric; classifiers need nominal")
    cls = d.values[:, c]
    usable = ~np.isnan(cls)
    rows = np.flatnonzero(usable)
    if rows.size == 0:
        raise ClassifierError("no training rows with a known class")
    y = np.where(usable, cls, 0).astype(np.int64)
    return TrainingData(
        X=d.values,
        y=y,
        rows=rows,
        class_index=c,
        n_classes=len(spec.labels),
        feature_ids=np.array([j for j in range(d.n_attributes) if j != c], dtype=np.int64),
        n_values=np.array([len(a.labels) if a.is_nominal else 0 for a in d.attributes]),
        n_skipped=int(d.n_rows - rows.size),
    )


@dataclass
class Model:
    """Base for trained models. Inputs are full rows; the class cell is ignored."""

    attributes: tuple[AttributeSpec, ...]
    class_index: int
    n_skipped: int = 0

    algorithm = "model"
    # Class histogram of the usable training rows; set by ``train``.
    train_counts = None

    @property
    def class_labels(self) -> tuple[str, ...]:
        return self.attributes[self.class_index].labels

    @property
    def n_classes(self) -> int:
        return len(self.class_labels)

    def check(self, d: Dataset) -> None:
        if d.attributes == self.attributes:
            return
        if len(d.attributes) != len(self.attributes):
            raise SchemaMismatch(
                f"model expects {len(self.attributes)} attributes, data has {len(d.attributes)}"
            )
        for got, want in zip(d.attributes, self.attributes):
            if got != want:
                raise SchemaMismatch(
                    f"attribute {want.name!r}: model expects {_describe(want)}, "
                    f"data has {got.name!r} as {_describe(got)}"
                )

    def as_matrix(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != len(self.attributes):
            raise SchemaMismatch(
                f"row has {X.shape[1]} values, model expects {len(self.attributes)}"
            )
        return X

    def proba(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def predict_indices(self, X: np.ndarray) -> np.ndarray:
        # argmax picks the first maximum: ties go to the lowest label index.
        return np.argmax(self.proba(X), axis=1)

    def params(self) -> dict:
        raise NotImplementedError


@dataclass
class MajorityModel(Model):
    """Always predicts the most frequent training class."""

    class_counts: np.ndarray = None

    algorithm = "majority"

    def proba(self, X):
        X = self.as_matrix(X)
        dist = self.class_counts / self.class_counts.sum()
        return np.tile(dist, (X.shape[0], 1))

    def params(self):
        return {"class_counts": self.class_counts.tolist()}

    @classmethod
    def from_params(cls, attributes, class_index, n_skipped, p):
        return cls(attributes, class_index, n_skipped, np.asarray(p["class_counts"], dtype=float))


def train_majority(d: Dataset, class_attr) -> MajorityModel:
    td = training_data(d, class_attr)
    counts = np.bincount(td.y[td.rows], minlength=td.n_classes).astype(float)
    return MajorityModel(d.attributes, td.class_index, td.n_skipped, counts)
