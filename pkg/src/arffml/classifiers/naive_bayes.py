"""Naive Bayes with Gaussian numeric likelihoods and Laplace-smoothed nominal ones."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..arff import Dataset
from .base import Model, training_data

VARIANCE_FLOOR = 1e-6


@dataclass
class NaiveBayesModel(Model):
    priors: np.ndarray = None
    # attribute index -> (n_labels, n_classes) table of P(label | class)
    nominal: dict = field(default_factory=dict)
    # attribute index -> (means, variances), each of shape (n_classes,)
    gaussian: dict = field(default_factory=dict)

    algorithm = "naive_bayes"

    def log_joint(self, X) -> np.ndarray:
        """log P(class) + sum of log P(value | class); missing values are skipped."""
        X = self.as_matrix(X)
        with np.errstate(divide="ignore"):
            out = np.tile(np.log(self.priors), (X.shape[0], 1))
        for j, table in self.nominal.items():
            v = X[:, j]
            known = ~np.isnan(v)
            out[known] += np.log(table[v[known].astype(int)])
        for j, (mean, var) in self.gaussian.items():
            v = X[:, j]
            known = ~np.isnan(v)
            x = v[known][:, None]
            out[known] += -0.5 * np.log(2 * math.pi * var) - (x - mean) ** 2 / (2 * var)
        return out

    def proba(self, X):
        log = self.log_joint(X)
        top = log.max(axis=1, keepdims=True)
        p = np.exp(log - top)
        return p / p.sum(axis=1, keepdims=True)

    def params(self):
        return {
            "priors": self.priors.tolist(),
            "nominal": {str(j): t.tolist() for j, t in self.nominal.items()},
            "gaussian": {str(j): [m.tolist(), v.tolist()] for j, (m, v) in self.gaussian.items()},
        }

    @classmethod
    def from_params(cls, attributes, class_index, n_skipped, p):
        return cls(
            attributes,
            class_index,
            n_skipped,
            np.asarray(p["priors"], dtype=float),
            {int(j): np.asarray(t, dtype=float) for j, t in p["nominal"].items()},
            {
                int(j): (np.asarray(m, dtype=float), np.asarray(v, dtype=float))
                for j, (m, v) in p["gaussian"].items()
            },
        )


def _gaussian(values: np.ndarray) -> tuple[float, float] | None:
    if values.size == 0:
        return None
    var = float(values.var(ddof=1)) if values.size > 1 else 0.0
    return float(values.mean()), max(var, VARIANCE_FLOOR)


def train_naive_bayes(d: Dataset, class_attr) -> NaiveBayesModel:
    td = training_data(d, class_attr)
    X, y = td.X[td.rows], td.y[td.rows]
    C = td.n_classes
    priors = np.bincount(y, minlength=C) / y.size
    nominal, gaussian = {}, {}
    for j in td.feature_ids:
        col = X[:, j]
        known = ~np.isnan(col)
        if td.n_values[j] > 0:
            V = int(td.n_values[j])
            counts = np.zeros((V, C))
            np.add.at(counts, (col[known].astype(int), y[known]), 1.0)
            nominal[int(j)] = (counts + 1) / (counts.sum(axis=0) + V)
        else:
            overall = _gaussian(col[known]) or (0.0, VARIANCE_FLOOR)
            means, variances = np.empty(C), np.empty(C)
            for c in range(C):
                # A class with no observed values falls back to the pooled estimate.
                means[c], variances[c] = _gaussian(col[known & (y == c)]) or overall
            gaussian[int(j)] = (means, variances)
    return NaiveBayesModel(d.attributes, td.class_index, td.n_skipped, priors, nominal, gaussian)
