"""IB1: one nearest neighbour under range-normalised Euclidean distance."""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from ..arff import Dataset
from .base import Model, training_data


def _normalise(values: np.ndarray, lo: float, hi: float) -> np.ndarray:
    if hi > lo:
        return np.clip((values - lo) / (hi - lo), 0.0, 1.0)
    return np.where(np.isnan(values), np.nan, 0.0)


def attribute_difference(q: np.ndarray, t: np.ndarray, nominal: bool, lo: float, hi: float):
    """Per-attribute difference between query values ``q`` and stored values ``t``.

    Numeric values are scaled to [0, 1] by the training range (clamped);
    nominal values differ by 0 or 1; anything missing counts as 1.
    """
    missing = np.isnan(q) | np.isnan(t)
    if nominal:
        diff = (q != t).astype(float)
    else:
        diff = _normalise(q, lo, hi) - _normalise(t, lo, hi)
    return np.where(missing, 1.0, diff)


@numba.njit(cache=True)
def _nearest(Q, T, nominal):
    """Index of the first stored row at minimum squared distance, per query.

    Rows are pre-normalised; squares are summed attribute by attribute, and
    a candidate is abandoned once its partial sum exceeds the best so far
    (partial sums never decrease, so this cannot change the answer).
    """
    out = np.empty(Q.shape[0], dtype=np.int64)
    for i in range(Q.shape[0]):
        best = np.inf
        arg = 0
        for r in range(T.shape[0]):
            d = 0.0
            for j in range(Q.shape[1]):
                q = Q[i, j]
                t = T[r, j]
                if np.isnan(q) or np.isnan(t):
                    diff = 1.0
                elif nominal[j]:
                    diff = 0.0 if q == t else 1.0
                else:
                    diff = q - t
                d += diff * diff
                if d > best:
                    break
            if d < best:
                best = d
                arg = r
        out[i] = arg
    return out


@dataclass
class IB1Model(Model):
    stored: np.ndarray = None
    labels: np.ndarray = None
    lo: np.ndarray = None
    hi: np.ndarray = None

    algorithm = "ib1"
    _train_prepared = None

    def distances(self, X) -> np.ndarray:
        """Squared distances, summed attribute by attribute in column order."""
        X = self.as_matrix(X)
        dist = np.zeros((X.shape[0], self.stored.shape[0]))
        for j, attr in enumerate(self.attributes):
            if j == self.class_index:
                continue
            diff = attribute_difference(
                X[:, j][:, None], self.stored[:, j][None, :], attr.is_nominal, self.lo[j], self.hi[j]
            )
            dist += diff * diff
        return dist

    def _prepared(self, X) -> np.ndarray:
        cols = []
        for j, attr in enumerate(self.attributes):
            if j != self.class_index:
                cols.append(X[:, j] if attr.is_nominal else _normalise(X[:, j], self.lo[j], self.hi[j]))
        return np.ascontiguousarray(np.column_stack(cols)) if cols else np.zeros((X.shape[0], 0))

    def predict_indices(self, X):
        X = self.as_matrix(X)
        nominal = np.array(
            [a.is_nominal for j, a in enumerate(self.attributes) if j != self.class_index], dtype=bool
        )
        if self._train_prepared is None:
            self._train_prepared = self._prepared(self.stored)
        nearest = _nearest(self._prepared(X), self._train_prepared, nominal)
        return self.labels[nearest]

    def proba(self, X):
        pred = self.predict_indices(X)
        out = np.zeros((pred.size, self.n_classes))
        out[np.arange(pred.size), pred] = 1.0
        return out

    def params(self):
        return {
            "stored": [[None if np.isnan(v) else v for v in row] for row in self.stored.tolist()],
            "labels": self.labels.tolist(),
            "lo": [None if np.isnan(v) else v for v in self.lo.tolist()],
            "hi": [None if np.isnan(v) else v for v in self.hi.tolist()],
        }

    @classmethod
    def from_params(cls, attributes, class_index, n_skipped, p):
        def arr(x):
            return np.array([np.nan if v is None else v for v in x], dtype=float)

        stored = np.array(
            [[np.nan if v is None else v for v in row] for row in p["stored"]], dtype=float
        ).reshape(-1, len(attributes))
        return cls(
            attributes, class_index, n_skipped, stored,
            np.asarray(p["labels"], dtype=np.int64), arr(p["lo"]), arr(p["hi"]),
        )


def train_ib1(d: Dataset, class_attr) -> IB1Model:
    td = training_data(d, class_attr)
    stored = td.X[td.rows].copy()
    lo = np.full(d.n_attributes, np.nan)
    hi = np.full(d.n_attributes, np.nan)
    for j, attr in enumerate(d.attributes):
        col = stored[:, j]
        known = col[~np.isnan(col)]
        if attr.is_numeric and known.size:
            lo[j], hi[j] = known.min(), known.max()
    return IB1Model(d.attributes, td.class_index, td.n_skipped, stored, td.y[td.rows], lo, hi)
