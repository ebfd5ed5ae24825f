"""J48-style pruned decision tree and a random forest of unpruned trees."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..arff import Dataset
from ._rng import derive_seed
from .base import ClassifierError, Model, training_data
from .tree import Tree, grow_and_prune, grow_tree

FOREST_MIN_LEAF = 1.0


@dataclass
class J48Model(Model):
    tree: Tree = None

    algorithm = "j48"

    def proba(self, X):
        return self.tree.proba(self.as_matrix(X))

    def params(self):
        return {"tree": self.tree.to_json()}

    @classmethod
    def from_params(cls, attributes, class_index, n_skipped, p):
        return cls(attributes, class_index, n_skipped, Tree.from_json(p["tree"]))


def train_j48(
    d: Dataset, class_attr, confidence: float = 0.25, min_leaf: float = 2,
    subtree_raising: bool = True, prune: bool = True,
) -> J48Model:
    if not 0 < confidence <= 1:
        raise ClassifierError(f"confidence must lie in (0, 1], got {confidence}")
    if min_leaf < 1:
        raise ClassifierError(f"min_leaf must be at least 1, got {min_leaf}")
    td = training_data(d, class_attr)
    tree = grow_and_prune(
        td.X, td.y, td.n_classes, td.n_values, td.feature_ids, td.rows,
        np.ones(td.rows.size), confidence=confidence, min_leaf=float(min_leaf),
        subtree_raising=subtree_raising, prune=prune,
    )
    return J48Model(d.attributes, td.class_index, td.n_skipped, tree)


def auto_features(n_features: int) -> int:
    return int(math.floor(math.log2(n_features) + 1)) if n_features > 0 else 0


def bootstrap_counts(seed: int, tree_index: int, n: int) -> np.ndarray:
    """How many times each of ``n`` usable rows is drawn for one tree."""
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, tree_index, 0)))
    return np.bincount(rng.integers(0, n, size=n), minlength=n)


@dataclass
class ForestModel(Model):
    trees: list = field(default_factory=list)
    features_per_split: int = 0
    seed: int = 0

    algorithm = "random_forest"

    def votes(self, X) -> np.ndarray:
        X = self.as_matrix(X)
        votes = np.zeros((X.shape[0], self.n_classes))
        idx = np.arange(X.shape[0])
        for t in self.trees:
            votes[idx, np.argmax(t.proba(X), axis=1)] += 1
        return votes

    def proba(self, X):
        return self.votes(X) / len(self.trees)

    def params(self):
        return {
            "features_per_split": self.features_per_split,
            "seed": self.seed,
            "trees": [t.to_json() for t in self.trees],
        }

    @classmethod
    def from_params(cls, attributes, class_index, n_skipped, p):
        return cls(
            attributes, class_index, n_skipped,
            [Tree.from_json(t) for t in p["trees"]], p["features_per_split"], p["seed"],
        )


def train_forest(
    d: Dataset, class_attr, n_trees: int = 100, features_per_split: int | None = None,
    seed: int = 1,
) -> ForestModel:
    if n_trees < 1:
        raise ClassifierError(f"n_trees must be at least 1, got {n_trees}")
    td = training_data(d, class_attr)
    n_feat = td.feature_ids.size
    k = auto_features(n_feat) if features_per_split is None else int(features_per_split)
    if not 1 <= k <= max(n_feat, 1):
        raise ClassifierError(f"features_per_split must lie in [1, {n_feat}], got {k}")
    trees = []
    for i in range(n_trees):
        counts = bootstrap_counts(seed, i, td.rows.size)
        drawn = np.flatnonzero(counts)
        trees.append(
            grow_tree(
                td.X, td.y, td.n_classes, td.n_values, td.feature_ids,
                td.rows[drawn], counts[drawn].astype(float),
                min_leaf=FOREST_MIN_LEAF, k_features=k, seed=derive_seed(seed, i, 1),
            )
        )
    return ForestModel(d.attributes, td.class_index, td.n_skipped, trees, k, int(seed))
