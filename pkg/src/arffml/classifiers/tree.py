"""C4.5-style decision trees: gain-ratio growth and pessimistic-error pruning.

Growth runs in a compiled kernel over the dataset's value matrix. Instances
are (row, weight) entries so that bootstrap counts and C4.5's fractional
treatment of missing values share one code path: an entry whose split value
is missing is copied into every child with its weight scaled by that child's
share of the known weight.

The grown tree is stored flat (children of a node are contiguous), which is
what the compiled prediction kernel walks. Pruning works on a temporary
linked view that still carries each node's training entries.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from statistics import NormalDist

import numba
import numpy as np

from ._rng import sample_without_replacement

# Splits must gain more than this many bits; guards against float noise.
MIN_GAIN = 1e-10


# --------------------------------------------------------------------------
# Compiled growth


@numba.njit(cache=True)
def _entropy(counts, total):
    if total <= 0.0:
        return 0.0
    h = 0.0
    for c in counts:
        if c > 0.0:
            p = c / total
            h -= p * math.log2(p)
    return h


@numba.njit(cache=True)
def _nominal_gain_ratio(X, y, rows, w, f, n_vals, n_classes, min_leaf):
    counts = np.zeros((n_vals, n_classes))
    branch = np.zeros(n_vals)
    class_known = np.zeros(n_classes)
    missing = 0.0
    for i in range(rows.size):
        v = X[rows[i], f]
        if np.isnan(v):
            missing += w[i]
        else:
            b = int(v)
            c = y[rows[i]]
            counts[b, c] += w[i]
            branch[b] += w[i]
            class_known[c] += w[i]
    known = 0.0
    n_big = 0
    for b in range(n_vals):
        known += branch[b]
        if branch[b] >= min_leaf:
            n_big += 1
    if known <= 0.0 or n_big < 2:
        return -1.0
    total = known + missing
    h_split = 0.0
    split_info = 0.0
    for b in range(n_vals):
        if branch[b] > 0.0:
            h_split += branch[b] / known * _entropy(counts[b], branch[b])
            p = branch[b] / total
            split_info -= p * math.log2(p)
    gain = known / total * (_entropy(class_known, known) - h_split)
    if gain <= MIN_GAIN:
        return -1.0
    if missing > 0.0:
        p = missing / total
        split_info -= p * math.log2(p)
    if split_info <= 0.0:
        return -1.0
    return gain / split_info


@numba.njit(cache=True)
def _numeric_gain_ratio(X, y, rows, w, f, n_classes, min_leaf):
    m = 0
    missing = 0.0
    for i in range(rows.size):
        if np.isnan(X[rows[i], f]):
            missing += w[i]
        else:
            m += 1
    if m < 2:
        return -1.0, np.nan
    vals = np.empty(m)
    cls = np.empty(m, dtype=np.int64)
    ws = np.empty(m)
    j = 0
    for i in range(rows.size):
        v = X[rows[i], f]
        if not np.isnan(v):
            vals[j] = v
            cls[j] = y[rows[i]]
            ws[j] = w[i]
            j += 1
    order = np.argsort(vals, kind="mergesort")
    known_counts = np.zeros(n_classes)
    for i in range(m):
        known_counts[cls[i]] += ws[i]
    known = known_counts.sum()
    total = known + missing
    h_known = _entropy(known_counts, known)
    left = np.zeros(n_classes)
    right = np.empty(n_classes)
    w_left = 0.0
    best_gain = MIN_GAIN
    best_gr = -1.0
    best_t = np.nan
    for i in range(m - 1):
        o = order[i]
        left[cls[o]] += ws[o]
        w_left += ws[o]
        a = vals[o]
        b = vals[order[i + 1]]
        if a == b:
            continue
        w_right = known - w_left
        if w_left < min_leaf or w_right < min_leaf:
            continue
        for c in range(n_classes):
            right[c] = known_counts[c] - left[c]
        h_split = w_left / known * _entropy(left, w_left) + w_right / known * _entropy(right, w_right)
        gain = known / total * (h_known - h_split)
        if gain <= best_gain:
            continue
        pl = w_left / total
        pr = w_right / total
        split_info = -pl * math.log2(pl) - pr * math.log2(pr)
        if missing > 0.0:
            pm = missing / total
            split_info -= pm * math.log2(pm)
        best_gain = gain
        best_gr = gain / split_info
        t = (a + b) / 2.0
        best_t = a if t >= b else t
    return best_gr, best_t


@numba.njit(cache=True)
def _grow(X, y, n_classes, n_values, feature_ids, rows0, w0, min_leaf, k_features, state, keep):
    feature = [-1]
    threshold = [np.nan]
    child_start = [-1]
    n_child = [0]
    zero = np.zeros(n_classes)
    counts = [zero]
    node_rows = [rows0]
    node_w = [w0]
    stack = [0]
    n_feat = feature_ids.size
    while len(stack) > 0:
        nid = stack.pop()
        r = node_rows[nid]
        w = node_w[nid]
        if r.size == 0:
            continue
        cnt = np.zeros(n_classes)
        for i in range(r.size):
            cnt[y[r[i]]] += w[i]
        counts[nid] = cnt
        if not keep:
            node_rows[nid] = r[:0]
            node_w[nid] = w[:0]
        total = cnt.sum()
        n_present = 0
        for c in range(n_classes):
            if cnt[c] > 0.0:
                n_present += 1
        if n_present <= 1 or total < 2.0 * min_leaf:
            continue
        if k_features < n_feat:
            candidates = feature_ids[sample_without_replacement(state, n_feat, k_features)]
        else:
            candidates = feature_ids
        best_gr = -1.0
        best_f = -1
        best_t = np.nan
        for f in candidates:
            if n_values[f] > 0:
                gr = _nominal_gain_ratio(X, y, r, w, f, n_values[f], n_classes, min_leaf)
                t = np.nan
            else:
                gr, t = _numeric_gain_ratio(X, y, r, w, f, n_classes, min_leaf)
            if gr > best_gr:
                best_gr = gr
                best_f = f
                best_t = t
        if best_f < 0:
            continue
        nominal = n_values[best_f] > 0
        nb = n_values[best_f] if nominal else 2
        branch_w = np.zeros(nb)
        sizes = np.zeros(nb, dtype=np.int64)
        branch_of = np.empty(r.size, dtype=np.int64)
        n_missing = 0
        for i in range(r.size):
            v = X[r[i], best_f]
            if np.isnan(v):
                branch_of[i] = -1
                n_missing += 1
            else:
                b = int(v) if nominal else (0 if v <= best_t else 1)
                branch_of[i] = b
                branch_w[b] += w[i]
                sizes[b] += 1
        known = branch_w.sum()
        if n_missing > 0:
            for b in range(nb):
                if branch_w[b] > 0.0:
                    sizes[b] += n_missing
        # One buffer for all children; each child's entries are a slice of it.
        offsets = np.zeros(nb + 1, dtype=np.int64)
        for b in range(nb):
            offsets[b + 1] = offsets[b] + sizes[b]
        buf_r = np.empty(offsets[nb], dtype=np.int64)
        buf_w = np.empty(offsets[nb])
        pos = offsets[:nb].copy()
        for i in range(r.size):
            b = branch_of[i]
            if b >= 0:
                buf_r[pos[b]] = r[i]
                buf_w[pos[b]] = w[i]
                pos[b] += 1
            else:
                for b2 in range(nb):
                    if branch_w[b2] > 0.0:
                        buf_r[pos[b2]] = r[i]
                        buf_w[pos[b2]] = w[i] * branch_w[b2] / known
                        pos[b2] += 1
        start = len(feature)
        feature[nid] = best_f
        threshold[nid] = best_t
        child_start[nid] = start
        n_child[nid] = nb
        for b in range(nb):
            feature.append(-1)
            threshold.append(np.nan)
            child_start.append(-1)
            n_child.append(0)
            counts.append(zero)
            node_rows.append(buf_r[offsets[b] : offsets[b + 1]])
            node_w.append(buf_w[offsets[b] : offsets[b + 1]])
        for b in range(nb - 1, -1, -1):
            stack.append(start + b)
    # Pack into flat arrays: boxing one small array per node is slow.
    n_nodes = len(feature)
    out_feature = np.empty(n_nodes, dtype=np.int64)
    out_threshold = np.empty(n_nodes)
    out_start = np.empty(n_nodes, dtype=np.int64)
    out_nchild = np.empty(n_nodes, dtype=np.int64)
    out_counts = np.empty((n_nodes, n_classes))
    ent_offset = np.zeros(n_nodes + 1, dtype=np.int64)
    for n in range(n_nodes):
        out_feature[n] = feature[n]
        out_threshold[n] = threshold[n]
        out_start[n] = child_start[n]
        out_nchild[n] = n_child[n]
        out_counts[n] = counts[n]
        ent_offset[n + 1] = ent_offset[n] + (node_rows[n].size if keep else 0)
    ent_rows = np.empty(ent_offset[n_nodes], dtype=np.int64)
    ent_w = np.empty(ent_offset[n_nodes])
    if keep:
        for n in range(n_nodes):
            ent_rows[ent_offset[n] : ent_offset[n + 1]] = node_rows[n]
            ent_w[ent_offset[n] : ent_offset[n + 1]] = node_w[n]
    return out_feature, out_threshold, out_start, out_nchild, out_counts, ent_offset, ent_rows, ent_w


@numba.njit(cache=True)
def _tree_proba(feature, threshold, child_start, n_child, weight, dist, X):
    m = X.shape[0]
    out = np.zeros((m, dist.shape[1]))
    for i in range(m):
        nodes = [0]
        ws = [1.0]
        while len(nodes) > 0:
            n = nodes.pop()
            wt = ws.pop()
            f = feature[n]
            if f < 0:
                out[i] += wt * dist[n]
                continue
            v = X[i, f]
            s = child_start[n]
            if np.isnan(v):
                tot = 0.0
                for b in range(n_child[n]):
                    tot += weight[s + b]
                if tot <= 0.0:
                    out[i] += wt * dist[n]
                    continue
                for b in range(n_child[n]):
                    if weight[s + b] > 0.0:
                        nodes.append(s + b)
                        ws.append(wt * weight[s + b] / tot)
            elif np.isnan(threshold[n]):
                nodes.append(s + int(v))
                ws.append(wt)
            else:
                nodes.append(s if v <= threshold[n] else s + 1)
                ws.append(wt)
    return out


# --------------------------------------------------------------------------
# Flat tree


def _child_indices(child_start: np.ndarray, n_children: np.ndarray) -> np.ndarray:
    """Node indices of every child, grouped by parent in node order."""
    offsets = np.repeat(child_start - np.cumsum(n_children) + n_children, n_children)
    return offsets + np.arange(int(n_children.sum()))


def _argmax(counts: np.ndarray) -> int:
    # np.argmax returns the first maximum, i.e. the lowest label index.
    return int(np.argmax(counts))


@dataclass
class Tree:
    """A flat decision tree.

    ``feature[n]`` is -1 for leaves. A nominal split (``threshold`` NaN) has
    one child per label at ``child_start + label``; a numeric split sends
    ``value <= threshold`` to ``child_start`` and the rest to
    ``child_start + 1``. ``counts`` holds the (possibly fractional) training
    class weights that reached each node.
    """

    feature: np.ndarray
    threshold: np.ndarray
    child_start: np.ndarray
    n_children: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        self.feature = np.asarray(self.feature, dtype=np.int64)
        self.threshold = np.asarray(self.threshold, dtype=float)
        self.child_start = np.asarray(self.child_start, dtype=np.int64)
        self.n_children = np.asarray(self.n_children, dtype=np.int64)
        self.counts = np.asarray(self.counts, dtype=float).reshape(self.feature.size, -1)
        totals = self.counts.sum(axis=1)
        # Empty nodes predict with their parent's distribution. Splits only
        # happen at nodes with positive weight, so one level of lookup suffices.
        with np.errstate(invalid="ignore", divide="ignore"):
            dist = np.where(totals[:, None] > 0, self.counts / totals[:, None], 0.0)
        parent = np.full(self.n_nodes, -1)
        owner = np.repeat(np.arange(self.n_nodes), self.n_children)
        parent[_child_indices(self.child_start, self.n_children)] = owner
        empty = np.flatnonzero((totals <= 0) & (parent >= 0))
        dist[empty] = dist[parent[empty]]
        self._weight = totals
        self._dist = dist

    @property
    def n_nodes(self) -> int:
        return int(self.feature.size)

    @property
    def n_leaves(self) -> int:
        return int(np.count_nonzero(self.feature < 0))

    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=int)
        for n in range(self.n_nodes):
            s = self.child_start[n]
            depth[s : s + self.n_children[n]] = depth[n] + 1
        return int(depth.max())

    def labels(self) -> np.ndarray:
        """Predicted label per node (argmax of the node's distribution)."""
        return np.argmax(self._dist, axis=1)

    def leaves(self) -> np.ndarray:
        return np.flatnonzero(self.feature < 0)

    def proba(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=float)
        return _tree_proba(
            self.feature, self.threshold, self.child_start, self.n_children,
            self._weight, self._dist, X,
        )

    def to_json(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": [None if math.isnan(t) else t for t in self.threshold.tolist()],
            "child_start": self.child_start.tolist(),
            "n_children": self.n_children.tolist(),
            "counts": self.counts.tolist(),
        }

    @classmethod
    def from_json(cls, obj) -> Tree:
        return cls(
            obj["feature"],
            [math.nan if t is None else t for t in obj["threshold"]],
            obj["child_start"],
            obj["n_children"],
            obj["counts"],
        )


# --------------------------------------------------------------------------
# Growth front end


@dataclass
class _Node:
    counts: np.ndarray
    rows: np.ndarray
    weights: np.ndarray
    attr: int = -1
    threshold: float = math.nan
    children: list | None = None

    @property
    def is_leaf(self) -> bool:
        return not self.children


def _grow_raw(X, y, n_classes, n_values, feature_ids, rows, weights, min_leaf, k_features, seed, keep):
    if k_features is None or k_features >= len(feature_ids):
        k_features = len(feature_ids)
    state = np.array([seed & ((1 << 64) - 1)], dtype=np.uint64)
    return _grow(
        np.ascontiguousarray(X, dtype=float),
        np.asarray(y, dtype=np.int64),
        int(n_classes),
        np.asarray(n_values, dtype=np.int64),
        np.asarray(feature_ids, dtype=np.int64),
        np.asarray(rows, dtype=np.int64),
        np.asarray(weights, dtype=float),
        float(min_leaf),
        int(k_features),
        state,
        keep,
    )


def grow_tree(
    X, y, n_classes, n_values, feature_ids, rows, weights,
    min_leaf=2.0, k_features=None, seed=0,
) -> Tree:
    """Grow an unpruned tree on the given (row, weight) entries.

    ``n_values[j]`` is the label count of nominal column ``j`` and 0 for
    numeric columns. ``y`` holds class indices for every row of ``X``; only
    rows listed in ``rows`` are used. With ``k_features`` smaller than the
    number of candidate features each node considers a random subset of
    that size drawn from a SplitMix64 stream seeded by ``seed``.
    """
    feat, thr, start, nch, counts, _, _, _ = _grow_raw(
        X, y, n_classes, n_values, feature_ids, rows, weights, min_leaf, k_features, seed, False
    )
    return Tree(feat, thr, start, nch, counts)


def _grow_linked(X, y, n_classes, n_values, feature_ids, rows, weights, min_leaf) -> _Node:
    feat, thr, start, nch, counts, offset, ent_rows, ent_w = _grow_raw(
        X, y, n_classes, n_values, feature_ids, rows, weights, min_leaf, None, 0, True
    )
    nodes = [
        _Node(
            counts[n],
            ent_rows[offset[n] : offset[n + 1]],
            ent_w[offset[n] : offset[n + 1]],
            int(feat[n]),
            float(thr[n]),
        )
        for n in range(len(feat))
    ]
    for n, node in enumerate(nodes):
        if feat[n] >= 0:
            node.children = nodes[start[n] : start[n] + nch[n]]
    return nodes[0]


def _flatten(root: _Node) -> Tree:
    order = [root]
    feature, threshold, child_start, n_children = [], [], [], []
    i = 0
    while i < len(order):
        node = order[i]
        if node.is_leaf:
            feature.append(-1)
            threshold.append(math.nan)
            child_start.append(-1)
            n_children.append(0)
        else:
            feature.append(node.attr)
            threshold.append(node.threshold)
            child_start.append(len(order))
            n_children.append(len(node.children))
            order.extend(node.children)
        i += 1
    counts = np.array([node.counts for node in order])
    return Tree(feature, threshold, child_start, n_children, counts)


# --------------------------------------------------------------------------
# Pruning


def add_errors(n: float, e: float, confidence: float) -> float:
    """Extra errors to add to ``e`` observed errors out of ``n`` (C4.5's upper bound)."""
    if n <= 0 or confidence >= 1:
        return 0.0
    if e < 1:
        base = n * (1 - confidence ** (1 / n))
        if e == 0:
            return base
        return base + e * (add_errors(n, 1, confidence) - base)
    if e + 0.5 >= n:
        return max(n - e, 0.0)
    z = NormalDist().inv_cdf(1 - confidence)
    f = (e + 0.5) / n
    r = (f + z * z / (2 * n) + z * math.sqrt(f / n - f * f / n + z * z / (4 * n * n))) / (
        1 + z * z / n
    )
    return r * n - e


def _leaf_estimate(counts: np.ndarray, confidence: float) -> float:
    total = float(counts.sum())
    errors = total - float(counts.max()) if total > 0 else 0.0
    return errors + add_errors(total, errors, confidence)


class _Pruner:
    def __init__(self, X, y, n_classes, confidence, raising):
        self.X, self.y, self.n_classes = X, y, n_classes
        self.confidence = confidence
        self.raising = raising

    def class_counts(self, rows, weights):
        return np.bincount(self.y[rows], weights=weights, minlength=self.n_classes).astype(float)

    def split(self, node: _Node, rows, weights):
        """Distribute entries among ``node``'s children, C4.5 style."""
        v = self.X[rows, node.attr]
        missing = np.isnan(v)
        nb = len(node.children)
        if math.isnan(node.threshold):
            branch = np.where(missing, -1, np.nan_to_num(v, nan=-1)).astype(int)
        else:
            branch = np.where(missing, -1, (v > node.threshold).astype(int))
        known_w = np.bincount(branch[~missing], weights=weights[~missing], minlength=nb)
        known = known_w.sum()
        if known <= 0:
            known_w = np.array([c.counts.sum() for c in node.children])
            known = known_w.sum()
            if known <= 0:
                known_w, known = np.ones(nb), float(nb)
        out = []
        for b in range(nb):
            here = branch == b
            if known_w[b] > 0 and missing.any():
                take = here | missing
                w = np.where(missing, weights * known_w[b] / known, weights)[take]
            else:
                take = here
                w = weights[take]
            out.append((rows[take], w))
        return out

    def branch_estimate(self, node: _Node, rows, weights) -> float:
        """Estimated errors if ``node``'s subtree were re-fitted to these entries."""
        if node.is_leaf:
            return _leaf_estimate(self.class_counts(rows, weights), self.confidence)
        return sum(
            self.branch_estimate(child, r, w)
            for child, (r, w) in zip(node.children, self.split(node, rows, weights))
        )

    def refit(self, node: _Node, rows, weights) -> None:
        node.rows, node.weights = rows, weights
        node.counts = self.class_counts(rows, weights)
        if not node.is_leaf:
            for child, (r, w) in zip(node.children, self.split(node, rows, weights)):
                self.refit(child, r, w)

    def prune(self, node: _Node) -> float:
        """Prune bottom-up; returns the estimated errors of the pruned subtree."""
        if node.is_leaf:
            return _leaf_estimate(node.counts, self.confidence)
        err_tree = sum(self.prune(child) for child in node.children)
        largest = _argmax(np.array([c.counts.sum() for c in node.children]))
        if self.raising:
            err_branch = self.branch_estimate(node.children[largest], node.rows, node.weights)
        else:
            err_branch = math.inf
        err_leaf = _leaf_estimate(node.counts, self.confidence)
        if err_leaf <= err_tree and err_leaf <= err_branch:
            node.children = None
            node.attr, node.threshold = -1, math.nan
            return err_leaf
        if err_branch <= err_tree:
            raised = node.children[largest]
            node.attr, node.threshold, node.children = raised.attr, raised.threshold, raised.children
            self.refit(node, node.rows, node.weights)
            return self.prune(node)
        return err_tree


def grow_and_prune(
    X, y, n_classes, n_values, feature_ids, rows, weights,
    confidence=0.25, min_leaf=2.0, subtree_raising=True, prune=True,
) -> Tree:
    """Grow a tree on all candidate features and optionally prune it."""
    root = _grow_linked(X, y, n_classes, n_values, feature_ids, rows, weights, min_leaf)
    if prune:
        pruner = _Pruner(
            np.asarray(X, dtype=float), np.asarray(y, dtype=np.int64), n_classes,
            confidence, subtree_raising,
        )
        # Pruning recurses once per level (a few frames each); noise can grow deep trees.
        limit = sys.getrecursionlimit()
        sys.setrecursionlimit(max(limit, 4 * _depth(root) + 1000))
        try:
            pruner.prune(root)
        finally:
            sys.setrecursionlimit(limit)
    return _flatten(root)


def _depth(root: _Node) -> int:
    deepest, stack = 0, [(root, 0)]
    while stack:
        node, d = stack.pop()
        deepest = max(deepest, d)
        if not node.is_leaf:
            stack.extend((c, d + 1) for c in node.children)
    return deepest
