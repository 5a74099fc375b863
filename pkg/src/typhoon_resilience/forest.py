"""Random forest of binary CART trees with Gini and OOB-permutation importance.

Trees are grown on bootstrap samples, considering ``m_try`` randomly chosen
features at each split and picking the threshold that minimizes the weighted
Gini impurity of the children.  Every tree gets its own random stream spawned
from the forest seed, so results do not depend on how trees are scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DegenerateDataError, DomainError, ValidationError


def gini_impurity(class_counts) -> float:
    counts = np.asarray(class_counts, dtype=float)
    if np.any(counts < 0):
        raise DomainError("class counts must be nonnegative")
    total = counts.sum()
    if total <= 0:
        raise DomainError("Gini impurity of an empty node is undefined")
    p = counts / total
    return float(1.0 - np.sum(p * p))


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 200
    max_depth: int = 8
    m_try: int = 3
    min_leaf: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1 or self.max_depth < 1 or self.m_try < 1 or self.min_leaf < 1:
            raise ValidationError("forest hyperparameters must be positive")


@dataclass
class Tree:
    """Array-encoded binary tree; leaves have ``feature == -1``.

    ``decrease`` holds each internal node's impurity decrease weighted by the
    fraction of the tree's bootstrap sample that reaches it.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    prediction: np.ndarray
    n_samples: np.ndarray
    impurity: np.ndarray
    decrease: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def apply(self, x: np.ndarray) -> np.ndarray:
        node = np.zeros(x.shape[0], dtype=np.int64)
        rows = np.arange(x.shape[0])
        while True:
            f = self.feature[node]
            inner = f >= 0
            if not inner.any():
                return node
            go_left = x[rows[inner], f[inner]] <= self.threshold[node[inner]]
            node[inner] = np.where(go_left, self.left[node[inner]], self.right[node[inner]])

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.prediction[self.apply(x)]


@dataclass
class ForestModel:
    config: ForestConfig
    n_features: int
    trees: list[Tree]
    bootstrap: list[np.ndarray] = field(repr=False)
    oob: list[np.ndarray] = field(repr=False)

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def predict(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        votes = np.mean([t.predict(x) for t in self.trees], axis=0)
        return (votes >= 0.5).astype(np.int64)

    def oob_accuracy(self, x, y) -> float:
        """Accuracy of the out-of-bag majority vote over samples that are OOB somewhere."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y)
        votes = np.zeros(len(y))
        counts = np.zeros(len(y))
        for tree, idx in zip(self.trees, self.oob):
            if len(idx):
                votes[idx] += tree.predict(x[idx])
                counts[idx] += 1
        seen = counts > 0
        pred = (votes[seen] / counts[seen] >= 0.5).astype(np.int64)
        return float(np.mean(pred == y[seen]))


def _grow_tree(x, y, idx, config: ForestConfig, rng: np.random.Generator) -> Tree:
    n_root = len(idx)
    n_features = x.shape[1]
    m_try = min(config.m_try, n_features)
    feature, threshold, left, right = [], [], [], []
    prediction, n_samples, impurity, decrease = [], [], [], []

    def new_node(sub):
        ones = int(y[sub].sum())
        n = len(sub)
        feature.append(-1)
        threshold.append(np.nan)
        left.append(-1)
        right.append(-1)
        prediction.append(1 if 2 * ones >= n else 0)
        n_samples.append(n)
        impurity.append(gini_impurity((n - ones, ones)))
        decrease.append(0.0)
        return len(feature) - 1

    stack = [(new_node(idx), idx, 0)]
    while stack:
        node, sub, depth = stack.pop()
        n = len(sub)
        if depth >= config.max_depth or n < 2 * config.min_leaf or impurity[node] == 0.0:
            continue
        candidates = rng.choice(n_features, size=m_try, replace=False)
        ys = np.ascontiguousarray(y[sub], dtype=np.int64)
        best = (math.inf, -1, math.nan)
        for f in candidates:
            thr, cost = kernels.best_split(np.ascontiguousarray(x[sub, f]), ys, config.min_leaf)
            if cost < best[0]:
                best = (cost, int(f), thr)
        cost, f, thr = best
        if f < 0:
            continue
        go_left = x[sub, f] <= thr
        feature[node] = f
        threshold[node] = thr
        decrease[node] = n / n_root * (impurity[node] - cost)
        lnode = new_node(sub[go_left])
        rnode = new_node(sub[~go_left])
        left[node], right[node] = lnode, rnode
        stack.append((rnode, sub[~go_left], depth + 1))
        stack.append((lnode, sub[go_left], depth + 1))
    return Tree(np.array(feature, dtype=np.int64), np.array(threshold), np.array(left, dtype=np.int64),
                np.array(right, dtype=np.int64), np.array(prediction, dtype=np.int64),
                np.array(n_samples, dtype=np.int64), np.array(impurity), np.array(decrease))


def _check_training_data(x, y):
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ValidationError("feature matrix and labels disagree in shape")
    if not np.all(np.isfinite(x)):
        raise ValidationError("feature values must be finite")
    if not np.all((y == 0) | (y == 1)):
        raise ValidationError("labels must be 0 or 1")
    ones = int(y.sum())
    if ones == 0 or ones == len(y):
        raise DegenerateDataError("all labels are equal; nothing to learn")
    if min(ones, len(y) - ones) < 2:
        raise DegenerateDataError("need at least two samples of each class")


def train_forest(x, y, config: ForestConfig | None = None, threads: int = 1) -> ForestModel:
    config = config or ForestConfig()
    x = np.ascontiguousarray(x, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    _check_training_data(x, y)
    n = len(y)
    streams = np.random.SeedSequence(config.seed).spawn(config.n_trees)

    def one(seq):
        rng = np.random.default_rng(seq)
        boot = rng.integers(0, n, size=n)
        mask = np.ones(n, dtype=bool)
        mask[boot] = False
        return _grow_tree(x, y, boot, config, rng), boot, np.flatnonzero(mask)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            grown = list(pool.map(one, streams))
    else:
        grown = [one(s) for s in streams]
    return ForestModel(config, x.shape[1], [g[0] for g in grown], [g[1] for g in grown],
                       [g[2] for g in grown])


def _normalize(raw: np.ndarray) -> np.ndarray:
    total = raw.sum()
    if total <= 0:
        return np.full_like(raw, 1.0 / len(raw))
    return raw / total


def gini_importance_raw(model: ForestModel) -> np.ndarray:
    """Mean over trees of the summed weighted impurity decrease per feature."""
    raw = np.zeros(model.n_features)
    for tree in model.trees:
        inner = tree.feature >= 0
        raw += np.bincount(tree.feature[inner], weights=tree.decrease[inner], minlength=model.n_features)
    return raw / model.n_trees


def gini_importance(model: ForestModel) -> np.ndarray:
    return _normalize(gini_importance_raw(model))


def oob_importance_raw(model: ForestModel, x, y, seed: int = 0) -> np.ndarray:
    """Mean over trees of the rise in OOB error after permuting each feature.

    Trees with an empty OOB set are skipped.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y)
    streams = np.random.SeedSequence(seed).spawn(model.n_trees)
    total = np.zeros(model.n_features)
    used = 0
    for tree, idx, seq in zip(model.trees, model.oob, streams):
        if len(idx) == 0:
            continue
        rng = np.random.default_rng(seq)
        xo, yo = x[idx], y[idx]
        base = np.mean(tree.predict(xo) != yo)
        for j in range(model.n_features):
            shuffled = xo.copy()
            shuffled[:, j] = xo[rng.permutation(len(idx)), j]
            total[j] += np.mean(tree.predict(shuffled) != yo) - base
        used += 1
    if used == 0:
        raise DegenerateDataError("no tree has out-of-bag samples")
    return total / used


def oob_importance(model: ForestModel, x, y, seed: int = 0) -> np.ndarray:
    return _normalize(np.maximum(oob_importance_raw(model, x, y, seed), 0.0))
