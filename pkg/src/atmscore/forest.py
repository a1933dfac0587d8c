"""CART classification trees and a random forest with impurity-decrease importances.

Split quality is compared exactly: for a candidate split the weighted child
impurity is ``1 - (sL/nL + sR/nR)/n`` where ``sL``/``sR`` are sums of squared
class counts, so maximizing the integer fraction ``(sL*nR + sR*nL)/(nL*nR)``
picks the best split without floating-point tie ambiguity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

import numpy as np

from atmscore.errors import DomainError
from atmscore.rng import stream

DEFAULT_TREES = 100


def gini(class_counts: Sequence[int]) -> float:
    counts = np.asarray(class_counts, dtype=float)
    if counts.ndim != 1 or np.any(counts < 0):
        raise DomainError("class counts must be a nonnegative vector")
    total = counts.sum()
    if total <= 0:
        raise DomainError("gini undefined for an empty node")
    p = counts / total
    return float(1.0 - p @ p)


class Split(NamedTuple):
    feature: int
    threshold: float
    impurity_decrease: float


def best_split(samples, labels, candidate_features: Sequence[int] | None = None) -> Optional[Split]:
    """Best Gini split over ``candidate_features`` and midpoint thresholds.

    Thresholds are midpoints between consecutive distinct sorted values and
    samples with ``x <= threshold`` go left. Ties go to the lower feature
    index, then the lower threshold. Returns None when no split strictly
    decreases impurity.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(labels)
    n = len(y)
    if n < 2:
        return None
    if candidate_features is None:
        feats = np.arange(x.shape[1])
    else:
        feats = np.unique(np.asarray(candidate_features, dtype=int))
    if feats.size == 0:
        return None
    return _best_split(x, y, feats, int(y.max()) + 1)


def _best_split(x: np.ndarray, y: np.ndarray, feats: np.ndarray, n_classes: int) -> Optional[Split]:
    n = len(y)
    cols = x[:, feats]
    order = np.argsort(cols, axis=0, kind="stable")
    xs = np.take_along_axis(cols, order, axis=0)
    ys = y[order]
    onehot = (ys[:, :, None] == np.arange(n_classes)).astype(np.int64)
    cum = np.cumsum(onehot, axis=0)
    total = cum[-1, 0]
    left = cum[:-1]
    right = total[None, None, :] - left
    s_left = (left * left).sum(axis=2)
    s_right = (right * right).sum(axis=2)
    n_left = np.arange(1, n, dtype=np.int64)[:, None]
    n_right = n - n_left

    valid = xs[:-1] < xs[1:]
    score = np.where(valid, s_left / n_left + s_right / n_right, -np.inf)
    top = score.max()
    s_total = int((total * total).sum())
    if not np.isfinite(top) or top <= s_total / n * (1 - 1e-12):
        return None

    rows, cols_idx = np.nonzero(score >= top - 1e-9 * abs(top))
    best = None
    best_key = None
    # column-major visiting gives (lower feature, lower threshold) priority
    for c, i in sorted(zip(cols_idx.tolist(), rows.tolist())):
        nl = i + 1
        nr = n - nl
        key = Fraction(int(s_left[i, c]) * nr + int(s_right[i, c]) * nl, nl * nr)
        if best_key is None or key > best_key:
            best_key, best = key, (c, i)
    if best_key <= Fraction(s_total, n):
        return None
    c, i = best
    lo, hi = xs[i, c], xs[i + 1, c]
    threshold = lo + (hi - lo) / 2.0
    if not lo <= threshold < hi:
        threshold = lo
    decrease = float((best_key - Fraction(s_total, n)) / n)
    return Split(int(feats[c]), float(threshold), decrease)


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = DEFAULT_TREES
    max_depth: Optional[int] = None
    min_samples_split: int = 2
    features_per_split: Optional[int] = None
    bootstrap: bool = True

    def resolve_features(self, d: int) -> int:
        m = self.features_per_split or math.ceil(math.sqrt(d))
        return max(1, min(d, m))


@dataclass
class Tree:
    """Array-backed binary tree. ``feature[i] == -1`` marks a leaf."""

    n_features: int
    n_classes: int
    feature: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    n_samples: list[int] = field(default_factory=list)
    impurity_decrease: list[float] = field(default_factory=list)
    counts: list[np.ndarray] = field(default_factory=list)

    def _add(self, n_samples: int, counts: np.ndarray) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.n_samples.append(n_samples)
        self.impurity_decrease.append(0.0)
        self.counts.append(counts)
        return len(self.feature) - 1

    @property
    def node_count(self) -> int:
        return len(self.feature)

    @property
    def split_count(self) -> int:
        return sum(1 for f in self.feature if f >= 0)

    def leaf(self, x: np.ndarray) -> int:
        node = 0
        while self.feature[node] >= 0:
            node = self.left[node] if x[self.feature[node]] <= self.threshold[node] else self.right[node]
        return node

    def predict(self, x) -> int:
        # plurality; np.argmax takes the lowest class on ties
        return int(np.argmax(self.counts[self.leaf(np.asarray(x, dtype=float))]))

    def importances(self) -> np.ndarray:
        """Per-feature weighted impurity decrease, normalized to sum 1 (or all 0)."""
        imp = np.zeros(self.n_features)
        if not self.feature:
            return imp
        root = self.n_samples[0]
        for f, n, dec in zip(self.feature, self.n_samples, self.impurity_decrease):
            if f >= 0:
                imp[f] += n / root * dec
        s = imp.sum()
        return imp / s if s > 0 else imp


def fit_tree(
    x: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    params: ForestParams,
    rng: np.random.Generator,
    sample_idx: np.ndarray | None = None,
) -> Tree:
    """Grow one CART tree on rows ``sample_idx`` (duplicates allowed)."""
    n, d = x.shape
    idx = np.arange(n) if sample_idx is None else np.asarray(sample_idx)
    m = params.resolve_features(d)
    tree = Tree(d, n_classes)
    root = tree._add(len(idx), np.bincount(y[idx], minlength=n_classes))
    stack = [(root, idx, 0)]
    while stack:
        node, rows, depth = stack.pop()
        counts = tree.counts[node]
        if (
            len(rows) < params.min_samples_split
            or np.count_nonzero(counts) <= 1
            or (params.max_depth is not None and depth >= params.max_depth)
        ):
            continue
        xs = x[rows]
        ys = y[rows]
        perm = rng.permutation(d)
        split = _best_split(xs, ys, np.sort(perm[:m]), n_classes)
        if split is None and m < d:
            # none of the drawn features helps; widen to the rest
            split = _best_split(xs, ys, np.sort(perm[m:]), n_classes)
        if split is None:
            continue
        go_left = xs[:, split.feature] <= split.threshold
        left_rows, right_rows = rows[go_left], rows[~go_left]
        tree.feature[node] = split.feature
        tree.threshold[node] = split.threshold
        tree.impurity_decrease[node] = split.impurity_decrease
        tree.left[node] = tree._add(len(left_rows), np.bincount(y[left_rows], minlength=n_classes))
        tree.right[node] = tree._add(len(right_rows), np.bincount(y[right_rows], minlength=n_classes))
        stack.append((tree.right[node], right_rows, depth + 1))
        stack.append((tree.left[node], left_rows, depth + 1))
    return tree


@dataclass(frozen=True)
class Forest:
    trees: tuple[Tree, ...]
    n_features: int
    n_classes: int
    importances: np.ndarray
    params: ForestParams
    seed: int


def _check_xy(samples, labels) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(labels)
    if x.ndim != 2 or len(y) != len(x):
        raise DomainError("samples must be n x d with one label per row")
    if len(y) < 2:
        raise DomainError("a forest needs at least 2 samples")
    if not np.issubdtype(y.dtype, np.integer) or y.min() < 0:
        raise DomainError("labels must be nonnegative integers")
    if not np.all(np.isfinite(x)):
        raise DomainError("samples contain non-finite values")
    return x, y.astype(np.int64)


def forest_fit(samples, labels, params: ForestParams | None = None, seed: int = 0) -> Forest:
    """Fit ``params.n_trees`` trees, each from its own ``(seed, tree)`` stream."""
    params = params or ForestParams()
    if params.n_trees < 1:
        raise DomainError("n_trees must be >= 1")
    if params.min_samples_split < 2:
        raise DomainError("min_samples_split must be >= 2")
    x, y = _check_xy(samples, labels)
    n, d = x.shape
    n_classes = int(y.max()) + 1
    trees = []
    for t in range(params.n_trees):
        rng = stream(seed, "tree", t)
        rows = rng.integers(0, n, n) if params.bootstrap else None
        trees.append(fit_tree(x, y, n_classes, params, rng, rows))
    return Forest(tuple(trees), d, n_classes, _mean_importance(trees, d), params, seed)


def _mean_importance(trees: Sequence[Tree], d: int) -> np.ndarray:
    imp = np.mean([t.importances() for t in trees], axis=0) if trees else np.zeros(d)
    s = imp.sum()
    return imp / s if s > 0 else np.zeros(d)


def feature_importance(forest: Forest) -> np.ndarray:
    """Mean decrease in impurity per feature, summing to 1 (all 0 if no tree split)."""
    return forest.importances.copy()


def predict(forest: Forest, x) -> int:
    """Majority vote of the trees; ties go to the lowest class."""
    x = np.asarray(x, dtype=float)
    if x.shape != (forest.n_features,):
        raise DomainError(f"expected {forest.n_features} features, got shape {x.shape}")
    votes = np.zeros(forest.n_classes, dtype=int)
    for tree in forest.trees:
        votes[tree.predict(x)] += 1
    return int(np.argmax(votes))


def forest_from_trees(trees: Sequence[Tree], params: ForestParams | None = None, seed: int = 0) -> Forest:
    """Assemble a forest from already-built trees (used to hand-build fixtures)."""
    if not trees:
        raise DomainError("need at least one tree")
    d = trees[0].n_features
    c = max(t.n_classes for t in trees)
    return Forest(tuple(trees), d, c, _mean_importance(trees, d), params or ForestParams(len(trees)), seed)
