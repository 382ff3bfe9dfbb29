"""From-scratch classifiers over the feature table.

The primary model is binary logistic gradient boosting: each round fits a
regression tree to the residuals y - sigmoid(F) with exact greedy
variance-reduction splits, and leaves take a Newton step scaled by the
learning rate.  A bootstrap random forest and a kNN classifier with
Euclidean / cosine / Lorentzian distances serve as baselines.

Everything here is deterministic: split ties break on the lowest feature
index then the lowest threshold, and all randomness flows from one seeded
generator per call.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadKError,
    DimensionMismatchError,
    EmptyTableError,
    SingleClassError,
    ZeroVectorError,
)
from .table import DECREASE, INCREASE, FeatureTable

EUCLIDEAN = "euclidean"
COSINE = "cosine"
LORENTZIAN = "lorentzian"
DISTANCE_KINDS = (EUCLIDEAN, COSINE, LORENTZIAN)

_HESSIAN_EPS = 1e-12  # keeps Newton leaf values finite in pure leaves


@dataclass
class TreeNode:
    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    value: float = 0.0

    def is_leaf(self) -> bool:
        return self.feature is None

    def route(self, x: np.ndarray) -> float:
        node = self
        while not node.is_leaf():
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node.value


@dataclass
class GbdtParams:
    n_estimators: int = 50
    max_depth: int | None = None  # None: growth limited only by min_samples_*
    min_samples_split: int = 2
    min_samples_leaf: int = 2
    learning_rate: float = 0.1
    seed: int = 0  # recorded for provenance; exact greedy training draws nothing

    def validate(self) -> None:
        if self.n_estimators < 1:
            raise ValueError(f"n_estimators must be >= 1, got {self.n_estimators}")
        if self.min_samples_leaf < 1:
            raise ValueError(f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")


@dataclass
class GbdtModel:
    base_score: float
    trees: list[TreeNode]
    params: GbdtParams
    feature_names: list[str]
    feature_gains: np.ndarray
    train_loss_curve: list[float] = field(default_factory=list)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _log_loss(y: np.ndarray, p: np.ndarray) -> float:
    p = np.clip(p, 1e-15, 1.0 - 1e-15)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def _best_sse_split(Xn: np.ndarray, r: np.ndarray, min_leaf: int):
    """Best (gain, column, threshold) by sum-of-squares reduction, or None.

    Xn is the node's (n, d) submatrix and r its target vector.  Candidate
    thresholds are midpoints between sorted distinct values; SSE reduction
    collapses to sum_L^2/n_L + sum_R^2/n_R - sum^2/n because the squared
    term cancels.  All columns are scored in one vectorized pass; ties
    break on the lowest column index, then the lowest threshold (argmax
    returns the first maximum).
    """
    n = Xn.shape[0]
    if n < 2 * min_leaf:
        return None
    order = np.argsort(Xn, axis=0, kind="stable")
    vs = np.take_along_axis(Xn, order, axis=0)
    cum = np.cumsum(r[order], axis=0)
    total = r.sum()
    n_left = np.arange(1, n, dtype=np.float64)[:, None]
    ok = (vs[:-1] < vs[1:]) & (n_left >= min_leaf) & ((n - n_left) >= min_leaf)
    if not ok.any():
        return None
    s_left = cum[:-1]
    s_right = total - s_left
    gains = np.where(
        ok, s_left * s_left / n_left + s_right * s_right / (n - n_left) - total * total / n,
        -np.inf)
    j = int(np.argmax(gains.max(axis=0)))
    i = int(np.argmax(gains[:, j]))
    if not gains[i, j] > 0.0:
        return None
    return float(gains[i, j]), j, float((vs[i, j] + vs[i + 1, j]) / 2.0)


def _grow_gbdt_tree(X, residuals, hessians, params, gains, leaves) -> TreeNode:
    """Grow one regression tree with an explicit stack (depth is unbounded)."""
    root = TreeNode()
    stack = [(root, np.arange(X.shape[0]), 0)]
    while stack:
        node, rows, depth = stack.pop()
        split = None
        if (rows.size >= params.min_samples_split
                and (params.max_depth is None or depth < params.max_depth)):
            split = _best_sse_split(X[rows], residuals[rows], params.min_samples_leaf)
        if split is None:
            node.value = (params.learning_rate * residuals[rows].sum()
                          / (hessians[rows].sum() + _HESSIAN_EPS))
            leaves.append((rows, node.value))
            continue
        gain, feature, threshold = split
        gains[feature] += gain
        node.feature, node.threshold = feature, threshold
        node.left, node.right = TreeNode(), TreeNode()
        mask = X[rows, feature] <= threshold
        stack.append((node.right, rows[~mask], depth + 1))
        stack.append((node.left, rows[mask], depth + 1))
    return root


def train_gbdt(train: FeatureTable, params: GbdtParams | None = None) -> GbdtModel:
    """Binary logistic boosting with the base score at the class-prior log odds."""
    params = GbdtParams() if params is None else params
    params.validate()
    n = len(train)
    if n == 0:
        raise EmptyTableError("cannot train on an empty table")
    y = train.labels.astype(np.float64)
    if y.min() == y.max():
        raise SingleClassError("training data contains a single class")

    prior = y.mean()
    base_score = float(np.log(prior / (1.0 - prior)))
    F = np.full(n, base_score)
    gains = np.zeros(train.n_features)
    trees: list[TreeNode] = []
    loss_curve = [_log_loss(y, _sigmoid(F))]
    for _ in range(params.n_estimators):
        p = _sigmoid(F)
        residuals = y - p
        hessians = p * (1.0 - p)
        leaves: list[tuple[np.ndarray, float]] = []
        trees.append(_grow_gbdt_tree(train.X, residuals, hessians, params, gains, leaves))
        for leaf_rows, value in leaves:
            F[leaf_rows] += value
        loss_curve.append(_log_loss(y, _sigmoid(F)))
    return GbdtModel(base_score, trees, params, list(train.feature_names), gains, loss_curve)


def gbdt_raw_score(model: GbdtModel, row: np.ndarray) -> float:
    if row.shape[-1] != len(model.feature_names):
        raise DimensionMismatchError(
            f"row has {row.shape[-1]} features, model expects {len(model.feature_names)}")
    return model.base_score + sum(tree.route(row) for tree in model.trees)


def gbdt_predict(model: GbdtModel, row: np.ndarray) -> tuple[float, int]:
    """(probability of Increase, label); label is Increase when p >= 0.5."""
    p = float(_sigmoid(np.asarray([gbdt_raw_score(model, np.asarray(row, dtype=np.float64))]))[0])
    return p, (INCREASE if p >= 0.5 else DECREASE)


def gbdt_predict_table(model: GbdtModel, table: FeatureTable) -> tuple[np.ndarray, np.ndarray]:
    raw = np.array([gbdt_raw_score(model, table.X[i]) for i in range(len(table))])
    p = _sigmoid(raw)
    return p, np.where(p >= 0.5, INCREASE, DECREASE)


def feature_importance(model: GbdtModel) -> list[tuple[str, float]]:
    """Per-feature split gain, normalized to sum to one, descending.

    An untrained or split-free model keeps all-zero importances.  Equal
    gains order by name.
    """
    total = model.feature_gains.sum()
    shares = model.feature_gains / total if total > 0 else np.zeros_like(model.feature_gains)
    pairs = list(zip(model.feature_names, (float(s) for s in shares)))
    return sorted(pairs, key=lambda item: (-item[1], item[0]))


# --- random forest -----------------------------------------------------------


@dataclass
class RfModel:
    trees: list[TreeNode]
    feature_names: list[str]
    n_trees: int
    max_depth: int | None
    seed: int


def _best_gini_split(Xn, yn):
    """Best (column, threshold) by weighted-children Gini impurity, or None.

    Same vectorized layout as _best_sse_split; higher score means lower
    impurity, ties break on the lowest column then the lowest threshold.
    """
    n = Xn.shape[0]
    order = np.argsort(Xn, axis=0, kind="stable")
    vs = np.take_along_axis(Xn, order, axis=0)
    pos_left = np.cumsum(yn[order], axis=0)[:-1]
    total_pos = yn.sum()
    ok = vs[:-1] < vs[1:]
    if not ok.any():
        return None
    n_left = np.arange(1, n, dtype=np.float64)[:, None]
    n_right = n - n_left
    pos_right = total_pos - pos_left
    gini_left = 1.0 - (pos_left / n_left) ** 2 - ((n_left - pos_left) / n_left) ** 2
    gini_right = 1.0 - (pos_right / n_right) ** 2 - ((n_right - pos_right) / n_right) ** 2
    score = np.where(ok, -(n_left * gini_left + n_right * gini_right) / n, -np.inf)
    j = int(np.argmax(score.max(axis=0)))
    i = int(np.argmax(score[:, j]))
    if score[i, j] == -np.inf:
        return None
    return j, float((vs[i, j] + vs[i + 1, j]) / 2.0)


def _grow_rf_tree(X, y, bootstrap_rows, max_depth, n_sub, rng) -> TreeNode:
    root = TreeNode()
    stack = [(root, bootstrap_rows, 0)]
    while stack:
        node, rows, depth = stack.pop()
        pos = int(y[rows].sum())
        majority = INCREASE if pos * 2 >= rows.size else DECREASE
        split = None
        if not (pos == 0 or pos == rows.size or rows.size < 2
                or (max_depth is not None and depth >= max_depth)):
            feature_ids = np.sort(rng.choice(X.shape[1], size=n_sub, replace=False))
            split = _best_gini_split(X[rows][:, feature_ids], y[rows].astype(np.float64))
            if split is not None:
                split = (int(feature_ids[split[0]]), split[1])
        if split is None:
            node.value = float(majority)
            continue
        feature, threshold = split
        node.feature, node.threshold = feature, threshold
        node.left, node.right = TreeNode(), TreeNode()
        mask = X[rows, feature] <= threshold
        stack.append((node.right, rows[~mask], depth + 1))
        stack.append((node.left, rows[mask], depth + 1))
    return root


def train_random_forest(train: FeatureTable, n_trees: int = 50,
                        max_depth: int | None = None, seed: int = 0) -> RfModel:
    """Bootstrap-sampled Gini trees over sqrt(d) feature subsets per split."""
    if len(train) == 0:
        raise EmptyTableError("cannot train on an empty table")
    if n_trees < 1:
        raise ValueError(f"n_trees must be >= 1, got {n_trees}")
    y = train.labels
    if y.min() == y.max():
        raise SingleClassError("training data contains a single class")
    rng = np.random.default_rng(seed)
    n, d = train.X.shape
    n_sub = max(1, int(np.sqrt(d)))
    trees = []
    for _ in range(n_trees):
        bootstrap = np.sort(rng.integers(0, n, size=n))
        trees.append(_grow_rf_tree(train.X, y, bootstrap, max_depth, n_sub, rng))
    return RfModel(trees, list(train.feature_names), n_trees, max_depth, seed)


def rf_vote_fraction(model: RfModel, row: np.ndarray) -> float:
    row = np.asarray(row, dtype=np.float64)
    if row.shape[-1] != len(model.feature_names):
        raise DimensionMismatchError(
            f"row has {row.shape[-1]} features, model expects {len(model.feature_names)}")
    votes = sum(1 for tree in model.trees if int(tree.route(row)) == INCREASE)
    return votes / len(model.trees)


def rf_predict(model: RfModel, row: np.ndarray) -> int:
    """Majority vote over the forest; exact ties go to Increase."""
    return INCREASE if rf_vote_fraction(model, row) >= 0.5 else DECREASE


# --- distances and kNN --------------------------------------------------------


def distance(a: np.ndarray, b: np.ndarray, kind: str = EUCLIDEAN) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"vector lengths differ: {a.shape} vs {b.shape}")
    if kind == EUCLIDEAN:
        return float(np.sqrt(np.sum((a - b) ** 2)))
    if kind == COSINE:
        na, nb = np.sqrt(np.sum(a * a)), np.sqrt(np.sum(b * b))
        if na == 0.0 or nb == 0.0:
            raise ZeroVectorError("cosine distance is undefined for zero vectors")
        return float(1.0 - np.dot(a, b) / (na * nb))
    if kind == LORENTZIAN:
        return float(np.sum(np.log1p(np.abs(a - b))))
    raise ValueError(f"unknown distance kind {kind!r}")


def knn_neighbors(train: FeatureTable, query: np.ndarray, k: int,
                  kind: str = EUCLIDEAN) -> list[int]:
    """Indices of the k nearest training rows; distance ties keep the lower index."""
    n = len(train)
    if n == 0:
        raise EmptyTableError("no training rows")
    if not 1 <= k <= n:
        raise BadKError(f"k={k} outside [1, {n}]")
    dists = np.array([distance(train.X[i], query, kind) for i in range(n)])
    order = np.argsort(dists, kind="stable")
    return [int(i) for i in order[:k]]


def knn_predict(train: FeatureTable, query: np.ndarray, k: int,
                kind: str = EUCLIDEAN) -> int:
    """Majority label among the k nearest rows; vote ties go to Increase."""
    neighbors = knn_neighbors(train, query, k, kind)
    votes = int(np.sum(train.labels[neighbors] == INCREASE))
    return INCREASE if votes * 2 >= k else DECREASE
