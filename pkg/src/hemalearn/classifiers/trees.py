"""CART trees and bagged forests.

Split search is exact: every midpoint between consecutive distinct sorted
values of every candidate feature is scored by weighted Gini decrease.
Ties prefer the lowest feature index, then the smallest threshold.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from ..dataio import Dataset
from ..errors import DataWarning, ParameterError
from .base import FittedModel, PROB, register


@dataclass
class Tree:
    """Flat-array binary tree; feature == -1 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray        # leaf payload (class-1 share, or Newton value)
    default_left: np.ndarray  # missing-value routing per internal node

    def scores(self, X: np.ndarray) -> np.ndarray:
        n = X.shape[0]
        node = np.zeros(n, dtype=np.int64)
        while True:
            f = self.feature[node]
            active = f >= 0
            if not active.any():
                break
            rows = np.flatnonzero(active)
            feats = f[rows]
            vals = X[rows, feats]
            thr = self.threshold[node[rows]]
            go_left = vals <= thr
            missing = np.isnan(vals)
            if missing.any():
                go_left = np.where(missing, self.default_left[node[rows]], go_left)
            nxt = np.where(go_left, self.left[node[rows]], self.right[node[rows]])
            node[rows] = nxt
        return self.value[node]

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        out = 0
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depths[self.left[i]] = depths[i] + 1
                depths[self.right[i]] = depths[i] + 1
            else:
                out = max(out, int(depths[i]))
        return out

    def to_state(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "default_left": self.default_left.tolist(),
        }

    @classmethod
    def from_state(cls, state: dict) -> "Tree":
        return cls(
            feature=np.array(state["feature"], dtype=np.int64),
            threshold=np.array(state["threshold"], dtype=np.float64),
            left=np.array(state["left"], dtype=np.int64),
            right=np.array(state["right"], dtype=np.int64),
            value=np.array(state["value"], dtype=np.float64),
            default_left=np.array(state["default_left"], dtype=bool),
        )


def _gini(w1, w0):
    w = w1 + w0
    return 1.0 - (w1 / w) ** 2 - (w0 / w) ** 2


def best_gini_split(values: np.ndarray, w: np.ndarray, wy: np.ndarray):
    """Best (decrease, threshold) on one feature, or None.

    ``values`` must be sorted ascending; ``w``/``wy`` are total and class-1
    weights in the same order. The first maximizing midpoint wins, which
    realizes the smallest-threshold tie rule.
    """
    W = w.sum()
    W1 = wy.sum()
    if W1 == 0.0 or W1 == W:
        return None
    parent = _gini(W1, W - W1)
    cw = np.cumsum(w)[:-1]
    cw1 = np.cumsum(wy)[:-1]
    valid = values[1:] != values[:-1]
    if not valid.any():
        return None
    wl, w1l = cw, cw1
    wr, w1r = W - cw, W1 - cw1
    with np.errstate(invalid="ignore", divide="ignore"):
        gl = 1.0 - (w1l / wl) ** 2 - ((wl - w1l) / wl) ** 2
        gr = 1.0 - (w1r / wr) ** 2 - ((wr - w1r) / wr) ** 2
        decrease = parent - (wl / W) * gl - (wr / W) * gr
    decrease = np.where(valid & (wl > 0) & (wr > 0), decrease, -np.inf)
    p = int(np.argmax(decrease))
    if not np.isfinite(decrease[p]) or decrease[p] <= 0.0:
        return None
    return float(decrease[p]), float((values[p] + values[p + 1]) / 2.0)


def grow_classification_tree(X, y, w=None, max_depth=None, min_samples_split=2,
                             max_features=None, rng=None) -> Tree:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, d = X.shape
    if w is None:
        w = np.ones(n)
    feature, threshold, left, right, value, default_left = [], [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        default_left.append(True)
        return len(feature) - 1

    root = new_node()
    stack = [(root, np.arange(n), 0)]
    while stack:
        node, idx, depth = stack.pop(0)
        wi = w[idx]
        W = wi.sum()
        W1 = (wi * y[idx]).sum()
        value[node] = W1 / W if W > 0 else 0.0
        if (max_depth is not None and depth >= max_depth) or W <= 0:
            continue
        if idx.size < min_samples_split or W1 == 0.0 or W1 == W:
            continue
        if max_features is not None and max_features < d:
            cand = np.sort(rng.permutation(d)[:max_features])
        else:
            cand = np.arange(d)
        best = None
        for j in cand:
            order = np.argsort(X[idx, j], kind="stable")
            split = best_gini_split(X[idx[order], j], wi[order], wi[order] * y[idx[order]])
            if split is not None and (best is None or split[0] > best[0]):
                best = (split[0], int(j), split[1])
        if best is None:
            continue
        _, j, thr = best
        go_left = X[idx, j] <= thr
        l, r = new_node(), new_node()
        feature[node] = j
        threshold[node] = thr
        left[node] = l
        right[node] = r
        stack.append((l, idx[go_left], depth + 1))
        stack.append((r, idx[~go_left], depth + 1))
    return Tree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value, dtype=np.float64),
        default_left=np.array(default_left, dtype=bool),
    )


@dataclass
class DecisionTreeParams:
    tree: Tree

    def score_matrix(self, X):
        return self.tree.scores(X)

    def to_state(self):
        return {"tree": self.tree.to_state()}

    @classmethod
    def from_state(cls, state):
        return cls(tree=Tree.from_state(state["tree"]))


def fit_decision_tree(train: Dataset, max_depth=None, min_samples_split=2) -> FittedModel:
    """CART with Gini impurity; scores are leaf class-1 shares."""
    if train.n_rows < 2:
        raise ParameterError("need at least 2 training samples")
    if np.unique(train.y).size < 2:
        warnings.warn("single-class training data: degenerate single-leaf tree",
                      DataWarning)
    tree = grow_classification_tree(train.X, train.y, max_depth=max_depth,
                                    min_samples_split=min_samples_split)
    return FittedModel(
        algorithm="decision_tree",
        feature_names=train.feature_names,
        hyperparameters={"max_depth": max_depth,
                         "min_samples_split": min_samples_split},
        params=DecisionTreeParams(tree=tree),
        kind=PROB,
    )


@dataclass
class ForestParams:
    trees: list

    def score_matrix(self, X):
        votes = np.zeros(X.shape[0])
        for tree in self.trees:
            votes += (tree.scores(X) >= 0.5).astype(np.float64)
        return votes / len(self.trees)

    def to_state(self):
        return {"trees": [t.to_state() for t in self.trees]}

    @classmethod
    def from_state(cls, state):
        return cls(trees=[Tree.from_state(t) for t in state["trees"]])


def fit_random_forest(train: Dataset, n_trees: int = 100, max_features=None,
                      seed: int = 0, bootstrap: bool = True,
                      max_depth=None) -> FittedModel:
    """Bagged CART ensemble; majority vote, score = vote fraction.

    Each tree sees a bootstrap of the training rows (as integer sample
    weights) and samples ceil(sqrt(d)) features per split by default.
    """
    if n_trees < 1:
        raise ParameterError("n_trees must be positive")
    n, d = train.X.shape
    if max_features is None:
        max_features = int(np.ceil(np.sqrt(d)))
    if not 1 <= max_features <= d:
        raise ParameterError(f"max_features must be in [1, {d}]")
    trees = []
    for seq in np.random.SeedSequence(seed).spawn(n_trees):
        rng = np.random.default_rng(seq)
        if bootstrap:
            counts = np.bincount(rng.integers(0, n, n), minlength=n).astype(np.float64)
            keep = np.flatnonzero(counts > 0)
            tree = grow_classification_tree(
                train.X[keep], train.y[keep], w=counts[keep],
                max_depth=max_depth, max_features=max_features, rng=rng)
        else:
            tree = grow_classification_tree(
                train.X, train.y, max_depth=max_depth,
                max_features=max_features, rng=rng)
        trees.append(tree)
    return FittedModel(
        algorithm="random_forest",
        feature_names=train.feature_names,
        hyperparameters={"n_trees": n_trees, "max_features": max_features,
                         "seed": seed, "bootstrap": bootstrap,
                         "max_depth": max_depth},
        params=ForestParams(trees=trees),
        kind=PROB,
    )


register("decision_tree", DecisionTreeParams)
register("random_forest", ForestParams)
