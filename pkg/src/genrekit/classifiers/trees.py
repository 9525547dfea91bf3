"""Array-backed binary decision trees (Gini classification and squared-error regression).

Nodes live in parallel lists; ``feature == -1`` marks a leaf. Samples go left
when ``x[feature] <= threshold``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LEAF = -1


@dataclass
class Tree:
    feature: list = field(default_factory=list)
    threshold: list = field(default_factory=list)
    left: list = field(default_factory=list)
    right: list = field(default_factory=list)
    value: list = field(default_factory=list)

    def add_leaf(self, value) -> int:
        return self._add(LEAF, 0.0, value)

    def _add(self, feat, thr, value) -> int:
        self.feature.append(int(feat))
        self.threshold.append(float(thr))
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(value)
        return len(self.feature) - 1

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def internal_nodes(self) -> list[int]:
        return [i for i, f in enumerate(self.feature) if f != LEAF]

    def apply(self, X) -> np.ndarray:
        """Index of the leaf each row of ``X`` lands in."""
        X = np.atleast_2d(X)
        feature = np.asarray(self.feature)
        threshold = np.asarray(self.threshold)
        left = np.asarray(self.left)
        right = np.asarray(self.right)
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        active = feature[node] != LEAF
        while active.any():
            r = rows[active]
            n = node[active]
            go_left = X[r, feature[n]] <= threshold[n]
            node[r] = np.where(go_left, left[n], right[n])
            active = feature[node] != LEAF
        return node

    def predict_value(self, X) -> np.ndarray:
        return np.asarray(self.value)[self.apply(X)]

    def to_dict(self) -> dict:
        return {"feature": list(self.feature), "threshold": list(self.threshold),
                "left": list(self.left), "right": list(self.right), "value": list(self.value)}

    @classmethod
    def from_dict(cls, d) -> "Tree":
        return cls(list(d["feature"]), [float(t) for t in d["threshold"]],
                   list(d["left"]), list(d["right"]), list(d["value"]))


def _candidate_splits(Xn, score_fn):
    """Best (feature column, threshold, score) over all midpoints of distinct sorted values.

    ``score_fn(order)`` receives the per-column sort order and returns an
    (n-1, m) array scoring a split after each sorted position; higher is
    better. Ties resolve to the lowest column, then the lowest threshold.
    """
    order = np.argsort(Xn, axis=0, kind="stable")
    sorted_x = np.take_along_axis(Xn, order, axis=0)
    valid = sorted_x[1:] > sorted_x[:-1]
    if not valid.any():
        return None
    score = np.where(valid, score_fn(order), -np.inf)
    # column-major scan for deterministic tie-breaking
    flat = int(np.argmax(score.T))
    col, pos = divmod(flat, score.shape[0])
    thr = 0.5 * (sorted_x[pos, col] + sorted_x[pos + 1, col])
    if not thr < sorted_x[pos + 1, col]:
        thr = sorted_x[pos, col]
    return col, float(thr), float(score[pos, col])


def grow_classification_tree(X, y, n_classes, rng, max_features, max_depth=20,
                             min_samples_split=2) -> Tree:
    """CART tree with Gini splits over a fresh random feature subset at each node."""
    tree = Tree()
    d = X.shape[1]
    Y = np.eye(n_classes)[y]

    def leaf_value(idx):
        return int(np.argmax(np.bincount(y[idx], minlength=n_classes)))

    def build(idx, depth):
        labels = y[idx]
        if depth >= max_depth or len(idx) < min_samples_split or np.all(labels == labels[0]):
            return tree.add_leaf(leaf_value(idx))
        feats = np.sort(rng.choice(d, size=min(max_features, d), replace=False))
        Xn = X[np.ix_(idx, feats)]
        n = len(idx)

        def score(order):
            counts = np.cumsum(Y[idx][order], axis=0)[:-1]  # (n-1, m, K)
            total = Y[idx].sum(axis=0)
            n_left = np.arange(1, n)[:, None]
            n_right = n - n_left
            right = total - counts
            gini_l = 1.0 - np.sum(counts ** 2, axis=2) / n_left ** 2
            gini_r = 1.0 - np.sum(right ** 2, axis=2) / n_right ** 2
            return -(n_left * gini_l + n_right * gini_r) / n

        best = _candidate_splits(Xn, score)
        if best is None:
            return tree.add_leaf(leaf_value(idx))
        col, thr, _ = best
        f = int(feats[col])
        node = tree._add(f, thr, leaf_value(idx))
        mask = X[idx, f] <= thr
        tree.left[node] = build(idx[mask], depth + 1)
        tree.right[node] = build(idx[~mask], depth + 1)
        return node

    build(np.arange(len(y)), 0)
    return tree


def grow_regression_tree(X, residual, hessian, max_depth=3, min_samples_split=2,
                         newton_scale=1.0, min_gain=1e-12) -> Tree:
    """Least-squares tree on ``residual``; leaves hold ``scale * sum(residual) / sum(hessian)``."""
    tree = Tree()

    def leaf_value(idx):
        den = float(np.sum(hessian[idx]))
        if den < 1e-12:
            return 0.0
        return newton_scale * float(np.sum(residual[idx])) / den

    def build(idx, depth):
        if depth >= max_depth or len(idx) < min_samples_split:
            return tree.add_leaf(leaf_value(idx))
        Xn = X[idx]
        r = residual[idx]
        n = len(idx)
        total = r.sum()
        parent = total * total / n

        def score(order):
            s_left = np.cumsum(r[order], axis=0)[:-1]
            n_left = np.arange(1, n)[:, None]
            s_right = total - s_left
            return s_left ** 2 / n_left + s_right ** 2 / (n - n_left) - parent

        best = _candidate_splits(Xn, score)
        if best is None or best[2] <= min_gain:
            return tree.add_leaf(leaf_value(idx))
        f, thr, _ = best
        node = tree._add(f, thr, leaf_value(idx))
        mask = X[idx, f] <= thr
        tree.left[node] = build(idx[mask], depth + 1)
        tree.right[node] = build(idx[~mask], depth + 1)
        return node

    build(np.arange(len(residual)), 0)
    return tree
