"""Multiclass softmax gradient boosting with depth-limited regression trees.

Each round fits one least-squares tree per class to the residual
``y_c - p_c`` and sets leaf values with the one-step Newton estimate
``(K-1)/K * sum(r) / sum(p (1-p))``, shrunk by the learning rate.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .common import Classifier, Dataset, Standardizer, cross_entropy, one_hot, softmax
from .trees import LEAF, Tree, grow_regression_tree


@dataclass
class GbtParams:
    rounds: int = 100
    learning_rate: float = 0.1
    max_depth: int = 3
    min_samples_split: int = 2
    standardize: bool = False


@dataclass
class GbtModel(Classifier):
    rounds: list = field(default_factory=list)  # rounds x classes trees
    split_counts: np.ndarray = None
    feature_names: tuple = ()
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)

    model_type = "gbt"

    def raw_scores(self, Z) -> np.ndarray:
        F = np.zeros((len(Z), self.n_classes))
        lr = self.hyperparameters.get("learning_rate", 0.1)
        for trees in self.rounds:
            for c, tree in enumerate(trees):
                F[:, c] += lr * tree.predict_value(Z)
        return F

    def _proba(self, Z):
        return softmax(self.raw_scores(Z))

    def to_dict(self):
        return {
            "rounds": [[t.to_dict() for t in trees] for trees in self.rounds],
            "split_counts": [int(c) for c in self.split_counts],
            "feature_names": list(self.feature_names),
            "train_loss": list(self.train_loss),
            "val_loss": list(self.val_loss),
        }

    @classmethod
    def from_dict(cls, d, class_names, n_features, hyperparameters, standardizer):
        return cls(class_names, n_features, hyperparameters, standardizer,
                   [[Tree.from_dict(t) for t in trees] for trees in d["rounds"]],
                   np.asarray(d["split_counts"], dtype=np.int64),
                   tuple(d.get("feature_names", ())),
                   list(d.get("train_loss", [])), list(d.get("val_loss", [])))


def count_splits(rounds, n_features) -> np.ndarray:
    counts = np.zeros(n_features, dtype=np.int64)
    for trees in rounds:
        for tree in trees:
            for f in tree.feature:
                if f != LEAF:
                    counts[f] += 1
    return counts


def train_gbt(train: Dataset, val: Dataset | None = None, hp: GbtParams = GbtParams()) -> GbtModel:
    std = Standardizer.fit(train.X) if hp.standardize else None
    X = std.apply(train.X) if std else train.X
    K = train.n_classes
    Y = one_hot(train.y, K)
    F = np.zeros((len(train), K))
    Xv = None
    if val is not None and len(val):
        Xv = std.apply(val.X) if std else val.X
        Fv = np.zeros((len(val), K))
    scale = (K - 1) / K
    rounds, train_loss, val_loss = [], [], []
    for _ in range(hp.rounds):
        P = softmax(F)
        trees = []
        for c in range(K):
            r = Y[:, c] - P[:, c]
            h = P[:, c] * (1.0 - P[:, c])
            tree = grow_regression_tree(X, r, h, hp.max_depth, hp.min_samples_split, scale)
            trees.append(tree)
        for c, tree in enumerate(trees):
            F[:, c] += hp.learning_rate * tree.predict_value(X)
            if Xv is not None:
                Fv[:, c] += hp.learning_rate * tree.predict_value(Xv)
        rounds.append(trees)
        train_loss.append(cross_entropy(softmax(F), train.y))
        if Xv is not None:
            val_loss.append(cross_entropy(softmax(Fv), val.y))
    return GbtModel(train.class_names, train.feature_dim, asdict(hp), std, rounds,
                    count_splits(rounds, train.feature_dim), train.feature_names,
                    train_loss, val_loss)


def feature_importance(model: GbtModel) -> list[tuple[str, int]]:
    """Features ranked by how many decision nodes test them; ties keep feature order."""
    counts = model.split_counts
    names = model.feature_names or tuple(f"f{i}" for i in range(model.n_features))
    order = sorted(range(len(counts)), key=lambda i: (-int(counts[i]), i))
    return [(names[i], int(counts[i])) for i in order]
