"""Bagged Gini trees with per-node random feature subsets; majority-vote prediction."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .common import Classifier, Dataset, Standardizer
from .trees import Tree, grow_classification_tree


@dataclass
class ForestParams:
    n_trees: int = 200
    max_depth: int = 20
    min_samples_split: int = 2
    max_features: int | None = None  # None -> ceil(sqrt(d))
    seed: int = 0
    standardize: bool = False


@dataclass
class RandomForestModel(Classifier):
    trees: list = field(default_factory=list)

    model_type = "random_forest"

    def votes(self, Z) -> np.ndarray:
        counts = np.zeros((len(Z), self.n_classes))
        rows = np.arange(len(Z))
        for tree in self.trees:
            counts[rows, tree.predict_value(Z).astype(np.int64)] += 1.0
        return counts

    def _proba(self, Z):
        counts = self.votes(Z)
        return counts / counts.sum(axis=1, keepdims=True)

    def to_dict(self):
        return {"trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, d, class_names, n_features, hyperparameters, standardizer):
        return cls(class_names, n_features, hyperparameters, standardizer,
                   [Tree.from_dict(t) for t in d["trees"]])


def tree_seeds(master_seed: int, n: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(master_seed).spawn(n)


def train_random_forest(train: Dataset, hp: ForestParams = ForestParams()) -> RandomForestModel:
    std = Standardizer.fit(train.X) if hp.standardize else None
    X = std.apply(train.X) if std else train.X
    d = train.feature_dim
    m = hp.max_features or math.ceil(math.sqrt(d))
    n = len(train)
    trees = []
    for ss in tree_seeds(hp.seed, hp.n_trees):
        rng = np.random.default_rng(ss)
        boot = rng.integers(0, n, size=n)
        trees.append(grow_classification_tree(
            X[boot], train.y[boot], train.n_classes, rng, m,
            hp.max_depth, hp.min_samples_split))
    return RandomForestModel(train.class_names, d, asdict(hp), std, trees)
