from __future__ import annotations

import base64
from dataclasses import dataclass, field

import numpy as np

GENRES = ("Pop", "Rock", "Hip Hop", "Techno", "Rhythm Blues", "Vocal", "Reggae")
PROB_FLOOR = 1e-12


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss."""


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    class_names: tuple = GENRES
    feature_names: tuple = ()

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.ndim != 2 or len(self.X) != len(self.y):
            raise ValueError("X must be (n, d) with one label per row")
        if len(self.y) and (self.y.min() < 0 or self.y.max() >= len(self.class_names)):
            raise ValueError("labels out of range for class_names")
        self.class_names = tuple(self.class_names)
        if not self.feature_names:
            self.feature_names = tuple(f"f{i}" for i in range(self.X.shape[1]))
        self.feature_names = tuple(self.feature_names)

    def __len__(self):
        return len(self.y)

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    @property
    def feature_dim(self) -> int:
        return self.X.shape[1]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(self.X[idx], self.y[idx], self.class_names, self.feature_names)

    def columns(self, cols) -> "Dataset":
        cols = list(cols)
        return Dataset(self.X[:, cols], self.y, self.class_names,
                       tuple(self.feature_names[c] for c in cols))


@dataclass
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, X) -> "Standardizer":
        X = np.asarray(X, dtype=np.float64)
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        std = np.where(std < 1e-12, 1.0, std)
        return cls(mean, std)

    def apply(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.std

    def to_dict(self) -> dict:
        return {"mean": pack(self.mean), "std": pack(self.std)}

    @classmethod
    def from_dict(cls, d) -> "Standardizer | None":
        if d is None:
            return None
        return cls(unpack(d["mean"]), unpack(d["std"]))


def fit_standardizer(train: Dataset) -> Standardizer:
    return Standardizer.fit(train.X)


def softmax(z) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def cross_entropy(p, labels) -> float:
    """Mean of ``-log p[label]`` with probabilities floored at 1e-12."""
    p = np.atleast_2d(np.asarray(p, dtype=np.float64))
    labels = np.atleast_1d(np.asarray(labels, dtype=np.int64))
    picked = p[np.arange(len(labels)), labels]
    return float(np.mean(-np.log(np.maximum(picked, PROB_FLOOR))))


def one_hot(y, k) -> np.ndarray:
    out = np.zeros((len(y), k))
    out[np.arange(len(y)), y] = 1.0
    return out


def pack(a) -> dict:
    """Exact, compact JSON encoding of a float64 array."""
    a = np.ascontiguousarray(a, dtype="<f8")
    return {"shape": list(a.shape), "f8": base64.b64encode(a.tobytes()).decode("ascii")}


def unpack(d) -> np.ndarray:
    raw = base64.b64decode(d["f8"])
    return np.frombuffer(raw, dtype="<f8").reshape(d["shape"]).copy()


@dataclass
class Classifier:
    """Shared surface for every trained model."""

    class_names: tuple
    n_features: int
    hyperparameters: dict = field(default_factory=dict)
    standardizer: Standardizer | None = None

    model_type = "base"

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def _prepare(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise ValueError(
                f"{self.model_type} model expects {self.n_features} features, got {X.shape[1]}")
        return self.standardizer.apply(X) if self.standardizer is not None else X

    def predict_proba(self, X) -> np.ndarray:
        return self._proba(self._prepare(X))

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    def _proba(self, Z) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


def predict_proba(model: Classifier, X) -> np.ndarray:
    return model.predict_proba(X)
