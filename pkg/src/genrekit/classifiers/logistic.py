"""One-vs-rest logistic regression trained by full-batch gradient descent."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .common import (Classifier, Dataset, DivergenceError, Standardizer, one_hot, pack,
                     sigmoid, unpack)


@dataclass
class LogisticParams:
    iterations: int = 500
    step: float = 0.1
    l2: float = 1e-3
    standardize: bool = True


def ovr_loss_and_grad(W, b, X, Y, l2):
    """Summed per-class binary log-loss (averaged over rows) plus ``l2/2 * sum(W**2)``."""
    Z = X @ W + b
    P = sigmoid(Z)
    # log(1 + e^z) - y z, stable form
    data = np.mean(np.sum(np.logaddexp(0.0, Z) - Y * Z, axis=1))
    loss = data + 0.5 * l2 * np.sum(W * W)
    R = (P - Y) / len(X)
    return float(loss), X.T @ R + l2 * W, R.sum(axis=0)


@dataclass
class LogisticOvrModel(Classifier):
    weights: np.ndarray = None
    bias: np.ndarray = None
    history: list = field(default_factory=list)

    model_type = "logistic"

    def scores(self, X) -> np.ndarray:
        return self._prepare(X) @ self.weights + self.bias

    def _proba(self, Z):
        s = sigmoid(Z @ self.weights + self.bias)
        return s / s.sum(axis=1, keepdims=True)

    def predict(self, X):
        return np.argmax(self.scores(X), axis=1)

    def to_dict(self):
        return {"weights": pack(self.weights), "bias": pack(self.bias)}

    @classmethod
    def from_dict(cls, d, class_names, n_features, hyperparameters, standardizer):
        return cls(class_names, n_features, hyperparameters, standardizer,
                   unpack(d["weights"]), unpack(d["bias"]))


def train_logistic_ovr(train: Dataset, val: Dataset | None = None,
                       hp: LogisticParams = LogisticParams()) -> LogisticOvrModel:
    std = Standardizer.fit(train.X) if hp.standardize else None
    X = std.apply(train.X) if std else train.X
    Y = one_hot(train.y, train.n_classes)
    W = np.zeros((train.feature_dim, train.n_classes))
    b = np.zeros(train.n_classes)
    history = []
    for it in range(hp.iterations):
        loss, gW, gb = ovr_loss_and_grad(W, b, X, Y, hp.l2)
        if not np.isfinite(loss):
            raise DivergenceError(
                f"logistic regression diverged at iteration {it}; reduce step size (step={hp.step})")
        W -= hp.step * gW
        b -= hp.step * gb
        history.append(loss)
    model = LogisticOvrModel(train.class_names, train.feature_dim, asdict(hp), std, W, b)
    model.history = history
    return model
