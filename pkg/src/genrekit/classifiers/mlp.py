"""Feed-forward ReLU network with inverted dropout, L2 weight decay and Adam."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .common import (Classifier, Dataset, DivergenceError, Standardizer, cross_entropy,
                     one_hot, pack, softmax, unpack)


@dataclass
class MlpParams:
    hidden: tuple = (512, 32)
    dropout: float = 0.3
    l2: float = 1e-3
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    epochs: int = 10
    batch_size: int = 32
    seed: int = 0
    standardize: bool = True


def init_params(sizes, rng) -> list[np.ndarray]:
    """He-normal weights, zero biases; returns [W1, b1, W2, b2, ...]."""
    params = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        params.append(rng.standard_normal((fan_in, fan_out)) * np.sqrt(2.0 / fan_in))
        params.append(np.zeros(fan_out))
    return params


def forward(params, X, dropout=0.0, rng=None, masks=None):
    """Return (probabilities, cache). Dropout is applied to hidden activations only."""
    n_layers = len(params) // 2
    acts = [X]
    used_masks = []
    h = X
    for layer in range(n_layers):
        W, b = params[2 * layer], params[2 * layer + 1]
        z = h @ W + b
        if layer == n_layers - 1:
            return softmax(z), (acts, used_masks)
        h = np.maximum(z, 0.0)
        mask = None
        if masks is not None:
            mask = masks[layer]
        elif dropout > 0.0 and rng is not None:
            mask = (rng.random(h.shape) >= dropout) / (1.0 - dropout)
        if mask is not None:
            h = h * mask
        used_masks.append(mask)
        acts.append(h)
    raise ValueError("network needs at least one layer")


def l2_penalty(params, l2) -> float:
    return 0.5 * l2 * sum(float(np.sum(W * W)) for W in params[0::2])


def loss_and_grad(params, X, y, l2, dropout=0.0, rng=None, masks=None):
    """Mean cross-entropy plus ``l2/2 * sum(W**2)`` over weight matrices, with gradients."""
    probs, (acts, used_masks) = forward(params, X, dropout, rng, masks)
    n_classes = params[-1].shape[0]
    loss = cross_entropy(probs, y) + l2_penalty(params, l2)
    grads = [None] * len(params)
    delta = (probs - one_hot(y, n_classes)) / len(X)
    for layer in range(len(params) // 2 - 1, -1, -1):
        W = params[2 * layer]
        grads[2 * layer] = acts[layer].T @ delta + l2 * W
        grads[2 * layer + 1] = delta.sum(axis=0)
        if layer > 0:
            delta = delta @ W.T
            mask = used_masks[layer - 1]
            if mask is not None:
                delta = delta * mask
            delta = delta * (acts[layer] > 0)
    return loss, grads


@dataclass
class MlpModel(Classifier):
    params: list = field(default_factory=list)
    history: list = field(default_factory=list)
    selected_epoch: int = -1

    model_type = "mlp"

    @property
    def layer_sizes(self) -> list[int]:
        return [self.params[0].shape[0]] + [W.shape[1] for W in self.params[0::2]]

    def _proba(self, Z):
        return forward(self.params, Z)[0]

    def to_dict(self):
        return {"layer_sizes": self.layer_sizes,
                "params": [pack(p) for p in self.params],
                "history": self.history,
                "selected_epoch": self.selected_epoch}

    @classmethod
    def from_dict(cls, d, class_names, n_features, hyperparameters, standardizer):
        return cls(class_names, n_features, hyperparameters, standardizer,
                   [unpack(p) for p in d["params"]], list(d.get("history", [])),
                   int(d.get("selected_epoch", -1)))


def train_mlp(train: Dataset, val: Dataset | None = None, hp: MlpParams = MlpParams()) -> MlpModel:
    """Minibatch Adam; keeps the epoch snapshot with the lowest validation loss."""
    rng = np.random.default_rng(hp.seed)
    std = Standardizer.fit(train.X) if hp.standardize else None
    X = std.apply(train.X) if std else train.X
    Xv = yv = None
    if val is not None and len(val):
        Xv = std.apply(val.X) if std else val.X
        yv = val.y
    sizes = [train.feature_dim, *hp.hidden, train.n_classes]
    params = init_params(sizes, rng)
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    t = 0
    best, best_loss, best_epoch = None, np.inf, -1
    history = []
    n = len(train)
    for epoch in range(hp.epochs):
        order = rng.permutation(n)
        batch_losses = []
        for start in range(0, n, hp.batch_size):
            idx = order[start:start + hp.batch_size]
            loss, grads = loss_and_grad(params, X[idx], train.y[idx], hp.l2, hp.dropout, rng)
            if not np.isfinite(loss):
                raise DivergenceError(
                    f"MLP loss became non-finite in epoch {epoch}; reduce learning rate "
                    f"(learning_rate={hp.learning_rate})")
            batch_losses.append(loss)
            t += 1
            for i, g in enumerate(grads):
                m[i] = hp.beta1 * m[i] + (1 - hp.beta1) * g
                v[i] = hp.beta2 * v[i] + (1 - hp.beta2) * g * g
                m_hat = m[i] / (1 - hp.beta1 ** t)
                v_hat = v[i] / (1 - hp.beta2 ** t)
                params[i] = params[i] - hp.learning_rate * m_hat / (np.sqrt(v_hat) + hp.eps)
        train_probs = forward(params, X)[0]
        record = {"epoch": epoch, "train_loss": float(np.mean(batch_losses)),
                  "train_accuracy": float(np.mean(np.argmax(train_probs, 1) == train.y))}
        if Xv is not None:
            vp = forward(params, Xv)[0]
            record["val_loss"] = cross_entropy(vp, yv)
            record["val_accuracy"] = float(np.mean(np.argmax(vp, 1) == yv))
            score = record["val_loss"]
        else:
            score = cross_entropy(train_probs, train.y)
        history.append(record)
        if score < best_loss:
            best_loss, best_epoch = score, epoch
            best = [p.copy() for p in params]
    if best is None:
        best = params
    hyper = asdict(hp)
    hyper["hidden"] = list(hp.hidden)
    return MlpModel(train.class_names, train.feature_dim, hyper, std, best, history, best_epoch)
