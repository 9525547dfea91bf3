"""Splits, metrics, ROC/AUC, ensembles and the ablation experiments."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .classifiers import Dataset, GbtParams, train_gbt
from .features import FREQUENCY_DOMAIN, TIME_DOMAIN

log = logging.getLogger(__name__)

DEFAULT_FRACTIONS = (0.90, 0.05, 0.05)


@dataclass
class SplitIndices:
    train: np.ndarray
    validation: np.ndarray
    test: np.ndarray
    seed: int

    def sizes(self) -> tuple[int, int, int]:
        return len(self.train), len(self.validation), len(self.test)


def split(n: int, seed: int = 0, fractions=DEFAULT_FRACTIONS, labels=None,
          stratify: bool = False) -> SplitIndices:
    """Seeded shuffle, then the first 90% train, next 5% validation, remainder test.

    With ``stratify`` the same cut is applied inside each class.
    """
    if n < 20:
        raise ValueError(f"need at least 20 examples to split, got {n}")
    rng = np.random.default_rng(seed)
    if not stratify:
        perm = rng.permutation(n)
        n_train = int(round(fractions[0] * n))
        n_val = int(round(fractions[1] * n))
        return SplitIndices(np.sort(perm[:n_train]), np.sort(perm[n_train:n_train + n_val]),
                            np.sort(perm[n_train + n_val:]), seed)
    if labels is None:
        raise ValueError("stratified split needs labels")
    labels = np.asarray(labels)
    parts = ([], [], [])
    for c in np.unique(labels):
        members = rng.permutation(np.flatnonzero(labels == c))
        k_train = int(round(fractions[0] * len(members)))
        k_val = int(round(fractions[1] * len(members)))
        parts[0].extend(members[:k_train])
        parts[1].extend(members[k_train:k_train + k_val])
        parts[2].extend(members[k_train + k_val:])
    return SplitIndices(*(np.sort(np.array(p, dtype=np.int64)) for p in parts), seed)


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def _check_pair(pred, labels):
    pred = np.asarray(pred, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if pred.shape != labels.shape:
        raise ValueError("predictions and labels differ in length")
    if pred.size == 0:
        raise ValueError("empty prediction set")
    return pred, labels


def confusion(pred, labels, n_classes: int = 7) -> np.ndarray:
    """Counts[i, j]: examples of true class i predicted as j."""
    pred, labels = _check_pair(pred, labels)
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (labels, pred), 1)
    return counts


def accuracy(pred, labels) -> float:
    pred, labels = _check_pair(pred, labels)
    return float(np.mean(pred == labels))


def per_class_prf(cm) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    cm = np.asarray(cm, dtype=np.float64)
    tp = np.diag(cm)
    predicted = cm.sum(axis=0)
    actual = cm.sum(axis=1)
    precision = np.divide(tp, predicted, out=np.zeros_like(tp), where=predicted > 0)
    recall = np.divide(tp, actual, out=np.zeros_like(tp), where=actual > 0)
    denom = precision + recall
    f = np.divide(2 * precision * recall, denom, out=np.zeros_like(tp), where=denom > 0)
    return precision, recall, f


def macro_f_score(pred, labels, n_classes: int = 7) -> float:
    """Unweighted mean of per-class F1 over all ``n_classes`` classes."""
    _, _, f = per_class_prf(confusion(pred, labels, n_classes))
    return float(np.mean(f))


def binary_auc(scores, positive) -> float:
    """Mann-Whitney AUC; tied scores count one half."""
    scores = np.asarray(scores, dtype=np.float64)
    positive = np.asarray(positive, dtype=bool)
    n_pos = int(positive.sum())
    n_neg = len(positive) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs at least one positive and one negative")
    ranks = rankdata(scores)
    return float((ranks[positive].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def roc_curve(scores, positive) -> np.ndarray:
    """(fpr, tpr) points from (0, 0) to (1, 1), one per distinct threshold."""
    scores = np.asarray(scores, dtype=np.float64)
    positive = np.asarray(positive, dtype=bool)
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    p = positive[order]
    tps = np.cumsum(p)
    fps = np.cumsum(~p)
    last = np.r_[np.flatnonzero(s[1:] != s[:-1]), len(s) - 1]
    n_pos = max(int(p.sum()), 1)
    n_neg = max(int((~p).sum()), 1)
    tpr = np.r_[0.0, tps[last] / n_pos]
    fpr = np.r_[0.0, fps[last] / n_neg]
    return np.column_stack([fpr, tpr])


@dataclass
class RocResult:
    curves: dict            # class index -> (m, 2) array of (fpr, tpr)
    auc: dict               # class index -> AUC
    macro_auc: float
    skipped: list = field(default_factory=list)


def roc_and_auc(probs, labels) -> RocResult:
    """One-vs-rest ROC and rank AUC per class; classes lacking positives or negatives are skipped."""
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    curves, aucs, skipped = {}, {}, []
    for c in range(probs.shape[1]):
        pos = labels == c
        if not pos.any() or pos.all():
            skipped.append(c)
            continue
        curves[c] = roc_curve(probs[:, c], pos)
        aucs[c] = binary_auc(probs[:, c], pos)
    macro = float(np.mean(list(aucs.values()))) if aucs else float("nan")
    if skipped:
        log.debug("AUC skipped classes without positives/negatives: %s", skipped)
    return RocResult(curves, aucs, macro, skipped)


def ensemble(members) -> np.ndarray:
    """Element-wise mean of member probability matrices (n_examples, n_classes)."""
    members = [np.asarray(m, dtype=np.float64) for m in members]
    if len(members) < 2:
        raise ValueError("an ensemble needs at least two members")
    shapes = {m.shape for m in members}
    if len(shapes) != 1:
        raise ValueError(f"member probability shapes differ: {sorted(shapes)}")
    # offsets from the first member: identical members come back bit-exact
    base = members[0]
    return base + np.mean(np.stack(members) - base, axis=0)


@dataclass
class EvaluationReport:
    name: str
    accuracy: float
    f_score: float
    auc: float
    confusion: np.ndarray
    roc: RocResult
    class_names: tuple

    def to_dict(self) -> dict:
        precision, recall, f = per_class_prf(self.confusion)
        per_class = {}
        for c, cname in enumerate(self.class_names):
            per_class[cname] = {
                "precision": float(precision[c]), "recall": float(recall[c]), "f_score": float(f[c]),
                "auc": self.roc.auc.get(c), "support": int(self.confusion[c].sum()),
            }
        return {"name": self.name, "accuracy": self.accuracy, "f_score": self.f_score,
                "auc": finite_or_none(self.auc), "per_class": per_class,
                "auc_skipped_classes": [self.class_names[c] for c in self.roc.skipped]}


def finite_or_none(x):
    return float(x) if x is not None and np.isfinite(x) else None


def evaluate(probs, labels, class_names, name: str = "model") -> EvaluationReport:
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    pred = np.argmax(probs, axis=1)
    k = len(class_names)
    roc = roc_and_auc(probs, labels)
    return EvaluationReport(name, accuracy(pred, labels), macro_f_score(pred, labels, k),
                            roc.macro_auc, confusion(pred, labels, k), roc, tuple(class_names))


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

def _gbt_scores(train: Dataset, val: Dataset, test: Dataset, cols, hp) -> tuple[float, float]:
    model = train_gbt(train.columns(cols), val.columns(cols), hp)
    probs = model.predict_proba(test.X[:, cols])
    rep = evaluate(probs, test.y, test.class_names)
    return rep.auc, rep.accuracy


def ablate_top_n(train: Dataset, val: Dataset, test: Dataset, ranking, n_values=(10, 20, 30, 93),
                 hp: GbtParams = GbtParams()) -> list[tuple[int, float, float]]:
    """Retrain GBT on the top-N ranked features for each N; rows of (N, auc, accuracy).

    ``ranking`` is a sequence of feature names or indices, most important first.
    """
    index = {name: i for i, name in enumerate(train.feature_names)}
    order = [index[r] if isinstance(r, str) else int(r) for r in ranking]
    rows = []
    for n in n_values:
        if n > train.feature_dim:
            log.warning("N=%d exceeds feature dimension %d; clamping", n, train.feature_dim)
            n = train.feature_dim
        cols = sorted(order[:n])
        auc, acc = _gbt_scores(train, val, test, cols, hp)
        rows.append((n, auc, acc))
    return rows


def domain_comparison(train: Dataset, val: Dataset, test: Dataset, hp: GbtParams = GbtParams(),
                      time_cols=TIME_DOMAIN, freq_cols=FREQUENCY_DOMAIN) -> list[tuple[str, float, float]]:
    sets = [("time", list(time_cols)), ("frequency", list(freq_cols)),
            ("both", sorted(set(time_cols) | set(freq_cols)))]
    return [(name, *_gbt_scores(train, val, test, cols, hp)) for name, cols in sets]


# ---------------------------------------------------------------------------
# Report files
# ---------------------------------------------------------------------------

def fmt(x) -> str:
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def write_rows(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_confusion_csv(path, cm, class_names) -> None:
    write_rows(path, ["true\\pred", *class_names],
               [[name, *map(int, row)] for name, row in zip(class_names, cm)])


def write_roc_csv(path, curve) -> None:
    write_rows(path, ["fpr", "tpr"], [(float(a), float(b)) for a, b in curve])


def safe_name(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in name)


def write_metrics_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
