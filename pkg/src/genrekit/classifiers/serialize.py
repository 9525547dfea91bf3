"""Versioned JSON model documents."""

from __future__ import annotations

import json

from .boosting import GbtModel
from .common import Classifier, Standardizer
from .forest import RandomForestModel
from .logistic import LogisticOvrModel
from .mlp import MlpModel

FORMAT_VERSION = 1

MODEL_CLASSES = {cls.model_type: cls for cls in
                 (LogisticOvrModel, RandomForestModel, GbtModel, MlpModel)}


class LayoutMismatchError(ValueError):
    """Model was trained against a different feature layout."""


def model_to_document(model: Classifier, feature_layout_version: str, metadata: dict | None = None) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "model_type": model.model_type,
        "hyperparameters": model.hyperparameters,
        "class_names": list(model.class_names),
        "n_features": model.n_features,
        "feature_layout_version": feature_layout_version,
        "standardizer": model.standardizer.to_dict() if model.standardizer else None,
        "weights": model.to_dict(),
        "metadata": metadata or {},
    }


def model_from_document(doc: dict, expected_layout: str | None = None) -> Classifier:
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format_version {doc.get('format_version')!r}")
    if expected_layout is not None and doc.get("feature_layout_version") != expected_layout:
        raise LayoutMismatchError(
            f"model feature layout {doc.get('feature_layout_version')!r} "
            f"does not match expected {expected_layout!r}")
    try:
        cls = MODEL_CLASSES[doc["model_type"]]
    except KeyError:
        raise ValueError(f"unknown model_type {doc.get('model_type')!r}") from None
    return cls.from_dict(doc["weights"], tuple(doc["class_names"]), int(doc["n_features"]),
                         doc["hyperparameters"], Standardizer.from_dict(doc["standardizer"]))


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def save_model(path, model: Classifier, feature_layout_version: str, metadata: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(model_to_document(model, feature_layout_version, metadata)))


def read_document(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def load_model(path, expected_layout: str | None = None) -> Classifier:
    return model_from_document(read_document(path), expected_layout)
