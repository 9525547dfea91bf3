from .boosting import GbtModel, GbtParams, feature_importance, train_gbt
from .common import (GENRES, Classifier, Dataset, DivergenceError, Standardizer, cross_entropy,
                     fit_standardizer, predict_proba, softmax)
from .forest import ForestParams, RandomForestModel, train_random_forest
from .logistic import LogisticOvrModel, LogisticParams, train_logistic_ovr
from .mlp import MlpModel, MlpParams, train_mlp
from .serialize import LayoutMismatchError, load_model, save_model

__all__ = [
    "GENRES", "Classifier", "Dataset", "DivergenceError", "Standardizer", "cross_entropy",
    "fit_standardizer", "predict_proba", "softmax",
    "LogisticOvrModel", "LogisticParams", "train_logistic_ovr",
    "RandomForestModel", "ForestParams", "train_random_forest",
    "GbtModel", "GbtParams", "train_gbt", "feature_importance",
    "MlpModel", "MlpParams", "train_mlp",
    "LayoutMismatchError", "load_model", "save_model",
]
