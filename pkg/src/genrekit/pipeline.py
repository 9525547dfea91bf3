"""Run configuration, file formats and batch steps shared by the CLI."""

from __future__ import annotations

import csv
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import dsp
from .audio_io import read_wav
from .classifiers import (GENRES, Dataset, ForestParams, GbtParams, LogisticParams, MlpParams)
from .features import FEATURE_NAMES, LAYOUT_VERSION, FeatureConfig, extract, prepare

log = logging.getLogger(__name__)

MODEL_TYPES = ("logistic", "random_forest", "gbt", "mlp_features", "mlp_spectrogram")


@dataclass
class RunConfig:
    seed: int = 0
    sample_rate: int = 22050
    n_fft: int = 2048
    hop: int = 512
    n_mels_spec: int = 96
    n_mfcc: int = 20
    pre_emphasis: bool = True
    pre_emphasis_alpha: float = 0.97
    rolloff_threshold: float = 0.85
    image_size: int = 216
    train_fraction: float = 0.90
    val_fraction: float = 0.05
    test_fraction: float = 0.05
    stratify: bool = False
    lr_iterations: int = 500
    lr_step: float = 0.1
    lr_l2: float = 1e-3
    rf_trees: int = 200
    rf_max_depth: int = 20
    gbt_rounds: int = 100
    gbt_learning_rate: float = 0.1
    gbt_max_depth: int = 3
    mlp_epochs: int = 10
    mlp_batch_size: int = 32
    mlp_learning_rate: float = 1e-3
    mlp_dropout: float = 0.3
    mlp_l2: float = 1e-3

    @property
    def fractions(self) -> tuple[float, float, float]:
        return (self.train_fraction, self.val_fraction, self.test_fraction)

    def feature_config(self) -> FeatureConfig:
        return FeatureConfig(sample_rate=self.sample_rate, frame_length=self.n_fft,
                             hop_length=self.hop, n_mels_tempo=self.n_mels_spec,
                             n_mfcc=self.n_mfcc, pre_emphasis=self.pre_emphasis,
                             pre_emphasis_alpha=self.pre_emphasis_alpha,
                             rolloff_threshold=self.rolloff_threshold)

    def logistic_params(self) -> LogisticParams:
        return LogisticParams(self.lr_iterations, self.lr_step, self.lr_l2)

    def forest_params(self) -> ForestParams:
        return ForestParams(n_trees=self.rf_trees, max_depth=self.rf_max_depth, seed=self.seed)

    def gbt_params(self) -> GbtParams:
        return GbtParams(rounds=self.gbt_rounds, learning_rate=self.gbt_learning_rate,
                         max_depth=self.gbt_max_depth)

    def mlp_params(self) -> MlpParams:
        return MlpParams(dropout=self.mlp_dropout, l2=self.mlp_l2,
                         learning_rate=self.mlp_learning_rate, epochs=self.mlp_epochs,
                         batch_size=self.mlp_batch_size, seed=self.seed)

    def to_dict(self) -> dict:
        return asdict(self)

    def with_overrides(self, overrides: dict) -> "RunConfig":
        known = {f.name: f.type for f in fields(self)}
        values = self.to_dict()
        for key, raw in overrides.items():
            if raw is None:
                continue
            key = key.replace("-", "_")
            if key not in known:
                raise ValueError(f"unknown config key {key!r}")
            values[key] = _coerce(raw, type(values[key]))
        return RunConfig(**values)


def _coerce(raw, kind):
    if not isinstance(raw, str):
        return kind(raw)
    if kind is bool:
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    return kind(raw.strip())


def read_config_file(path) -> dict:
    """``key = value`` lines; blank lines and ``#`` comments ignored."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


# ---------------------------------------------------------------------------
# Manifest and feature CSV
# ---------------------------------------------------------------------------

def read_manifest(path, class_names=GENRES) -> list[tuple[Path, str]]:
    path = Path(path)
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["path", "label"]:
            raise ValueError(f"{path}: manifest header must be 'path,label'")
        for row in reader:
            if row["label"] not in class_names:
                raise ValueError(f"{path}: unknown label {row['label']!r}")
            p = Path(row["path"])
            rows.append((p if p.is_absolute() else path.parent / p, row["label"]))
    return rows


def write_manifest(path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["path", "label"])
        for p, label in rows:
            w.writerow([str(p), label])


def write_features_csv(path, vectors, labels) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*FEATURE_NAMES, "label"])
        for vec, label in zip(vectors, labels):
            w.writerow([repr(float(v)) for v in vec] + [label])


def read_features_csv(path, class_names=GENRES) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header[:-1]) != FEATURE_NAMES or header[-1] != "label":
            raise ValueError(f"{path}: header does not match feature layout {LAYOUT_VERSION}")
        X, y = [], []
        for row in reader:
            X.append([float(v) for v in row[:-1]])
            y.append(list(class_names).index(row[-1]))
    return Dataset(np.array(X).reshape(-1, len(FEATURE_NAMES)), np.array(y, dtype=np.int64),
                   class_names, FEATURE_NAMES)


# ---------------------------------------------------------------------------
# Batch work
# ---------------------------------------------------------------------------

def _extract_one(args):
    path, config = args
    try:
        return extract(read_wav(path), config), None
    except Exception as exc:  # row-level failure is reported, not fatal
        return None, f"{path}: {exc}"


def default_jobs() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def extract_manifest(rows, config: FeatureConfig, jobs: int = 1):
    """Feature vectors in manifest order; failed rows yield ``None`` plus an error string."""
    tasks = [(p, config) for p, _ in rows]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_extract_one, tasks, chunksize=4))
    else:
        results = [_extract_one(t) for t in tasks]
    return results


def spectrogram_image_for(clip, config: RunConfig) -> np.ndarray:
    clip = prepare(clip, config.feature_config())
    return dsp.spectrogram_image(clip, dsp.StftParams(config.n_fft, config.hop),
                                 config.n_mels_spec, config.image_size)


def spectrogram_dataset(rows, config: RunConfig, class_names=GENRES) -> Dataset:
    images = [spectrogram_image_for(read_wav(p), config).ravel() for p, _ in rows]
    labels = [list(class_names).index(label) for _, label in rows]
    return Dataset(np.array(images), np.array(labels), class_names)


def spectrogram_layout(config: RunConfig) -> str:
    return f"mel-image-{config.image_size}x{config.image_size}-v1"
