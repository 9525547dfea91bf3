"""genrekit command line: synth, extract, spectrogram, train, evaluate, importance, ablate, domains."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import evaluation as ev
from .audio_io import SynthSpec, read_wav, synthesize, write_wav
from .classifiers import (GENRES, GbtModel, feature_importance, train_gbt, train_logistic_ovr,
                          train_mlp, train_random_forest)
from .classifiers.serialize import (LayoutMismatchError, model_from_document, read_document,
                                    save_model)
from .corpus import corpus_specs
from .dsp import to_pgm
from .features import FEATURE_NAMES, LAYOUT_VERSION
from .pipeline import (MODEL_TYPES, RunConfig, default_jobs, extract_manifest, read_config_file,
                       read_features_csv, read_manifest, spectrogram_dataset, spectrogram_image_for,
                       spectrogram_layout, write_features_csv, write_manifest)

log = logging.getLogger("genrekit")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

CONFIG_FLAGS = {
    "seed": int, "sample_rate": int, "n_fft": int, "hop": int, "n_mels_spec": int, "n_mfcc": int,
    "pre_emphasis_alpha": float, "rolloff_threshold": float, "image_size": int,
}


def build_config(args) -> RunConfig:
    config = RunConfig()
    if getattr(args, "config", None):
        config = config.with_overrides(read_config_file(args.config))
    if getattr(args, "no_pre_emphasis", False):
        config = config.with_overrides({"pre_emphasis": False})
    flags = {k: getattr(args, k, None) for k in CONFIG_FLAGS}
    return config.with_overrides(flags)


def split_datasets(ds, config: RunConfig):
    sp = ev.split(len(ds), config.seed, config.fractions, ds.y, config.stratify)
    log.info("split sizes: train=%d validation=%d test=%d", *sp.sizes())
    return sp, ds.subset(sp.train), ds.subset(sp.validation), ds.subset(sp.test)


def run_metadata(config: RunConfig, n_examples: int, sp) -> dict:
    return {"config": config.to_dict(), "seed": config.seed, "n_examples": n_examples,
            "split_sizes": dict(zip(("train", "validation", "test"), sp.sizes()))}


def load_inputs(model_type: str, config: RunConfig, features=None, manifest=None):
    if model_type == "mlp_spectrogram":
        if manifest is None:
            raise UsageError("mlp_spectrogram needs --manifest")
        return spectrogram_dataset(read_manifest(manifest), config), spectrogram_layout(config)
    if features is None:
        raise UsageError(f"{model_type} needs --features")
    return read_features_csv(features), LAYOUT_VERSION


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_synth(args) -> int:
    config = build_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.spec_file:
        with open(args.spec_file, encoding="utf-8") as fh:
            entries = json.load(fh)
        specs = [(e["label"], SynthSpec.from_dict(e["spec"])) for e in entries]
    else:
        specs = corpus_specs(config.seed, args.clips_per_class, args.duration)
    rows = []
    counters: dict[str, int] = {}
    for label, spec in specs:
        i = counters.get(label, 0)
        counters[label] = i + 1
        name = f"{ev.safe_name(label)}_{i:04d}.wav"
        clip = synthesize(spec, config.sample_rate)
        try:
            write_wav(out / name, clip)
        except OSError as exc:
            raise OSError(f"cannot write {out / name}: {exc}") from exc
        rows.append((name, label))
    write_manifest(out / "manifest.csv", rows)
    log.info("wrote %d clips and %s", len(rows), out / "manifest.csv")
    return 0


def cmd_extract(args) -> int:
    config = build_config(args)
    rows = read_manifest(args.manifest)
    jobs = args.jobs or default_jobs()
    results = extract_manifest(rows, config.feature_config(), jobs)
    vectors, labels, failed = [], [], 0
    for (path, label), (vec, err) in zip(rows, results):
        if err is not None:
            failed += 1
            print(f"error: {err}", file=sys.stderr)
            continue
        vectors.append(vec)
        labels.append(label)
    write_features_csv(args.out, vectors, labels)
    log.info("extracted %d/%d clips into %s", len(vectors), len(rows), args.out)
    return 1 if failed else 0


def cmd_spectrogram(args) -> int:
    config = build_config(args)
    image = spectrogram_image_for(read_wav(args.wav), config)
    if args.out_pgm:
        Path(args.out_pgm).write_bytes(to_pgm(image))
    if args.out_csv:
        ev.write_rows(args.out_csv, [f"c{j}" for j in range(image.shape[1])], image.tolist())
    return 0


def train_model(model_type: str, train, val, config: RunConfig):
    if model_type == "logistic":
        return train_logistic_ovr(train, val, config.logistic_params())
    if model_type == "random_forest":
        return train_random_forest(train, config.forest_params())
    if model_type == "gbt":
        return train_gbt(train, val, config.gbt_params())
    if model_type in ("mlp_features", "mlp_spectrogram"):
        hp = config.mlp_params()
        if model_type == "mlp_spectrogram":
            hp.standardize = False
        return train_mlp(train, val, hp)
    raise UsageError(f"unknown model type {model_type!r}; choose from {', '.join(MODEL_TYPES)}")


def cmd_train(args) -> int:
    config = build_config(args)
    if args.model not in MODEL_TYPES:
        raise UsageError(f"unknown model type {args.model!r}; choose from {', '.join(MODEL_TYPES)}")
    ds, layout = load_inputs(args.model, config, args.features, args.manifest)
    sp, train, val, _ = split_datasets(ds, config)
    model = train_model(args.model, train, val, config)
    meta = run_metadata(config, len(ds), sp)
    meta["input_kind"] = args.model
    val_report = ev.evaluate(model.predict_proba(val.X), val.y, ds.class_names, "validation")
    meta["validation"] = {"accuracy": val_report.accuracy, "f_score": val_report.f_score,
                          "auc": ev.finite_or_none(val_report.auc)}
    save_model(args.out, model, layout, meta)
    log_path = Path(str(args.out) + ".log.json")
    history = getattr(model, "history", None) or {
        "train_loss": getattr(model, "train_loss", []), "val_loss": getattr(model, "val_loss", [])}
    ev.write_metrics_json(log_path, {"validation": meta["validation"], "split_sizes": meta["split_sizes"],
                                     "history": history})
    log.info("validation accuracy=%.4f f=%.4f auc=%s", val_report.accuracy,
             val_report.f_score, meta["validation"]["auc"])
    return 0


def cmd_evaluate(args) -> int:
    docs = [(Path(p).stem, read_document(p)) for p in args.models]
    configs = [RunConfig().with_overrides(d["metadata"].get("config", {})) for _, d in docs]
    splits = {(c.seed, c.fractions, c.stratify) for c in configs}
    sizes = {d["metadata"].get("n_examples") for _, d in docs}
    if len(splits) != 1 or len(sizes) != 1:
        raise UsageError("models were trained on different splits (seed, fractions or dataset "
                         "size differ); retrain them on one split")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    cache = {}
    labels = sp = None
    member_probs, reports = [], []
    for (name, doc), cfg in zip(docs, configs):
        kind = doc["metadata"].get("input_kind", doc["model_type"])
        layout = spectrogram_layout(cfg) if kind == "mlp_spectrogram" else LAYOUT_VERSION
        try:
            model = model_from_document(doc, layout)
        except LayoutMismatchError as exc:
            raise UsageError(f"{name}: {exc}") from None
        key = layout if kind == "mlp_spectrogram" else "features"
        if key not in cache:
            cache[key] = load_inputs(kind, cfg, args.features, args.manifest)[0]
        ds = cache[key]
        if len(ds) != doc["metadata"].get("n_examples"):
            raise UsageError(f"{name}: trained on {doc['metadata'].get('n_examples')} examples, "
                             f"input has {len(ds)}")
        sp = ev.split(len(ds), cfg.seed, cfg.fractions, ds.y, cfg.stratify)
        test = ds.subset(sp.test)
        if labels is not None and not np.array_equal(labels, test.y):
            raise UsageError(f"{name}: test labels differ from the other models' inputs")
        labels = test.y
        probs = model.predict_proba(test.X)
        member_probs.append(probs)
        reports.append(_emit(out, name, probs, test.y, ds.class_names))
    if len(member_probs) >= 2:
        reports.append(_emit(out, "ensemble", ev.ensemble(member_probs), labels, GENRES))
    payload = {"feature_layout_version": LAYOUT_VERSION, "seed": configs[0].seed,
               "split_sizes": dict(zip(("train", "validation", "test"), sp.sizes())),
               "models": [r.to_dict() for r in reports]}
    ev.write_metrics_json(out / "metrics.json", payload)
    for r in reports:
        print(f"{r.name}\taccuracy={r.accuracy:.4f}\tf_score={r.f_score:.4f}\tauc={r.auc:.4f}")
    return 0


def _emit(out: Path, name: str, probs, labels, class_names):
    report = ev.evaluate(probs, labels, class_names, name)
    d = out / ev.safe_name(name)
    d.mkdir(exist_ok=True)
    ev.write_confusion_csv(d / "confusion.csv", report.confusion, class_names)
    for c, curve in report.roc.curves.items():
        ev.write_roc_csv(d / f"roc_{ev.safe_name(class_names[c])}.csv", curve)
    ev.write_rows(d / "scores.csv", ["label", *[f"p_{ev.safe_name(c)}" for c in class_names]],
                  [[int(y), *map(float, p)] for y, p in zip(labels, probs)])
    return report


def _load_gbt(path) -> GbtModel:
    doc = read_document(path)
    if doc.get("model_type") != "gbt":
        raise UsageError(f"{path}: importance needs a gbt model, got {doc.get('model_type')!r}")
    return model_from_document(doc, LAYOUT_VERSION)


def cmd_importance(args) -> int:
    model = _load_gbt(args.model)
    ranking = feature_importance(model)[: args.top]
    ev.write_rows(args.out, ["rank", "feature", "split_count"],
                  [(i + 1, name, count) for i, (name, count) in enumerate(ranking)])
    return 0


def cmd_ablate(args) -> int:
    config = build_config(args)
    ds = read_features_csv(args.features)
    _, train, val, test = split_datasets(ds, config)
    if args.model:
        model = _load_gbt(args.model)
    else:
        model = train_gbt(train, val, config.gbt_params())
    ranking = [name for name, _ in feature_importance(model)]
    n_values = [int(v) for v in args.n.split(",")] if args.n else [10, 20, 30, len(FEATURE_NAMES)]
    rows = ev.ablate_top_n(train, val, test, ranking, n_values, config.gbt_params())
    ev.write_rows(args.out, ["N", "auc", "accuracy"], rows)
    return 0


def cmd_domains(args) -> int:
    config = build_config(args)
    ds = read_features_csv(args.features)
    _, train, val, test = split_datasets(ds, config)
    rows = ev.domain_comparison(train, val, test, config.gbt_params())
    ev.write_rows(args.out, ["set", "auc", "accuracy"], rows)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file; flags override it")
    common.add_argument("--seed", type=int)
    common.add_argument("--sample-rate", dest="sample_rate", type=int)
    common.add_argument("--n-fft", dest="n_fft", type=int)
    common.add_argument("--hop", type=int)
    common.add_argument("--n-mels", dest="n_mels_spec", type=int)
    common.add_argument("--n-mfcc", dest="n_mfcc", type=int)
    common.add_argument("--pre-emphasis-alpha", dest="pre_emphasis_alpha", type=float)
    common.add_argument("--no-pre-emphasis", action="store_true")
    common.add_argument("--rolloff", dest="rolloff_threshold", type=float)
    common.add_argument("--image-size", dest="image_size", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="genrekit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="write a labelled synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--spec-file", help="JSON list of {label, spec} entries")
    p.add_argument("--clips-per-class", type=int, default=30)
    p.add_argument("--duration", type=float, default=10.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", parents=[common], help="manifest -> features.csv")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=0, help="worker processes (default: all cores)")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("spectrogram", parents=[common], help="WAV -> Mel-dB image (PGM/CSV)")
    p.add_argument("--wav", required=True)
    p.add_argument("--out-pgm")
    p.add_argument("--out-csv")
    p.set_defaults(func=cmd_spectrogram)

    p = sub.add_parser("train", parents=[common], help="train one model on the seeded split")
    p.add_argument("--model", required=True)
    p.add_argument("--features")
    p.add_argument("--manifest")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", parents=[common], help="test-split metrics and ensemble")
    p.add_argument("--models", nargs="+", required=True)
    p.add_argument("--features")
    p.add_argument("--manifest")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("importance", parents=[common], help="GBT split-count ranking")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--top", type=int, default=20)
    p.set_defaults(func=cmd_importance)

    p = sub.add_parser("ablate", parents=[common], help="GBT on top-N features")
    p.add_argument("--features", required=True)
    p.add_argument("--model", help="GBT model providing the ranking (default: train one)")
    p.add_argument("--n", help="comma-separated N values (default 10,20,30,93)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("domains", parents=[common], help="time vs frequency feature sets")
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_domains)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (OSError, ValueError) as exc:
        print(f"genrekit: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
