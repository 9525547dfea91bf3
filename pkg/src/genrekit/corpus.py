"""Labelled synthetic corpus standing in for a real genre dataset.

Each of the seven classes has its own spectral signature (tone register,
noise band, chirp sweep, click-train texture). Per-clip jitter on pitch,
tempo, level and background noise keeps the classes from being trivially
identical while staying separable by frequency-domain features.
"""

from __future__ import annotations

import numpy as np

from .audio_io import SynthSpec
from .classifiers.common import GENRES


def _jitter(rng, value, rel):
    return float(value * (1.0 + rel * (2.0 * rng.random() - 1.0)))


def class_recipe(label: int, rng: np.random.Generator, duration: float) -> SynthSpec:
    amp = float(rng.uniform(0.3, 0.8))
    noise = {"kind": "noise", "params": {"amplitude": float(rng.uniform(0.01, 0.03))},
             "seed": int(rng.integers(2 ** 31))}
    phase = float(rng.uniform(0, 2 * np.pi))
    if label == 0:    # Pop: mid-low pure tone
        parts = [{"kind": "sine", "params": {"frequency": _jitter(rng, 330, 0.04), "amplitude": amp, "phase": phase}}]
    elif label == 1:  # Rock: band-limited noise
        parts = [{"kind": "noise", "params": {"amplitude": amp, "low": _jitter(rng, 1500, 0.05),
                                              "high": _jitter(rng, 3000, 0.05)},
                  "seed": int(rng.integers(2 ** 31))}]
    elif label == 2:  # Hip Hop: slow clicks over a bass tone
        parts = [{"kind": "click_train", "params": {"bpm": _jitter(rng, 90, 0.03), "amplitude": amp,
                                                    "offset": float(rng.uniform(0, 0.3))}},
                 {"kind": "sine", "params": {"frequency": _jitter(rng, 110, 0.04), "amplitude": 0.5 * amp, "phase": phase}}]
    elif label == 3:  # Techno: fast clicks over high noise
        parts = [{"kind": "click_train", "params": {"bpm": _jitter(rng, 140, 0.03), "amplitude": amp,
                                                    "offset": float(rng.uniform(0, 0.3))}},
                 {"kind": "noise", "params": {"amplitude": 0.3 * amp, "low": 5000.0, "high": 8000.0},
                  "seed": int(rng.integers(2 ** 31))}]
    elif label == 4:  # Rhythm Blues: rising chirp
        parts = [{"kind": "chirp", "params": {"f0": _jitter(rng, 500, 0.05), "f1": _jitter(rng, 2000, 0.05),
                                              "amplitude": amp}}]
    elif label == 5:  # Vocal: high pure tone
        parts = [{"kind": "sine", "params": {"frequency": _jitter(rng, 1760, 0.04), "amplitude": amp, "phase": phase}}]
    elif label == 6:  # Reggae: mid tone with offbeat clicks
        parts = [{"kind": "sine", "params": {"frequency": _jitter(rng, 660, 0.04), "amplitude": amp, "phase": phase}},
                 {"kind": "click_train", "params": {"bpm": _jitter(rng, 75, 0.03), "amplitude": 0.8 * amp,
                                                    "offset": float(rng.uniform(0, 0.3))}}]
    else:
        raise ValueError(f"no recipe for class {label}")
    return SynthSpec("mixture", {"duration": duration, "components": parts + [noise]}, 0)


def corpus_specs(seed: int = 0, clips_per_class: int = 30, duration: float = 10.0,
                 class_names=GENRES) -> list[tuple[str, SynthSpec]]:
    """(label name, spec) pairs, class-major order; deterministic per seed."""
    out = []
    for label, name in enumerate(class_names):
        for i in range(clips_per_class):
            rng = np.random.default_rng([seed, label, i])
            out.append((name, class_recipe(label % 7, rng, duration)))
    return out
