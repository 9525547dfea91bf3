"""Hand-crafted time- and frequency-domain clip features.

Every frame-level feature shares one framing (2048-sample frames, hop 512,
no padding) and is summarised by its mean and population standard deviation
across frames. :func:`extract` assembles them into a fixed 93-entry vector;
see :data:`FEATURE_NAMES` for the layout.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import dsp
from .audio_io import AudioClip, FrameParams, frame_signal, pre_emphasis, resample

LAYOUT_VERSION = "genrekit-features-v1"

N_MFCC = 20
N_CHROMA = 12
DEFAULT_CONTRAST_EDGES = (0.0, 200.0, 400.0, 800.0, 1600.0, 3200.0, 6400.0)


def _layout() -> list[str]:
    names = ["amp_mean", "amp_std", "amp_skew", "amp_kurt",
             "zcr_mean", "zcr_std", "rmse_mean", "rmse_std", "tempo_bpm"]
    names += [f"mfcc_mean_{i}" for i in range(N_MFCC)]
    names += [f"mfcc_std_{i}" for i in range(N_MFCC)]
    names += [f"chroma_mean_{i}" for i in range(N_CHROMA)]
    names += [f"chroma_std_{i}" for i in range(N_CHROMA)]
    names += ["centroid_mean", "centroid_std", "bandwidth_mean", "bandwidth_std"]
    names += [f"contrast_mean_{i}" for i in range(7)]
    names += [f"contrast_std_{i}" for i in range(7)]
    names += ["rolloff_mean", "rolloff_std"]
    return names


FEATURE_NAMES: tuple[str, ...] = tuple(_layout())
FEATURE_INDEX = {name: i for i, name in enumerate(FEATURE_NAMES)}
TIME_DOMAIN = tuple(range(0, 9))
FREQUENCY_DOMAIN = tuple(range(9, len(FEATURE_NAMES)))
PITCH_CLASSES = ("C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B")


@dataclass(frozen=True)
class FeatureConfig:
    sample_rate: int = 22050
    frame_length: int = 2048
    hop_length: int = 512
    n_mels_tempo: int = 96
    n_mfcc: int = N_MFCC
    pre_emphasis: bool = True
    pre_emphasis_alpha: float = 0.97
    rolloff_threshold: float = 0.85
    contrast_edges: tuple = DEFAULT_CONTRAST_EDGES
    tempo_min_bpm: float = 30.0
    tempo_max_bpm: float = 300.0
    tempo_prior_bpm: float = 120.0

    @property
    def frame_params(self) -> FrameParams:
        return FrameParams(self.frame_length, self.hop_length)

    @property
    def stft_params(self) -> dsp.StftParams:
        return dsp.StftParams(self.frame_length, self.hop_length)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["contrast_edges"] = list(self.contrast_edges)
        return d


# ---------------------------------------------------------------------------
# Time domain
# ---------------------------------------------------------------------------

def central_moments(clip: AudioClip) -> tuple[float, float, float, float]:
    """Mean, population std, skewness and excess kurtosis of the amplitudes."""
    x = clip.samples
    if len(x) == 0:
        raise ValueError("empty clip")
    mean = float(x.mean())
    d = x - mean
    var = float(np.mean(d * d))
    std = float(np.sqrt(var))
    if std < 1e-12:
        return mean, std, 0.0, 0.0
    skew = float(np.mean(d ** 3)) / std ** 3
    kurt = float(np.mean(d ** 4)) / var ** 2 - 3.0
    return mean, std, skew, kurt


def zero_crossing_rate(clip: AudioClip, params: FrameParams = FrameParams()) -> np.ndarray:
    # zero counts as positive
    frames = frame_signal(clip, params)
    positive = frames >= 0
    crossings = np.count_nonzero(positive[:, 1:] != positive[:, :-1], axis=1)
    return crossings / params.frame_length


def rmse(clip: AudioClip, params: FrameParams = FrameParams()) -> np.ndarray:
    frames = frame_signal(clip, params)
    return np.sqrt(np.mean(frames * frames, axis=1))


def onset_envelope(mel_db: np.ndarray) -> np.ndarray:
    """Half-wave rectified dB flux summed over Mel bands; one value per frame transition."""
    diff = np.diff(mel_db, axis=0)
    return np.maximum(diff, 0.0).sum(axis=1)


def tempo(clip: AudioClip, config: FeatureConfig = FeatureConfig(),
          power: dsp.Spectrogram | None = None) -> float:
    """Global tempo in BPM from the autocorrelation of the onset envelope.

    Candidate periods are integer frame lags within the configured BPM range,
    each weighted by a log-normal prior centred on ``tempo_prior_bpm`` (one
    octave standard deviation). The winning lag is refined to sub-frame
    precision with a parabola through the weighted scores of its neighbours.
    Returns 0 when the envelope carries no onsets.
    """
    if power is None:
        power = dsp.power_spectrogram(dsp.stft(clip, config.stft_params))
    fb = dsp.mel_filterbank(clip.sample_rate, config.frame_length, config.n_mels_tempo)
    mel = dsp.apply_filterbank(power, fb)
    if mel.n_frames < 2:
        raise ValueError("tempo needs at least two frames")
    env = onset_envelope(dsp.power_to_db(mel).values)
    if not np.any(env > 0):
        return 0.0
    n = len(env)
    ac = np.correlate(env, env, mode="full")[n - 1:]

    frame_rate = clip.sample_rate / config.hop_length
    lags = np.arange(1, n)
    bpm = 60.0 * frame_rate / lags
    weight = np.exp(-0.5 * np.log2(bpm / config.tempo_prior_bpm) ** 2)
    score = np.where((bpm >= config.tempo_min_bpm) & (bpm <= config.tempo_max_bpm),
                     ac[1:] * weight, -np.inf)
    if not np.any(np.isfinite(score)):
        return 0.0
    i = int(np.argmax(score))
    lag = float(lags[i])
    if 0 < i < len(score) - 1 and np.isfinite(score[i - 1]) and np.isfinite(score[i + 1]):
        left, mid, right = score[i - 1], score[i], score[i + 1]
        denom = left - 2.0 * mid + right
        if denom < 0:
            lag += 0.5 * (left - right) / denom
    return float(60.0 * frame_rate / lag)


# ---------------------------------------------------------------------------
# Frequency domain
# ---------------------------------------------------------------------------

def mfcc(clip: AudioClip, config: FeatureConfig = FeatureConfig(),
         power: dsp.Spectrogram | None = None) -> np.ndarray:
    """(frames, n_mfcc) cepstra: power -> Mel(n_mfcc bands) -> ln(E + 1e-10) -> DCT-II."""
    if power is None:
        power = dsp.power_spectrogram(dsp.stft(clip, config.stft_params))
    fb = dsp.mel_filterbank(clip.sample_rate, config.frame_length, config.n_mfcc)
    energies = power.values @ fb.weights.T
    return dsp.dct_ii(np.log(energies + 1e-10), config.n_mfcc)


def chroma(spec: dsp.Spectrogram, f_max: float | None = None) -> np.ndarray:
    """(frames, 12) raw pitch-class energy; class 0 is C, A4 = 440 Hz."""
    freqs = spec.bin_frequencies
    if f_max is None:
        f_max = spec.sample_rate / 2.0
    keep = (freqs > 20.0) & (freqs <= f_max)
    classes = np.mod(np.rint(12.0 * np.log2(freqs[keep] / 440.0) + 69.0).astype(np.int64), 12)
    assign = np.zeros((keep.sum(), N_CHROMA))
    assign[np.arange(len(classes)), classes] = 1.0
    return spec.values[:, keep] @ assign


def _weights_total(values):
    total = values.sum(axis=1)
    return total, total >= 1e-12


def spectral_centroid(spec: dsp.Spectrogram) -> np.ndarray:
    s = spec.values
    total, live = _weights_total(s)
    num = s @ spec.bin_frequencies
    return np.where(live, num / np.where(live, total, 1.0), 0.0)


def spectral_bandwidth(spec: dsp.Spectrogram, p: float = 2.0) -> np.ndarray:
    s = spec.values
    total, live = _weights_total(s)
    centroid = spectral_centroid(spec)
    dev = np.abs(spec.bin_frequencies[None, :] - centroid[:, None]) ** p
    moment = (s * dev).sum(axis=1) / np.where(live, total, 1.0)
    return np.where(live, moment ** (1.0 / p), 0.0)


def contrast_edges(sample_rate: int, edges=DEFAULT_CONTRAST_EDGES) -> np.ndarray:
    e = np.array(list(edges) + [sample_rate / 2.0], dtype=np.float64)
    if np.any(np.diff(e) <= 0):
        raise ValueError("contrast band edges must be strictly increasing and below sr/2")
    return e


def spectral_contrast(spec: dsp.Spectrogram, edges=None) -> np.ndarray:
    """(frames, bands) max-minus-min magnitude within each [lo, hi) band."""
    if edges is None:
        edges = contrast_edges(spec.sample_rate)
    edges = np.asarray(edges, dtype=np.float64)
    freqs = spec.bin_frequencies
    out = np.zeros((spec.n_frames, len(edges) - 1))
    for b in range(len(edges) - 1):
        sel = (freqs >= edges[b]) & (freqs < edges[b + 1])
        if sel.any():
            band = spec.values[:, sel]
            out[:, b] = band.max(axis=1) - band.min(axis=1)
    return out


def spectral_rolloff(spec: dsp.Spectrogram, threshold: float = 0.85) -> np.ndarray:
    if not 0.0 < threshold <= 1.0:
        raise ValueError(f"rolloff threshold must lie in (0, 1], got {threshold}")
    s = spec.values
    total, live = _weights_total(s)
    cumulative = np.cumsum(s, axis=1)
    reached = cumulative >= threshold * total[:, None]
    first = np.argmax(reached, axis=1)
    return np.where(live, spec.bin_frequencies[first], 0.0)


def aggregate(series) -> tuple[float, float]:
    x = np.asarray(series, dtype=np.float64)
    if x.size == 0:
        raise ValueError("cannot aggregate an empty series")
    mean = x.mean(axis=0)
    std = np.sqrt(np.mean((x - mean) ** 2, axis=0))
    # summation rounding must not give a constant series a nonzero spread
    constant = np.all(x == x[0], axis=0)
    return np.where(constant, x[0], mean)[()], np.where(constant, 0.0, std)[()]


# ---------------------------------------------------------------------------
# Full vector
# ---------------------------------------------------------------------------

def prepare(clip: AudioClip, config: FeatureConfig = FeatureConfig()) -> AudioClip:
    """Resample to the analysis rate and apply pre-emphasis when enabled."""
    clip = resample(clip, config.sample_rate)
    if config.pre_emphasis:
        clip = pre_emphasis(clip, config.pre_emphasis_alpha)
    return clip


def extract(clip: AudioClip, config: FeatureConfig = FeatureConfig()) -> np.ndarray:
    clip = prepare(clip, config)
    fp = config.frame_params
    power = dsp.power_spectrogram(dsp.stft(clip, config.stft_params))
    magnitude = dsp.magnitude_spectrogram(power)

    parts = [np.array(central_moments(clip))]
    for series in (zero_crossing_rate(clip, fp), rmse(clip, fp)):
        parts.append(np.array(aggregate(series)))
    parts.append(np.array([tempo(clip, config, power)]))
    for matrix in (mfcc(clip, config, power), chroma(power)):
        mean, std = aggregate(matrix)
        parts += [mean, std]
    for series in (spectral_centroid(power), spectral_bandwidth(power)):
        parts.append(np.array(aggregate(series)))
    mean, std = aggregate(spectral_contrast(magnitude, contrast_edges(clip.sample_rate, config.contrast_edges)))
    parts += [mean, std]
    parts.append(np.array(aggregate(spectral_rolloff(power, config.rolloff_threshold))))
    vec = np.concatenate(parts).astype(np.float64)
    if vec.shape != (len(FEATURE_NAMES),):
        raise RuntimeError(f"feature vector has {vec.size} entries, layout expects {len(FEATURE_NAMES)}")
    return vec
