"""Audio ingestion: WAV codec, resampling, pre-emphasis, framing and synthetic clips."""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field
from typing import Any

import numpy as np

PCM = 1
IEEE_FLOAT = 3
EXTENSIBLE = 0xFFFE


class WavFormatError(ValueError):
    """Malformed RIFF/WAVE data."""


class UnsupportedFormatError(WavFormatError):
    """Well-formed WAV using a codec or sample width this reader does not handle."""


class EmptyOutputError(ValueError):
    """Input too short to produce a single analysis frame."""


@dataclass(frozen=True)
class AudioClip:
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError("AudioClip samples must be one-dimensional")
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("AudioClip samples must be finite")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class FrameParams:
    frame_length: int = 2048
    hop_length: int = 512

    def __post_init__(self):
        if not 0 < self.hop_length <= self.frame_length:
            raise ValueError("need 0 < hop_length <= frame_length")


# ---------------------------------------------------------------------------
# WAV codec
# ---------------------------------------------------------------------------

def _chunks(data: bytes):
    pos = 12
    while pos + 8 <= len(data):
        cid, size = struct.unpack("<4sI", data[pos:pos + 8])
        body = data[pos + 8:pos + 8 + size]
        if len(body) < size:
            raise WavFormatError(f"chunk {cid!r} truncated")
        yield cid, body
        pos += 8 + size + (size & 1)


def decode_wav(data: bytes) -> AudioClip:
    """Decode a RIFF/WAVE byte string into a mono clip.

    Supports PCM 16/24-bit integers and 32-bit IEEE float, one or two
    channels. Integer samples are divided by ``2**(bits-1)``; stereo is
    averaged to mono.
    """
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise WavFormatError("not a RIFF/WAVE stream")
    fmt = None
    pcm = None
    for cid, body in _chunks(data):
        if cid == b"fmt ":
            if len(body) < 16:
                raise WavFormatError("fmt chunk too short")
            fmt = body
        elif cid == b"data":
            pcm = body
    if fmt is None or pcm is None:
        raise WavFormatError("missing fmt or data chunk")

    tag, channels, rate, _, block_align, bits = struct.unpack("<HHIIHH", fmt[:16])
    if tag == EXTENSIBLE:
        if len(fmt) < 40:
            raise WavFormatError("extensible fmt chunk too short")
        tag = struct.unpack("<H", fmt[24:26])[0]
    if tag not in (PCM, IEEE_FLOAT):
        raise UnsupportedFormatError(f"unsupported WAV codec tag 0x{tag:04x}")
    if channels not in (1, 2):
        raise UnsupportedFormatError(f"unsupported channel count {channels}")
    if rate == 0:
        raise WavFormatError("sample rate is zero")
    if (tag, bits) not in ((PCM, 16), (PCM, 24), (IEEE_FLOAT, 32)):
        raise UnsupportedFormatError(f"unsupported sample format tag={tag} bits={bits}")
    width = bits // 8
    if block_align != width * channels:
        raise WavFormatError("block_align inconsistent with channels and bit depth")

    n = len(pcm) // block_align
    raw = pcm[:n * block_align]
    if tag == IEEE_FLOAT:
        x = np.frombuffer(raw, dtype="<f4").astype(np.float64)
    elif bits == 16:
        x = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    else:
        b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        v = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        v = np.where(v >= 1 << 23, v - (1 << 24), v)
        x = v.astype(np.float64) / float(1 << 23)
    x = x.reshape(n, channels).mean(axis=1)
    if not np.all(np.isfinite(x)):
        raise WavFormatError("non-finite float samples")
    return AudioClip(x, rate)


def encode_wav(clip: AudioClip, bits: int = 16, float_format: bool = False) -> bytes:
    """Encode a clip as mono WAV; integers use ``round(x * 2**(bits-1))`` with clipping."""
    x = clip.samples
    if float_format:
        tag, bits = IEEE_FLOAT, 32
        payload = x.astype("<f4").tobytes()
    elif bits in (16, 24):
        tag = PCM
        full = 1 << (bits - 1)
        q = np.clip(np.rint(x * full), -full, full - 1).astype(np.int64)
        if bits == 16:
            payload = q.astype("<i2").tobytes()
        else:
            u = q & 0xFFFFFF
            payload = np.stack([u & 0xFF, (u >> 8) & 0xFF, (u >> 16) & 0xFF], axis=1).astype(np.uint8).tobytes()
    else:
        raise UnsupportedFormatError(f"cannot encode {bits}-bit integer PCM")
    width = bits // 8
    buf = io.BytesIO()
    buf.write(b"RIFF")
    buf.write(struct.pack("<I", 36 + len(payload) + (len(payload) & 1)))
    buf.write(b"WAVE")
    buf.write(b"fmt ")
    buf.write(struct.pack("<IHHIIHH", 16, tag, 1, clip.sample_rate,
                          clip.sample_rate * width, width, bits))
    buf.write(b"data")
    buf.write(struct.pack("<I", len(payload)))
    buf.write(payload)
    if len(payload) & 1:
        buf.write(b"\x00")
    return buf.getvalue()


def read_wav(path) -> AudioClip:
    with open(path, "rb") as fh:
        return decode_wav(fh.read())


def write_wav(path, clip: AudioClip, bits: int = 16) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_wav(clip, bits=bits))


# ---------------------------------------------------------------------------
# Signal conditioning
# ---------------------------------------------------------------------------

KAISER_BETA = 8.6
TAPS_PER_SIDE = 16


def _kaiser(u, half_width, beta=KAISER_BETA):
    r = np.clip(u / half_width, -1.0, 1.0)
    w = np.i0(beta * np.sqrt(1.0 - r * r)) / np.i0(beta)
    return np.where(np.abs(u) <= half_width, w, 0.0)


def resample(clip: AudioClip, target_sr: int, block: int = 8192) -> AudioClip:
    """Band-limited resampling with a Kaiser-windowed sinc kernel.

    The kernel spans ``TAPS_PER_SIDE`` periods of the lower of the two rates
    on each side. Weights for each output sample are renormalized to unit sum,
    so a constant input stays constant, edges included.
    """
    if target_sr <= 0:
        raise ValueError("target_sr must be positive")
    src_sr = clip.sample_rate
    if target_sr == src_sr:
        return clip
    x = clip.samples
    n_in = len(x)
    n_out = int(round(n_in * target_sr / src_sr))
    if n_out == 0:
        raise EmptyOutputError("resampled clip would be empty")
    ratio = src_sr / target_sr
    cutoff = min(1.0, target_sr / src_sr)
    half_width = TAPS_PER_SIDE / cutoff
    reach = int(np.ceil(half_width))
    offsets = np.arange(-reach + 1, reach + 1)

    out = np.empty(n_out)
    for start in range(0, n_out, block):
        j = np.arange(start, min(start + block, n_out))
        t = j * ratio
        base = np.floor(t).astype(np.int64)
        idx = base[:, None] + offsets[None, :]
        u = t[:, None] - idx
        h = cutoff * np.sinc(cutoff * u) * _kaiser(u, half_width)
        valid = (idx >= 0) & (idx < n_in)
        h = np.where(valid, h, 0.0)
        vals = x[np.clip(idx, 0, n_in - 1)]
        norm = h.sum(axis=1)
        norm[np.abs(norm) < 1e-12] = 1.0
        out[j] = (h * vals).sum(axis=1) / norm
    return AudioClip(out, target_sr)


def pre_emphasis(clip: AudioClip, alpha: float = 0.97) -> AudioClip:
    """First-order high-frequency boost ``y[t] = x[t] - alpha*x[t-1]``, with ``y[0] = x[0]``."""
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    x = clip.samples
    if alpha == 0.0:
        return AudioClip(x.copy(), clip.sample_rate)
    y = np.empty_like(x)
    y[:1] = x[:1]
    y[1:] = x[1:] - alpha * x[:-1]
    return AudioClip(y, clip.sample_rate)


def frame_count(n: int, frame_length: int, hop_length: int) -> int:
    if n < frame_length:
        return 0
    return 1 + (n - frame_length) // hop_length


def frame_signal(clip_or_samples, params: FrameParams = FrameParams()) -> np.ndarray:
    """Slice into overlapping frames (n_frames, frame_length); no padding, tail dropped."""
    x = clip_or_samples.samples if isinstance(clip_or_samples, AudioClip) else np.asarray(clip_or_samples, dtype=np.float64)
    n_frames = frame_count(len(x), params.frame_length, params.hop_length)
    if n_frames == 0:
        raise EmptyOutputError(
            f"signal of {len(x)} samples is shorter than one frame ({params.frame_length})")
    windows = np.lib.stride_tricks.sliding_window_view(x, params.frame_length)
    return windows[::params.hop_length][:n_frames]


# ---------------------------------------------------------------------------
# Synthetic clips
# ---------------------------------------------------------------------------

SYNTH_KINDS = ("sine", "click_train", "noise", "chirp", "silence", "mixture")


@dataclass
class SynthSpec:
    """Recipe for a deterministic synthetic clip.

    ``params`` per kind:

    - sine: frequency, amplitude, phase
    - click_train: bpm, amplitude, offset (seconds)
    - noise: amplitude, low, high (optional pass band in Hz)
    - chirp: f0, f1, amplitude
    - silence: (none)
    - mixture: components, a list of ``SynthSpec`` or dicts
    All kinds take ``duration`` in seconds.
    """

    kind: str
    params: dict[str, Any] = field(default_factory=dict)
    seed: int = 0

    def to_dict(self) -> dict:
        params = dict(self.params)
        if "components" in params:
            params["components"] = [c.to_dict() if isinstance(c, SynthSpec) else c
                                    for c in params["components"]]
        return {"kind": self.kind, "params": params, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "SynthSpec":
        return cls(d["kind"], dict(d.get("params", {})), int(d.get("seed", 0)))


def synthesize(spec: SynthSpec | dict, sample_rate: int = 22050) -> AudioClip:
    if isinstance(spec, dict):
        spec = SynthSpec.from_dict(spec)
    p = spec.params
    if spec.kind not in SYNTH_KINDS:
        raise ValueError(f"unknown synth kind {spec.kind!r}")
    duration = float(p.get("duration", 1.0))
    if duration <= 0:
        raise ValueError("duration must be positive")
    n = int(round(duration * sample_rate))
    nyquist = sample_rate / 2
    t = np.arange(n) / sample_rate
    amp = float(p.get("amplitude", 1.0))
    rng = np.random.default_rng(spec.seed)

    if spec.kind == "silence":
        x = np.zeros(n)
    elif spec.kind == "sine":
        f = float(p["frequency"])
        if not 0 < f < nyquist:
            raise ValueError(f"frequency {f} Hz outside (0, Nyquist={nyquist})")
        x = amp * np.sin(2 * np.pi * f * t + float(p.get("phase", 0.0)))
    elif spec.kind == "click_train":
        bpm = float(p["bpm"])
        if bpm <= 0:
            raise ValueError("bpm must be positive")
        period = 60.0 / bpm
        offset = float(p.get("offset", 0.0))
        times = np.arange(offset, duration, period)
        idx = np.rint(times * sample_rate).astype(np.int64)
        x = np.zeros(n)
        x[idx[idx < n]] = amp
    elif spec.kind == "chirp":
        f0, f1 = float(p["f0"]), float(p["f1"])
        if not (0 < f0 < nyquist and 0 < f1 < nyquist):
            raise ValueError("chirp frequencies must lie in (0, Nyquist)")
        phase = 2 * np.pi * (f0 * t + (f1 - f0) * t * t / (2 * duration))
        x = amp * np.sin(phase)
    elif spec.kind == "noise":
        x = rng.standard_normal(n)
        low, high = p.get("low"), p.get("high")
        if low is not None or high is not None:
            low = float(low or 0.0)
            high = float(high if high is not None else nyquist)
            if not 0 <= low < high <= nyquist:
                raise ValueError("noise band must satisfy 0 <= low < high <= Nyquist")
            spec_x = np.fft.rfft(x)
            freqs = np.fft.rfftfreq(n, 1.0 / sample_rate)
            spec_x[(freqs < low) | (freqs > high)] = 0.0
            x = np.fft.irfft(spec_x, n)
        peak = np.max(np.abs(x)) if n else 0.0
        x = amp * x / peak if peak > 0 else x
    else:
        x = np.zeros(n)
        for comp in p.get("components", []):
            if isinstance(comp, dict):
                comp = SynthSpec.from_dict(comp)
            cp = dict(comp.params)
            cp["duration"] = duration
            sub = synthesize(SynthSpec(comp.kind, cp, comp.seed), sample_rate)
            x += sub.samples
    return AudioClip(x, sample_rate)
