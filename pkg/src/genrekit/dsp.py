"""Spectral primitives: FFT, STFT, Mel filterbank, dB scaling, DCT and image resize."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .audio_io import AudioClip, EmptyOutputError, FrameParams, frame_signal

AMIN = 1e-10
TOP_DB = 80.0


@dataclass(frozen=True)
class StftParams:
    n_fft: int = 2048
    hop: int = 512

    def __post_init__(self):
        if self.n_fft < 2 or self.n_fft & (self.n_fft - 1):
            raise ValueError(f"n_fft must be a power of two, got {self.n_fft}")
        if not 0 < self.hop <= self.n_fft:
            raise ValueError("hop must satisfy 0 < hop <= n_fft")


@dataclass
class Spectrogram:
    """Frames x bins matrix.

    ``scale`` is one of ``complex``, ``magnitude``, ``power`` or ``db``.
    """

    values: np.ndarray
    bin_frequencies: np.ndarray
    frame_hop: int
    sample_rate: int
    scale: str = "power"

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    @property
    def n_bins(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class MelFilterbank:
    weights: np.ndarray
    center_frequencies: np.ndarray
    f_min: float
    f_max: float

    @property
    def n_mels(self) -> int:
        return self.weights.shape[0]


# ---------------------------------------------------------------------------
# Windows and transforms
# ---------------------------------------------------------------------------

def hann_window(n: int) -> np.ndarray:
    """Symmetric Hann window, zero at both ends."""
    if n < 2:
        raise ValueError("window length must be >= 2")
    i = np.arange(n)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * i / (n - 1))


@lru_cache(maxsize=16)
def _bit_reversal(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    rev.setflags(write=False)
    return rev


@lru_cache(maxsize=64)
def _twiddles(size: int) -> np.ndarray:
    tw = np.exp(-2j * np.pi * np.arange(size // 2) / size)
    tw.setflags(write=False)
    return tw


def fft(x) -> np.ndarray:
    """Iterative radix-2 decimation-in-time FFT along the last axis.

    Leading axes are transformed independently, so a (frames, n) matrix is
    processed in one pass per butterfly stage.
    """
    x = np.asarray(x, dtype=np.complex128)
    n = x.shape[-1]
    if n < 1 or n & (n - 1):
        raise ValueError(f"FFT length must be a power of two, got {n}")
    lead = x.shape[:-1]
    out = x[..., _bit_reversal(n)].reshape(-1, n)
    size = 2
    while size <= n:
        half = size // 2
        blocks = out.reshape(-1, n // size, size)
        even = blocks[..., :half]
        odd = blocks[..., half:] * _twiddles(size)
        out = np.concatenate([even + odd, even - odd], axis=-1).reshape(-1, n)
        size *= 2
    return out.reshape(*lead, n)


def rfft(frames) -> np.ndarray:
    """Non-negative-frequency half spectrum of real rows.

    Rows are packed pairwise into one complex transform (``a + ib``) and
    separated through conjugate symmetry, halving the FFT work.
    """
    frames = np.asarray(frames, dtype=np.float64)
    squeeze = frames.ndim == 1
    frames = np.atleast_2d(frames)
    m, n = frames.shape
    if m % 2:
        frames = np.vstack([frames, np.zeros((1, n))])
    z = fft(frames[0::2] + 1j * frames[1::2])
    zr = np.conj(z[:, (-np.arange(n)) % n])
    a = 0.5 * (z + zr)
    b = -0.5j * (z - zr)
    out = np.empty((frames.shape[0], n // 2 + 1), dtype=np.complex128)
    out[0::2] = a[:, : n // 2 + 1]
    out[1::2] = b[:, : n // 2 + 1]
    out = out[:m]
    return out[0] if squeeze else out


def naive_dft(x) -> np.ndarray:
    """Direct O(N^2) DFT, ``X[k] = sum_n x[n] exp(-2 pi i k n / N)``.

    Test oracle for :func:`fft`. The double sum is evaluated as a product with
    the explicit DFT matrix; ``k*n`` is reduced mod N before the exponential
    to keep the phases exact. Accepts a vector or a stack of rows.
    """
    x = np.asarray(x, dtype=np.complex128)
    n = x.shape[-1]
    kn = np.outer(np.arange(n), np.arange(n)) % n
    basis = np.exp(-2j * np.pi * kn / n)
    return x @ basis.T


def stft(clip: AudioClip, params: StftParams = StftParams()) -> Spectrogram:
    """Hann-windowed STFT without centering; keeps bins 0..n_fft/2."""
    if len(clip) < params.n_fft:
        raise EmptyOutputError(f"clip of {len(clip)} samples is shorter than n_fft={params.n_fft}")
    frames = frame_signal(clip, FrameParams(params.n_fft, params.hop))
    spec = rfft(frames * hann_window(params.n_fft))
    freqs = np.arange(params.n_fft // 2 + 1) * clip.sample_rate / params.n_fft
    return Spectrogram(spec, freqs, params.hop, clip.sample_rate, "complex")


def power_spectrogram(spec: Spectrogram) -> Spectrogram:
    v = spec.values
    power = v.real ** 2 + v.imag ** 2 if np.iscomplexobj(v) else v ** 2
    return Spectrogram(power, spec.bin_frequencies, spec.frame_hop, spec.sample_rate, "power")


def magnitude_spectrogram(spec: Spectrogram) -> Spectrogram:
    if spec.scale == "power":
        mag = np.sqrt(spec.values)
    else:
        mag = np.abs(spec.values)
    return Spectrogram(mag, spec.bin_frequencies, spec.frame_hop, spec.sample_rate, "magnitude")


# ---------------------------------------------------------------------------
# Mel scale
# ---------------------------------------------------------------------------

def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@lru_cache(maxsize=32)
def mel_filterbank(sr: int, n_fft: int, n_mels: int, f_min: float = 0.0,
                   f_max: float | None = None) -> MelFilterbank:
    """HTK-style triangular filterbank, each row rescaled so its sampled peak is 1."""
    if f_max is None:
        f_max = sr / 2.0
    if n_mels < 2:
        raise ValueError("n_mels must be >= 2")
    if not 0.0 <= f_min < f_max <= sr / 2.0:
        raise ValueError(f"need 0 <= f_min < f_max <= sr/2, got {f_min}, {f_max}")
    fft_freqs = np.arange(n_fft // 2 + 1) * sr / n_fft
    points = mel_to_hz(np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), n_mels + 2))
    lower, center, upper = points[:-2, None], points[1:-1, None], points[2:, None]
    rising = (fft_freqs[None, :] - lower) / (center - lower)
    falling = (upper - fft_freqs[None, :]) / (upper - center)
    weights = np.maximum(0.0, np.minimum(rising, falling))
    peaks = weights.max(axis=1)
    if np.any(peaks <= 0):
        empty = int(np.argmin(peaks))
        raise ValueError(
            f"mel filter {empty} covers no FFT bin; reduce n_mels or increase n_fft")
    weights = weights / peaks[:, None]
    weights.setflags(write=False)
    centers = points[1:-1].copy()
    centers.setflags(write=False)
    return MelFilterbank(weights, centers, float(f_min), float(f_max))


def apply_filterbank(power: Spectrogram, fb: MelFilterbank) -> Spectrogram:
    return Spectrogram(power.values @ fb.weights.T, fb.center_frequencies.copy(),
                       power.frame_hop, power.sample_rate, "power")


def mel_spectrogram(clip: AudioClip, params: StftParams = StftParams(),
                    fb: MelFilterbank | None = None, n_mels: int = 96) -> Spectrogram:
    if fb is None:
        fb = mel_filterbank(clip.sample_rate, params.n_fft, n_mels)
    return apply_filterbank(power_spectrogram(stft(clip, params)), fb)


def power_to_db(spec: Spectrogram, amin: float = AMIN, top_db: float = TOP_DB) -> Spectrogram:
    """Decibels relative to the matrix maximum, floored at ``top_db`` below the peak."""
    v = np.asarray(spec.values, dtype=np.float64)
    ref = float(v.max()) if v.size else 0.0
    db = 10.0 * np.log10(np.maximum(v, amin) / max(ref, amin))
    if db.size:
        db = np.maximum(db, db.max() - top_db)
    return Spectrogram(db, spec.bin_frequencies, spec.frame_hop, spec.sample_rate, "db")


@lru_cache(maxsize=16)
def dct_matrix(n: int) -> np.ndarray:
    """Orthonormal DCT-II basis, rows are coefficients."""
    k = np.arange(n)[:, None]
    i = np.arange(n)[None, :]
    basis = np.sqrt(2.0 / n) * np.cos(np.pi * (2 * i + 1) * k / (2 * n))
    basis[0] /= np.sqrt(2.0)
    basis.setflags(write=False)
    return basis


def dct_ii(matrix, n_coeffs: int | None = None) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=np.float64)
    n = matrix.shape[-1]
    if n_coeffs is None:
        n_coeffs = n
    if not 0 < n_coeffs <= n:
        raise ValueError(f"n_coeffs must lie in [1, {n}]")
    return matrix @ dct_matrix(n)[:n_coeffs].T


def idct_ii(coeffs) -> np.ndarray:
    """Inverse of the full orthonormal :func:`dct_ii`."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    return coeffs @ dct_matrix(coeffs.shape[-1])


# ---------------------------------------------------------------------------
# Spectrogram images
# ---------------------------------------------------------------------------

def normalize_unit(matrix) -> np.ndarray:
    m = np.asarray(matrix, dtype=np.float64)
    lo, hi = m.min(), m.max()
    if hi - lo <= 0:
        return np.zeros_like(m)
    return (m - lo) / (hi - lo)


def resize_bilinear(matrix, out_h: int = 216, out_w: int = 216, normalize: bool = True) -> np.ndarray:
    """Corner-aligned bilinear resize.

    With ``normalize`` the input is mapped to [0, 1] and the interpolated output is
    stretched back to the full [0, 1] range, since the grid may miss the extreme cells.
    """
    m = normalize_unit(matrix) if normalize else np.asarray(matrix, dtype=np.float64)
    h, w = m.shape
    if h < 2 or w < 2:
        raise ValueError("input must be at least 2x2")
    r = np.linspace(0.0, h - 1, out_h)
    c = np.linspace(0.0, w - 1, out_w)
    r0 = np.minimum(np.floor(r).astype(np.int64), h - 2)
    c0 = np.minimum(np.floor(c).astype(np.int64), w - 2)
    fr = (r - r0)[:, None]
    fc = (c - c0)[None, :]
    a = m[r0][:, c0]
    b = m[r0][:, c0 + 1]
    cc = m[r0 + 1][:, c0]
    d = m[r0 + 1][:, c0 + 1]
    out = (1 - fr) * ((1 - fc) * a + fc * b) + fr * ((1 - fc) * cc + fc * d)
    return normalize_unit(out) if normalize else out


def spectrogram_image(clip: AudioClip, params: StftParams = StftParams(), n_mels: int = 96,
                      size: int = 216) -> np.ndarray:
    """Grayscale Mel-dB image in [0, 1]: rows are Mel bins (highest at top), columns are frames."""
    db = power_to_db(mel_spectrogram(clip, params, n_mels=n_mels))
    return resize_bilinear(np.flipud(db.values.T), size, size)


def to_pgm(image) -> bytes:
    """Binary 8-bit PGM (P5); pixel = round(255 * value)."""
    img = np.asarray(image, dtype=np.float64)
    h, w = img.shape
    pixels = np.rint(255.0 * np.clip(img, 0.0, 1.0)).astype(np.uint8)
    return f"P5\n{w} {h}\n255\n".encode("ascii") + pixels.tobytes()


def read_pgm(data: bytes) -> np.ndarray:
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        start = pos
        while not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos].decode("ascii"))
    if tokens[0] != "P5" or tokens[3] != "255":
        raise ValueError("expected 8-bit binary PGM")
    w, h = int(tokens[1]), int(tokens[2])
    pixels = np.frombuffer(data[pos + 1:pos + 1 + w * h], dtype=np.uint8)
    return pixels.reshape(h, w)
