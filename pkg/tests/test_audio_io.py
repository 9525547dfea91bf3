import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genrekit import dsp
from genrekit.audio_io import (AudioClip, EmptyOutputError, FrameParams, SynthSpec,
                               UnsupportedFormatError, WavFormatError, decode_wav, encode_wav,
                               frame_count, frame_signal, pre_emphasis, resample, synthesize)

from conftest import SR, tone


def wav_bytes(payload, channels=1, sr=SR, bits=16, fmt=1):
    block = channels * bits // 8
    header = struct.pack("<HHIIHH", fmt, channels, sr, sr * block, block, bits)
    body = b"fmt " + struct.pack("<I", len(header)) + header
    body += b"data" + struct.pack("<I", len(payload)) + payload
    return b"RIFF" + struct.pack("<I", 4 + len(body)) + b"WAVE" + body


def test_pcm16_scaling():
    clip = decode_wav(wav_bytes(struct.pack("<3h", 0, 16384, -32768)))
    assert clip.sample_rate == SR
    np.testing.assert_array_equal(clip.samples, [0.0, 0.5, -1.0])


def test_stereo_downmix_is_channel_mean():
    clip = decode_wav(wav_bytes(struct.pack("<2h", 16384, -16384), channels=2))
    np.testing.assert_array_equal(clip.samples, [0.0])


def test_pcm16_round_trip(rng):
    x = rng.uniform(-1, 1, SR)
    out = decode_wav(encode_wav(AudioClip(x, SR)))
    assert out.sample_rate == SR
    assert np.max(np.abs(out.samples - x)) <= 1 / 2 ** 15


def test_pcm24_and_float_round_trip(rng):
    x = rng.uniform(-1, 1, 1000)
    assert np.max(np.abs(decode_wav(encode_wav(AudioClip(x, SR), bits=24)).samples - x)) <= 1 / 2 ** 23
    f32 = decode_wav(encode_wav(AudioClip(x, SR), bits=32, float_format=True)).samples
    np.testing.assert_allclose(f32, x.astype(np.float32), rtol=0, atol=0)


def test_pcm24_scaling():
    payload = (4194304).to_bytes(3, "little", signed=True) + (-8388608).to_bytes(3, "little", signed=True)
    np.testing.assert_array_equal(decode_wav(wav_bytes(payload, bits=24)).samples, [0.5, -1.0])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1.0, 1.0, exclude_max=True), min_size=1, max_size=200))
def test_round_trip_within_one_lsb(values):
    x = np.array(values)
    out = decode_wav(encode_wav(AudioClip(x, SR))).samples
    assert np.max(np.abs(out - x)) <= 1 / 2 ** 15


@pytest.mark.parametrize("data", [b"", b"RIFX0000WAVE", b"RIFF\x04\x00\x00\x00WAVE",
                                  b"RIFF\x10\x00\x00\x00WAVEfmt \x02\x00\x00\x00ab"])
def test_malformed_is_format_error(data):
    with pytest.raises(WavFormatError):
        decode_wav(data)


def test_compressed_codec_unsupported():
    with pytest.raises(UnsupportedFormatError):
        decode_wav(wav_bytes(b"\x00\x00", fmt=2))  # ADPCM


def test_resample_identity():
    clip = tone(440.0, 0.5)
    assert resample(clip, SR) is clip


def test_resample_length_and_dc():
    clip = AudioClip(np.full(44100, 0.25), 44100)
    out = resample(clip, 22050)
    assert out.sample_rate == 22050
    assert len(out) == 22050
    assert np.max(np.abs(out.samples - 0.25)) <= 1e-6


@pytest.mark.parametrize("src,dst", [(44100, 22050), (16000, 22050), (48000, 22050)])
def test_resample_keeps_tone_within_one_bin(src, dst):
    clip = tone(1000.0, 1.0, sr=src)
    out = resample(clip, dst)
    assert len(out) == round(len(clip) * dst / src)
    power = dsp.power_spectrogram(dsp.stft(out)).values
    peak = np.argmax(power.mean(axis=0))
    assert abs(peak - 1000.0 * 2048 / dst) <= 1


def test_pre_emphasis_examples():
    y = pre_emphasis(AudioClip(np.ones(3), SR), 0.97).samples
    np.testing.assert_allclose(y, [1.0, 0.03, 0.03], atol=1e-15)
    x = np.array([0.1, -0.4, 0.7])
    np.testing.assert_array_equal(pre_emphasis(AudioClip(x, SR), 0.0).samples, x)


def test_pre_emphasis_default_alpha():
    x = np.array([1.0, 0.0])
    np.testing.assert_allclose(pre_emphasis(AudioClip(x, SR)).samples, [1.0, -0.97])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=1, max_size=100), st.floats(0, 0.99))
def test_pre_emphasis_preserves_length(values, alpha):
    assert len(pre_emphasis(AudioClip(np.array(values), SR), alpha)) == len(values)


def test_ten_second_clip_has_427_frames():
    frames = frame_signal(np.zeros(220500), FrameParams(2048, 512))
    assert frames.shape == (427, 2048)


def test_frame_boundaries():
    p = FrameParams(2048, 512)
    assert len(frame_signal(np.zeros(2048), p)) == 1
    assert len(frame_signal(np.zeros(2048 + 511), p)) == 1
    assert len(frame_signal(np.zeros(2048 + 512), p)) == 2
    with pytest.raises(EmptyOutputError):
        frame_signal(np.zeros(2047), p)


def test_frame_contents():
    x = np.arange(20.0)
    frames = frame_signal(x, FrameParams(8, 4))
    np.testing.assert_array_equal(frames[1], x[4:12])
    np.testing.assert_array_equal(frames[-1], x[12:20])


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 64), st.integers(1, 64), st.integers(0, 500))
def test_frame_count_formula(frame_length, hop, extra):
    if hop > frame_length:
        hop, frame_length = frame_length, hop
    n = frame_length + extra
    frames = frame_signal(np.arange(n, dtype=float), FrameParams(frame_length, hop))
    assert len(frames) == 1 + (n - frame_length) // hop == frame_count(n, frame_length, hop)
    last = (len(frames) - 1) * hop
    assert last + frame_length <= n < last + frame_length + hop


def test_frame_params_validation():
    with pytest.raises(ValueError):
        FrameParams(512, 1024)
    with pytest.raises(ValueError):
        FrameParams(512, 0)


def test_audio_clip_invariants():
    with pytest.raises(ValueError):
        AudioClip(np.array([0.0, np.nan]), SR)
    with pytest.raises(ValueError):
        AudioClip(np.zeros(4), 0)


def test_synth_silence():
    clip = synthesize(SynthSpec("silence", {"duration": 1.0}), SR)
    assert len(clip) == 22050 and not clip.samples.any()


def test_synth_click_train_positions():
    clip = synthesize(SynthSpec("click_train", {"bpm": 120, "duration": 10.0}), SR)
    idx = np.flatnonzero(clip.samples)
    np.testing.assert_array_equal(idx, np.arange(20) * 11025)
    np.testing.assert_array_equal(clip.samples[idx], 1.0)


def test_synth_sine_formula():
    clip = synthesize(SynthSpec("sine", {"frequency": 100.0, "amplitude": 0.5, "duration": 0.01}), SR)
    t = np.arange(len(clip)) / SR
    np.testing.assert_allclose(clip.samples, 0.5 * np.sin(2 * np.pi * 100.0 * t), atol=1e-15)


@pytest.mark.parametrize("kind", ["noise", "mixture"])
def test_synth_deterministic(kind):
    params = {"duration": 0.5, "amplitude": 0.3, "low": 100.0, "high": 2000.0}
    if kind == "mixture":
        params = {"duration": 0.5, "components": [{"kind": "noise", "params": {"amplitude": 0.1}, "seed": 3},
                                                  {"kind": "sine", "params": {"frequency": 300.0}}]}
    a = synthesize(SynthSpec(kind, params, seed=7), SR).samples
    b = synthesize(SynthSpec(kind, params, seed=7), SR).samples
    assert a.tobytes() == b.tobytes()
    c = synthesize(SynthSpec("noise", {"duration": 0.5}, seed=8), SR).samples
    assert a.tobytes() != c.tobytes()


@pytest.mark.parametrize("spec", [SynthSpec("sine", {"frequency": 11025.0}),
                                  SynthSpec("sine", {"frequency": 20000.0}),
                                  SynthSpec("chirp", {"f0": 100.0, "f1": 12000.0}),
                                  SynthSpec("sine", {"frequency": 100.0, "duration": 0.0}),
                                  SynthSpec("warble", {})])
def test_synth_invalid(spec):
    with pytest.raises(ValueError):
        synthesize(spec, SR)
