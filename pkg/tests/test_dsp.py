import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genrekit import dsp
from genrekit.audio_io import AudioClip, EmptyOutputError

from conftest import SR, silence, tone


def test_hann_examples():
    np.testing.assert_allclose(dsp.hann_window(4), [0.0, 0.75, 0.75, 0.0], atol=1e-15)
    w = dsp.hann_window(9)
    assert w[0] == 0.0 and w[-1] == 0.0 and w[4] == pytest.approx(1.0, abs=1e-15)
    assert dsp.hann_window(2048).sum() == pytest.approx(1023.5, abs=1e-9)
    with pytest.raises(ValueError):
        dsp.hann_window(1)


@pytest.mark.parametrize("n", [1, 2, 8, 64, 2048])
def test_fft_matches_naive_dft(n, rng):
    x = rng.standard_normal((3, n)) + 1j * rng.standard_normal((3, n))
    ref = dsp.naive_dft(x)
    got = dsp.fft(x)
    assert np.max(np.abs(got - ref)) <= 1e-9 * np.max(np.abs(ref))


@pytest.mark.parametrize("rows", [1, 2, 5])
def test_rfft_matches_naive_dft(rows, rng):
    x = rng.standard_normal((rows, 256))
    np.testing.assert_allclose(dsp.rfft(x), dsp.naive_dft(x)[:, :129], rtol=0, atol=1e-10)


def test_fft_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        dsp.fft(np.zeros(12))
    with pytest.raises(ValueError):
        dsp.StftParams(n_fft=1000)


def test_naive_dft_examples():
    np.testing.assert_allclose(dsp.naive_dft([1, 0, 0, 0]), np.ones(4), atol=1e-15)
    X = dsp.naive_dft(np.ones(8))
    assert X[0] == pytest.approx(8.0)
    assert np.max(np.abs(X[1:])) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 10), st.integers(0, 2 ** 32 - 1))
def test_parseval(log_n, seed):
    x = np.random.default_rng(seed).standard_normal(2 ** log_n)
    for X in (dsp.fft(x), dsp.naive_dft(x)):
        lhs = np.sum(x ** 2)
        rhs = np.sum(np.abs(X) ** 2) / len(x)
        assert abs(lhs - rhs) <= 1e-9 * lhs


def test_stft_tone_on_bin_100():
    f = 100 * SR / 2048
    spec = dsp.stft(tone(f, 1.0))
    assert spec.scale == "complex"
    assert spec.values.shape == (1 + (SR - 2048) // 512, 1025)
    assert np.all(np.argmax(np.abs(spec.values), axis=1) == 100)
    np.testing.assert_allclose(spec.bin_frequencies, np.arange(1025) * SR / 2048)


def test_stft_dc_energy_in_bin_zero():
    power = dsp.power_spectrogram(dsp.stft(AudioClip(np.full(4096, 0.5), SR))).values
    assert np.all(np.argmax(power, axis=1) == 0)
    # symmetric Hann leaks mostly into bin 1; the far bins stay negligible
    assert np.max(power[:, 2:]) < 1e-6 * np.max(power)


def test_stft_matches_oracle_framewise(rng):
    x = rng.standard_normal(4096)
    spec = dsp.stft(AudioClip(x, SR))
    w = dsp.hann_window(2048)
    for i in range(spec.n_frames):
        ref = dsp.naive_dft(x[i * 512:i * 512 + 2048] * w)[:1025]
        assert np.max(np.abs(spec.values[i] - ref)) < 1e-6 * np.max(np.abs(ref))


def test_stft_too_short():
    with pytest.raises(EmptyOutputError):
        dsp.stft(AudioClip(np.zeros(2047), SR))


def test_power_spectrogram():
    spec = dsp.Spectrogram(np.array([[3 + 4j, 0j]]), np.array([0.0, 1.0]), 512, SR, "complex")
    out = dsp.power_spectrogram(spec)
    np.testing.assert_array_equal(out.values, [[25.0, 0.0]])
    assert out.scale == "power"


def test_power_matches_naive_dft(rng):
    x = rng.standard_normal(2048 + 512 * 3)
    power = dsp.power_spectrogram(dsp.stft(AudioClip(x, SR))).values
    frames = np.stack([x[i * 512:i * 512 + 2048] for i in range(4)]) * dsp.hann_window(2048)
    ref = np.abs(dsp.naive_dft(frames)[:, :1025]) ** 2
    np.testing.assert_allclose(power, ref, rtol=1e-6, atol=1e-6 * ref.max())


def test_mel_formula():
    assert dsp.hz_to_mel(700.0) == pytest.approx(2595 * np.log10(2), abs=1e-12)
    assert dsp.hz_to_mel(700.0) == pytest.approx(781.17, abs=0.01)
    f = np.linspace(0, SR / 2, 1001)
    np.testing.assert_allclose(dsp.mel_to_hz(dsp.hz_to_mel(f)), f, rtol=1e-9, atol=1e-9)


def test_filterbank_shape_and_triangles():
    fb = dsp.mel_filterbank(SR, 2048, 96)
    assert fb.weights.shape == (96, 1025)
    assert fb.f_min == 0.0 and fb.f_max == SR / 2
    assert np.all((fb.weights >= 0) & (fb.weights <= 1))
    for row in fb.weights:
        peak = int(np.argmax(row))
        assert row[peak] == 1.0
        assert np.sum(row == 1.0) == 1
        assert np.all(np.diff(row[:peak + 1]) >= 0)
        assert np.all(np.diff(row[peak:]) <= 0)


def test_filterbank_coverage():
    fb = dsp.mel_filterbank(SR, 2048, 96)
    freqs = np.arange(1025) * SR / 2048
    inside = (freqs > fb.center_frequencies[0]) & (freqs < fb.center_frequencies[-1])
    assert np.all(fb.weights[:, inside].sum(axis=0) > 0)


def test_filterbank_validation():
    with pytest.raises(ValueError):
        dsp.mel_filterbank(SR, 2048, 1)
    with pytest.raises(ValueError):
        dsp.mel_filterbank(SR, 2048, 40, f_min=5000.0, f_max=4000.0)
    with pytest.raises(ValueError):
        dsp.mel_filterbank(SR, 2048, 40, f_max=SR)


def test_mel_spectrogram_shape_and_silence():
    clip = tone(440.0, 10.0)
    mel = dsp.mel_spectrogram(clip)
    assert mel.values.shape == (427, 96)
    assert np.all(np.diff(mel.bin_frequencies) > 0)
    assert not dsp.mel_spectrogram(silence(1.0)).values.any()


@pytest.mark.parametrize("m", [10, 30, 50, 70, 90])
def test_tone_at_filter_center(m):
    fb = dsp.mel_filterbank(SR, 2048, 96)
    mel = dsp.mel_spectrogram(tone(float(fb.center_frequencies[m]), 0.5), fb=fb).values
    assert np.all(np.argmax(mel, axis=1) == m)


def _db(values):
    return dsp.power_to_db(dsp.Spectrogram(np.asarray(values, dtype=float), np.arange(2.0), 512, SR)).values


def test_power_to_db_examples(rng):
    np.testing.assert_allclose(_db([[1.0, 0.1]]), [[0.0, -10.0]], atol=1e-12)
    np.testing.assert_array_equal(_db(np.zeros((3, 2))), np.zeros((3, 2)))
    db = _db(rng.random((50, 2)) ** 20)
    assert db.max() == 0.0 and db.min() >= -80.0
    assert _db([[1.0, 1e-12]])[0, 1] == -80.0


def test_dct_examples(rng):
    coeffs = dsp.dct_ii(np.full((2, 8), 3.0))
    assert coeffs[0, 0] == pytest.approx(3.0 * np.sqrt(8))
    assert np.max(np.abs(coeffs[:, 1:])) < 1e-12
    np.testing.assert_allclose(dsp.dct_ii([[1.0, -1.0]]), [[0.0, np.sqrt(2)]], atol=1e-15)
    x = rng.standard_normal((5, 20))
    np.testing.assert_allclose(dsp.idct_ii(dsp.dct_ii(x)), x, atol=1e-9)
    assert dsp.dct_ii(x, 4).shape == (5, 4)
    with pytest.raises(ValueError):
        dsp.dct_ii(x, 21)


def test_dct_matches_direct_sum(rng):
    x = rng.standard_normal(12)
    n = len(x)
    ref = [np.sqrt((1 if k == 0 else 2) / n) * sum(x[i] * np.cos(np.pi * (2 * i + 1) * k / (2 * n))
                                                  for i in range(n)) for k in range(n)]
    np.testing.assert_allclose(dsp.dct_ii(x), ref, atol=1e-12)


def test_resize_examples(rng):
    m = rng.random((216, 216))
    np.testing.assert_allclose(dsp.resize_bilinear(m, normalize=False), m, atol=1e-12)
    u = dsp.normalize_unit(m)
    np.testing.assert_allclose(dsp.resize_bilinear(m), u, atol=1e-12)
    np.testing.assert_array_equal(dsp.resize_bilinear(np.full((10, 30), -7.0)), np.zeros((216, 216)))
    const = dsp.resize_bilinear(np.full((10, 30), 2.0), 40, 50, normalize=False)
    np.testing.assert_allclose(const, 2.0)


def test_resize_mel_db_normalized():
    db = dsp.power_to_db(dsp.mel_spectrogram(_noise_clip())).values
    assert db.shape == (427, 96)
    img = dsp.resize_bilinear(db.T)
    assert img.shape == (216, 216)
    assert img.min() == 0.0 and img.max() == 1.0


def test_resize_corner_alignment():
    m = np.array([[0.0, 1.0], [2.0, 3.0]])
    out = dsp.resize_bilinear(m, 3, 3, normalize=False)
    np.testing.assert_allclose(out, [[0, 0.5, 1], [1, 1.5, 2], [2, 2.5, 3]])


def test_pgm_round_trip(rng):
    img = rng.random((5, 7))
    data = dsp.to_pgm(img)
    assert data.startswith(b"P5\n7 5\n255\n")
    np.testing.assert_array_equal(dsp.read_pgm(data), np.rint(255 * img))


def _noise_clip():
    return AudioClip(np.random.default_rng(5).standard_normal(220500) * 0.1, SR)


def test_operations_deterministic():
    clip = _noise_clip()
    a = dsp.power_to_db(dsp.mel_spectrogram(clip)).values
    b = dsp.power_to_db(dsp.mel_spectrogram(clip)).values
    assert a.tobytes() == b.tobytes()
