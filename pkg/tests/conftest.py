import numpy as np
import pytest

from genrekit.audio_io import AudioClip, SynthSpec, synthesize

SR = 22050


def tone(freq, seconds=1.0, sr=SR, amplitude=1.0):
    return synthesize(SynthSpec("sine", {"frequency": freq, "duration": seconds,
                                         "amplitude": amplitude}), sr)


def silence(seconds=1.0, sr=SR):
    return AudioClip(np.zeros(int(round(seconds * sr))), sr)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# acceptance criteria register here; the summary prints one line per criterion
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        status, title, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {title}  [{detail}]")
