import numpy as np
import pytest

from voxid.audio import AudioClip, write_wav


@pytest.fixture
def make_clip_wav(tmp_path):
    """Factory writing seeded noise WAVs; returns the file path."""

    def _make(name, seed=0, seconds=1.0, rate=8000, bias=0.0):
        rng = np.random.default_rng(seed)
        samples = np.clip(rng.uniform(-0.5, 0.5, int(seconds * rate)) + bias, -1, 32767 / 32768)
        clip = AudioClip(samples=samples, sample_rate_hz=rate)
        path = tmp_path / name
        write_wav(clip, path)
        return path

    return _make
