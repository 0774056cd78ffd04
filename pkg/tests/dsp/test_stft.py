import numpy as np
import pytest

from lilyvoc.domain.values.audio import AudioBuffer
from lilyvoc.domain.values.spectral import BandSplit, Spectrogram, StftConfig
from lilyvoc.dsp.bands import band_split
from lilyvoc.dsp.stft import analysis_window, feature_frames, stft_magnitude
from lilyvoc.engine.gradcheck import check_gradients
from lilyvoc.engine.rng import Rng
from lilyvoc.engine.tensor import Tensor, no_grad
from lilyvoc.error import BadRequestError, InputTooShortError

FEATURE_STFT = StftConfig(fft_size=1024, hop=240, win_length=960)


def test_frame_counts(tone: AudioBuffer):
    spectrogram = stft_magnitude(tone, FEATURE_STFT)
    assert spectrogram.frames.shape == (201, 513)
    assert feature_frames(len(tone), 240) == 200


def test_sine_peaks_at_its_bin(tone: AudioBuffer):
    frames = stft_magnitude(tone, FEATURE_STFT).frames.numpy()
    assert int(np.argmax(frames[100])) == 9


def test_short_signal_raises():
    with pytest.raises(InputTooShortError):
        _ = stft_magnitude(AudioBuffer.from_array(np.zeros(959), 48000), FEATURE_STFT)


def test_window_is_centred_periodic_hann():
    window = analysis_window(FEATURE_STFT)
    assert window.shape == (1024,)
    assert np.all(window[:32] == 0.0)
    assert np.all(window[-32:] == 0.0)
    assert window[32] == 0.0
    assert window[32 + 480] == pytest.approx(1.0)


def test_invalid_config_rejected():
    with pytest.raises(BadRequestError):
        _ = StftConfig(fft_size=256, hop=64, win_length=512)


def test_stft_gradients(rng: Rng):
    config = StftConfig(fft_size=16, hop=4, win_length=12)
    samples = Tensor(rng.child(0).normal(40), requires_grad=True)
    weights = rng.child(1).normal((11, 9))

    def loss() -> Tensor:
        spectrogram = stft_magnitude(AudioBuffer(samples, 8000), config)
        return (spectrogram.frames * weights).sum()

    assert check_gradients(loss, [samples]) < 1e-4


@pytest.mark.parametrize(
    ("fft_size", "sizes"), [(512, [86, 86, 85]), (1024, [171, 171, 171])]
)
def test_band_split_sizes(fft_size: int, sizes: list[int], tone: AudioBuffer):
    config = StftConfig(fft_size=fft_size, hop=fft_size // 4, win_length=fft_size)
    with no_grad():
        spectrogram = stft_magnitude(tone, config)
    bands = band_split(spectrogram, 3)
    assert [band.shape[1] for band in bands] == sizes
    np.testing.assert_array_equal(
        np.concatenate([band.numpy() for band in bands], axis=1),
        spectrogram.frames.numpy(),
    )


def test_band_split_rejects_too_many_bands():
    with pytest.raises(BadRequestError):
        _ = BandSplit.equal(2, 3)
    spectrogram = Spectrogram(
        Tensor(np.ones((3, 5))), StftConfig(fft_size=8, hop=2, win_length=8), 8000
    )
    assert len(band_split(spectrogram, 5)) == 5


def test_stft_energy_matches_windowed_signal():
    x = Rng(21).normal(4800)
    frames = stft_magnitude(AudioBuffer.from_array(x, 48000), FEATURE_STFT)
    power = frames.frames.numpy() ** 2
    # One-sided spectrum: interior bins stand for two conjugate bins.
    weights = np.full(513, 2.0)
    weights[[0, -1]] = 1.0
    spectral_energy = float((power * weights).sum()) / 1024

    padded = np.pad(x, 512, mode="reflect")
    window = analysis_window(FEATURE_STFT)
    starts = np.arange(power.shape[0]) * 240
    signal_energy = sum(
        float(np.sum((padded[start : start + 1024] * window) ** 2))
        for start in starts
    )
    assert spectral_energy == pytest.approx(signal_energy, rel=1e-6)
