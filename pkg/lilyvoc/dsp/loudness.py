import numpy as np

from lilyvoc.domain.values.audio import AudioBuffer
from lilyvoc.domain.values.spectral import StftConfig
from lilyvoc.dsp.mel import feature_mel_config
from lilyvoc.dsp.stft import analysis_window, feature_frames, stft_magnitude
from lilyvoc.engine.tensor import Array, no_grad

DB_FLOOR = -80.0
DB_CEILING = 0.0
POWER_FLOOR = 1e-10


def a_weighting(freqs: Array) -> Array:
    """IEC 61672 A-weighting as a linear power gain (0 dB at 1 kHz)."""
    f2 = np.asarray(freqs, dtype=np.float64) ** 2
    numerator = 12194.0**2 * f2**2
    denominator = (
        (f2 + 20.6**2)
        * np.sqrt((f2 + 107.7**2) * (f2 + 737.9**2))
        * (f2 + 12194.0**2)
    )
    gain = numerator / denominator
    return gain**2 * 10.0 ** (2.0 / 10.0)


def loudness_db(x: AudioBuffer, config: StftConfig | None = None) -> Array:
    """A-weighted frame power in dBFS (full-scale sine reads 0 dB), unclipped."""
    config = config or feature_mel_config().stft
    with no_grad():
        magnitudes = stft_magnitude(x, config).frames.data
    power = magnitudes**2
    # One-sided spectrum: interior bins stand for both halves.
    power[:, 1:-1] *= 2.0
    freqs = np.arange(config.num_bins) * x.sample_rate / config.fft_size
    window = analysis_window(config)
    mean_square = (power * a_weighting(freqs)).sum(axis=1) / (
        config.fft_size * np.sum(window**2)
    )
    db = 10.0 * np.log10(2.0 * mean_square + POWER_FLOOR)
    return db[: feature_frames(len(x), config.hop)]


def loudness(x: AudioBuffer, config: StftConfig | None = None) -> Array:
    """Loudness per feature frame, clipped to [-80, 0] dB and mapped to [0, 1]."""
    db = np.clip(loudness_db(x, config), DB_FLOOR, DB_CEILING)
    return (db - DB_FLOOR) / (DB_CEILING - DB_FLOOR)
