from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from lilyvoc.domain.values.audio import AudioBuffer
from lilyvoc.domain.values.spectral import MelConfig, StftConfig
from lilyvoc.dsp.stft import crop_frames, stft_magnitude
from lilyvoc.engine.tensor import Array, Tensor
from lilyvoc.error import BadRequestError

LOG_FLOOR = 1e-5
FEATURE_RATE = 48000
FEATURE_MELS = 120
INSTRUCTIVE_MELS = 80
FRAME_SECONDS = 0.005
WINDOW_SECONDS = 0.02


def hz_to_mel(freq: Array | float) -> Array:
    return 2595.0 * np.log10(1.0 + np.asarray(freq) / 700.0)


def mel_to_hz(mel: Array | float) -> Array:
    return 700.0 * (10.0 ** (np.asarray(mel) / 2595.0) - 1.0)


@dataclass(frozen=True)
class MelFilterbank:
    matrix: Array
    f_min: float
    f_max: float


@lru_cache(maxsize=16)
def mel_filterbank(config: MelConfig) -> MelFilterbank:
    """Triangular HTK filters, one row per band, sorted by centre frequency."""
    stft = config.stft
    bins = np.arange(stft.num_bins) * config.sample_rate / stft.fft_size
    edges = mel_to_hz(
        np.linspace(hz_to_mel(config.f_min), hz_to_mel(config.upper), config.n_mels + 2)
    )
    lower, centre, upper = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    rising = (bins[None, :] - lower) / (centre - lower)
    falling = (upper - bins[None, :]) / (upper - centre)
    matrix = np.maximum(0.0, np.minimum(rising, falling))
    # Narrow low filters can fall between bins; pin them to the nearest bin.
    for row in np.flatnonzero(matrix.sum(axis=1) <= 0.0):
        matrix[row, np.argmin(np.abs(bins - edges[row + 1]))] = 1.0
    matrix.flags.writeable = False
    return MelFilterbank(matrix=matrix, f_min=config.f_min, f_max=config.upper)


def feature_mel_config() -> MelConfig:
    """48 kHz conditioning analysis: 1024-point FFT, 20 ms window, 5 ms hop."""
    return MelConfig(
        stft=StftConfig(fft_size=1024, hop=240, win_length=960),
        sample_rate=FEATURE_RATE,
        n_mels=FEATURE_MELS,
    )


def instructive_mel_config(
    sample_rate: int, n_mels: int = INSTRUCTIVE_MELS
) -> MelConfig:
    """Rate-scaled analysis keeping the 5 ms frame rate (8 kHz: 256/160/40)."""
    win = round(sample_rate * WINDOW_SECONDS)
    hop = round(sample_rate * FRAME_SECONDS)
    fft_size = 1 << (win - 1).bit_length()
    return MelConfig(
        stft=StftConfig(fft_size=fft_size, hop=hop, win_length=win),
        sample_rate=sample_rate,
        n_mels=n_mels,
    )


def linear_mel(x: AudioBuffer, config: MelConfig) -> Tensor:
    """Mel energies before the log, one row per feature frame."""
    if x.sample_rate != config.sample_rate:
        raise BadRequestError(
            f"Mel config expects {config.sample_rate} Hz, got {x.sample_rate} Hz."
        )
    magnitudes = stft_magnitude(x, config.stft).frames
    if config.power != 1.0:
        magnitudes = magnitudes**config.power
    matrix = Tensor(mel_filterbank(config).matrix.T)
    return crop_frames(magnitudes @ matrix, len(x), config.stft.hop)


def mel_spectrogram(x: AudioBuffer, config: MelConfig | None = None) -> Tensor:
    """log(mel + 1e-5) with len // hop frames; differentiable."""
    return (linear_mel(x, config or feature_mel_config()) + LOG_FLOOR).log()
