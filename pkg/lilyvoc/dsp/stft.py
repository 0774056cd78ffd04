from functools import lru_cache

import numpy as np
import scipy.signal

from lilyvoc.domain.values.audio import AudioBuffer
from lilyvoc.domain.values.spectral import Spectrogram, StftConfig
from lilyvoc.engine import functional as F
from lilyvoc.engine.tensor import Array, Tensor, pad
from lilyvoc.error import InputTooShortError


@lru_cache(maxsize=32)
def analysis_window(config: StftConfig) -> Array:
    """Periodic window of win_length centred inside fft_size zeros."""
    window = scipy.signal.get_window(config.window.value, config.win_length)
    left = (config.fft_size - config.win_length) // 2
    padded = np.zeros(config.fft_size)
    padded[left : left + config.win_length] = window
    padded.flags.writeable = False
    return padded


def num_frames(length: int, hop: int) -> int:
    return length // hop + 1


def stft_magnitude(x: AudioBuffer, config: StftConfig) -> Spectrogram:
    """Centre-padded (reflect) magnitude STFT with floor(len / hop) + 1 frames."""
    length = len(x)
    if length < config.win_length:
        raise InputTooShortError(
            f"Signal of {length} samples is shorter than the {config.win_length}"
            "-sample analysis window."
        )
    half = config.fft_size // 2
    padded = pad(x.samples, [(half, half)], mode="reflect")
    frames = F.frame(padded, config.fft_size, config.hop) * analysis_window(config)
    return Spectrogram(
        frames=F.rfft_magnitude(frames, config.fft_size),
        config=config,
        sample_rate=x.sample_rate,
    )


def feature_frames(length: int, hop: int) -> int:
    """Frame count of the conditioning features; audio spans exactly hop * B."""
    return length // hop


def crop_frames(frames: Tensor, length: int, hop: int) -> Tensor:
    return frames[: feature_frames(length, hop)]
