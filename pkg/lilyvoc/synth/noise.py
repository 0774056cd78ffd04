import math
from functools import lru_cache

import numpy as np
import scipy.signal

from lilyvoc.domain.values.audio import AudioBuffer
from lilyvoc.engine import functional as F
from lilyvoc.engine.rng import Rng
from lilyvoc.engine.tensor import Array, Tensor
from lilyvoc.error import DimensionError
from lilyvoc.synth.interpolate import interpolate_at

NOISE_FRAME = 128
NOISE_HOP = NOISE_FRAME // 2


@lru_cache(maxsize=1)
def filter_basis() -> Array:
    """basis[k] is the windowed, centred zero-phase response of bin k alone.

    A frame's FIR filter is linear in its magnitudes: sum_k mags[k] basis[k].
    """
    bins = NOISE_FRAME // 2 + 1
    responses = np.fft.irfft(np.eye(bins), n=NOISE_FRAME, axis=-1)
    centred = np.roll(responses, NOISE_HOP, axis=-1)
    basis = centred * scipy.signal.get_window("hann", NOISE_FRAME)
    basis.flags.writeable = False
    return basis


def noise_frame_count(length: int) -> int:
    """Frames centred at f * hop so that every sample sees two of them."""
    return math.ceil(length / NOISE_HOP) + 1


def noise_frame_magnitudes(noise_mags: Tensor, length: int) -> Tensor:
    """Read control-rate magnitudes [B, Nb] at the noise-frame centres."""
    count = noise_mags.shape[0]
    if count == 0 or length % count:
        raise DimensionError(
            f"Noise controls with {count} frames do not divide {length} samples."
        )
    hop = length // count
    centres = np.arange(noise_frame_count(length)) * NOISE_HOP
    return interpolate_at(noise_mags, centres / hop - 0.5)


def filter_noise_frames(frame_mags: Tensor, length: int, rng: Rng) -> Tensor:
    """Filter uniform noise frame by frame and overlap-add to `length` samples."""
    bins = NOISE_FRAME // 2 + 1
    frames = noise_frame_count(length)
    if frame_mags.shape != (frames, bins):
        raise DimensionError(
            f"Noise frame magnitudes {frame_mags.shape} do not match "
            f"({frames}, {bins}) for {length} samples."
        )
    # Frame f covers [f * hop - hop, f * hop + hop) of a shared noise signal.
    noise = rng.uniform((frames - 1) * NOISE_HOP + NOISE_FRAME)
    segments = noise[F.frame_indices(noise.shape[0], NOISE_FRAME, NOISE_HOP)]
    segments = segments * scipy.signal.get_window("hann", NOISE_FRAME)
    responses = scipy.signal.fftconvolve(
        segments[:, None, :], filter_basis()[None, :, :], axes=-1
    )
    filtered = (frame_mags.reshape(frames, bins, 1) * responses).sum(axis=1)
    audio = F.overlap_add(filtered, NOISE_HOP)
    # Window offset plus the centred filter delay.
    start = 2 * NOISE_HOP
    return audio[start : start + length]


def filtered_noise(
    noise_mags: Tensor, length: int, rng: Rng, sample_rate: int = 8000
) -> AudioBuffer:
    """Time-varying zero-phase filtered noise driven by [B, Nb] magnitudes."""
    frame_mags = noise_frame_magnitudes(noise_mags, length)
    return AudioBuffer(filter_noise_frames(frame_mags, length, rng), sample_rate)
