import math

import numpy as np

from lilyvoc.domain.values.audio import AudioBuffer
from lilyvoc.dsp.stft import feature_frames
from lilyvoc.engine.tensor import Array

F0_MIN = 50.0
F0_MAX = 1200.0
YIN_THRESHOLD = 0.15
FRAME_SECONDS = 0.005
SILENCE_ENERGY = 1e-10


def _difference(frames: Array, lag_max: int) -> Array:
    """YIN difference d(tau) for tau in [0, lag_max] of every frame."""
    window = lag_max
    n_fft = 1 << (3 * window).bit_length()
    head = np.fft.rfft(frames[:, :window], n=n_fft, axis=1)
    full = np.fft.rfft(frames, n=n_fft, axis=1)
    corr = np.fft.irfft(np.conj(head) * full, n=n_fft, axis=1)[:, : lag_max + 1]
    squares = np.cumsum(np.pad(frames**2, ((0, 0), (1, 0))), axis=1)
    energy0 = squares[:, window][:, None]
    lags = np.arange(lag_max + 1)
    energy_lag = squares[:, lags + window] - squares[:, lags]
    return np.maximum(energy0 + energy_lag - 2.0 * corr, 0.0)


def _cumulative_mean_normalized(diff: Array) -> Array:
    lags = np.arange(diff.shape[1])
    running = np.cumsum(diff[:, 1:], axis=1)
    out = np.ones_like(diff)
    safe = np.where(running > 0, running, 1.0)
    out[:, 1:] = np.where(running > 0, diff[:, 1:] * lags[1:] / safe, 1.0)
    return out


def _pick_lag(curve: Array, lag_min: int, threshold: float) -> float | None:
    below = np.flatnonzero(curve[lag_min:] < threshold)
    if below.size == 0:
        return None
    lag = lag_min + int(below[0])
    while lag + 1 < curve.shape[0] and curve[lag + 1] < curve[lag]:
        lag += 1
    if 0 < lag < curve.shape[0] - 1:
        left, mid, right = curve[lag - 1], curve[lag], curve[lag + 1]
        curvature = left - 2.0 * mid + right
        if curvature > 0:
            return lag + 0.5 * (left - right) / curvature
    return float(lag)


def yin_pitch(  # noqa: PLR0913
    x: AudioBuffer,
    f0_min: float = F0_MIN,
    f0_max: float = F0_MAX,
    threshold: float = YIN_THRESHOLD,
    frame_seconds: float = FRAME_SECONDS,
) -> Array:
    """YIN f0 per feature frame in Hz, 0 where unvoiced."""
    rate = x.sample_rate
    hop = round(rate * frame_seconds)
    lag_max = math.ceil(rate / f0_min)
    lag_min = max(1, math.floor(rate / f0_max))
    frame_length = 2 * lag_max
    count = feature_frames(len(x), hop)
    signal = np.pad(x.numpy(), (lag_max, frame_length))
    starts = np.arange(count) * hop
    frames = signal[starts[:, None] + np.arange(frame_length)[None, :]]

    f0 = np.zeros(count)
    if count == 0:
        return f0
    curves = _cumulative_mean_normalized(_difference(frames, lag_max))
    energies = np.sum(frames[:, :lag_max] ** 2, axis=1)
    for index in range(count):
        if energies[index] < SILENCE_ENERGY:
            continue
        lag = _pick_lag(curves[index], lag_min, threshold)
        if lag is None or lag <= 0:
            continue
        freq = rate / lag
        if f0_min <= freq <= f0_max:
            f0[index] = freq
    return f0
