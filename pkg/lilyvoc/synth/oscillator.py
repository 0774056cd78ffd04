import math

import numpy as np

from lilyvoc.domain.values.audio import AudioBuffer
from lilyvoc.domain.values.controls import SampleRateControls
from lilyvoc.engine.tensor import Array, Tensor

TWO_PI = 2.0 * math.pi
DIST_FLOOR = 1e-12


def harmonic_phases(
    f0: Array, harmonics: int, sample_rate: int, initial_phase: float = 0.0
) -> tuple[Array, float]:
    """Phase of every harmonic at every sample and the phase carried onward.

    The fundamental phase accumulates 2 pi f0 / sr from `initial_phase`, the
    first sample sitting exactly on it.
    """
    increments = TWO_PI * f0 / sample_rate
    running = np.cumsum(increments)
    base = np.mod(initial_phase + np.concatenate([[0.0], running[:-1]]), TWO_PI)
    final = float(np.mod(initial_phase + running[-1], TWO_PI)) if f0.size else 0.0
    orders = np.arange(1, harmonics + 1)
    return np.mod(base[:, None] * orders[None, :], TWO_PI), final


def nyquist_mask(f0: Array, harmonics: int, sample_rate: int) -> Array:
    """1 where k * f0 stays at or below Nyquist on a voiced sample, else 0."""
    orders = np.arange(1, harmonics + 1)
    below = f0[:, None] * orders[None, :] <= sample_rate / 2
    voiced = f0[:, None] > 0.0
    return (below & voiced).astype(np.float64)


def harmonic_oscillator(
    controls: SampleRateControls, sample_rate: int, initial_phase: float = 0.0
) -> tuple[AudioBuffer, float]:
    """Additive synthesis y = A * sum_k c_k sin(phi_k).

    Harmonics above Nyquist are dropped before the distribution is
    renormalised; unvoiced samples are silent. Returns the audio and the
    phase to pass as `initial_phase` to the next block.
    """
    f0 = controls.f0
    harmonics = controls.distribution.shape[1]
    phases, final = harmonic_phases(f0, harmonics, sample_rate, initial_phase)
    mask = nyquist_mask(f0, harmonics, sample_rate)
    masked = controls.distribution * mask
    dist = masked / masked.sum(axis=1, keepdims=True).maximum(DIST_FLOOR)
    bank = (dist * np.sin(phases)).sum(axis=1, keepdims=True)
    samples: Tensor = (controls.amplitude * bank).reshape(len(controls))
    return AudioBuffer(samples, sample_rate), final
