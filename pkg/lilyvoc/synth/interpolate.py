import numpy as np

from lilyvoc.engine.tensor import Array, Tensor
from lilyvoc.error import DimensionError

FRAME_SECONDS = 0.005


def control_hop(sample_rate: int) -> int:
    """Samples per 5 ms control frame (40 at 8 kHz)."""
    return round(sample_rate * FRAME_SECONDS)


def interpolate_at(frames: Tensor, coords: Array) -> Tensor:
    """Linearly read frames[B, D] at fractional frame coordinates.

    Coordinates outside [0, B - 1] are clamped to the end frames.
    """
    count = frames.shape[0]
    coords = np.clip(coords, 0.0, count - 1)
    lower = np.minimum(np.floor(coords).astype(np.int64), max(count - 2, 0))
    upper = np.minimum(lower + 1, count - 1)
    weight = (coords - lower)[:, None]
    return frames[lower] * (1.0 - weight) + frames[upper] * weight


def interpolate_controls(frames: Tensor, length: int, hop: int = 40) -> Tensor:
    """Upsample frames[B, D] to [length, D] with frame b centred at (b + 0.5) hop."""
    count = frames.shape[0]
    if length != hop * count:
        raise DimensionError(
            f"Cannot interpolate {count} frames to {length} samples; expected "
            f"{hop * count} at hop {hop}."
        )
    coords = np.arange(length) / hop - 0.5
    return interpolate_at(frames, coords)
