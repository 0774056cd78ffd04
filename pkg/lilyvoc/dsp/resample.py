import math
from functools import lru_cache

import numpy as np
import scipy.signal

from lilyvoc.domain.values.audio import AudioBuffer
from lilyvoc.engine.tensor import Array
from lilyvoc.error import BadRequestError

KAISER_BETA = 8.6
HALF_LENGTH_FACTOR = 20


@lru_cache(maxsize=16)
def _lowpass(up: int, down: int) -> Array:
    rate = max(up, down)
    taps = scipy.signal.firwin(
        2 * HALF_LENGTH_FACTOR * rate + 1, 1.0 / rate, window=("kaiser", KAISER_BETA)
    )
    taps.flags.writeable = False
    return taps


def resample(x: AudioBuffer, target_rate: int) -> AudioBuffer:
    """Windowed-sinc polyphase resampling to round(len * target / source) samples."""
    source_rate = x.sample_rate
    if target_rate <= 0 or source_rate <= 0:
        raise BadRequestError(
            f"Sample rates must be positive, got {source_rate} -> {target_rate}."
        )
    if target_rate == source_rate:
        return AudioBuffer.from_array(x.numpy().copy(), source_rate)
    divisor = math.gcd(source_rate, target_rate)
    up, down = target_rate // divisor, source_rate // divisor
    taps = np.array(_lowpass(up, down))
    out = scipy.signal.resample_poly(x.numpy(), up, down, window=taps)
    length = round(len(x) * target_rate / source_rate)
    return AudioBuffer.from_array(out[:length], target_rate)
