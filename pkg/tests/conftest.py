from collections.abc import Callable

import numpy as np
import pytest

from lilyvoc.domain.values.audio import AudioBuffer
from lilyvoc.engine.rng import Rng
from lilyvoc.models.config import RunConfig

type SineFactory = Callable[..., AudioBuffer]


def _sine(
    freq: float, sample_rate: int = 48000, seconds: float = 1.0, amp: float = 0.5
) -> AudioBuffer:
    t = np.arange(round(sample_rate * seconds)) / sample_rate
    return AudioBuffer.from_array(amp * np.sin(2.0 * np.pi * freq * t), sample_rate)


@pytest.fixture
def make_sine() -> SineFactory:
    return _sine


@pytest.fixture
def rng() -> Rng:
    return Rng(1234)


@pytest.fixture
def toy_config() -> RunConfig:
    return RunConfig.toy()


@pytest.fixture
def tone() -> AudioBuffer:
    """One second of 440 Hz at 48 kHz."""
    return _sine(440.0)
