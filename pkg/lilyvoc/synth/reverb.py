import numpy as np

from lilyvoc.domain.values.audio import AudioBuffer
from lilyvoc.domain.values.controls import ReverbParams
from lilyvoc.engine import functional as F
from lilyvoc.engine.module import Module, Parameter
from lilyvoc.engine.rng import Rng
from lilyvoc.engine.tensor import Tensor, concat

REVERB_SECONDS = 0.5
TAIL_INIT_SCALE = 1e-4


class Reverb(Module):
    """Learned impulse response; only the taps after the dry tap train."""

    tail: Parameter

    def __init__(
        self, rng: Rng, sample_rate: int, seconds: float = REVERB_SECONDS
    ) -> None:
        taps = round(seconds * sample_rate)
        self.tail = Parameter(rng.normal(taps - 1, TAIL_INIT_SCALE))

    def params(self) -> ReverbParams:
        return ReverbParams(concat([Tensor(np.ones(1)), self.tail]))

    def forward(self, dry: AudioBuffer) -> AudioBuffer:
        return reverb(dry, self.params())


def reverb(dry: AudioBuffer, params: ReverbParams) -> AudioBuffer:
    """Convolve with the impulse response, truncated to the input length."""
    wet = F.fft_convolve(dry.samples, params.ir)
    return AudioBuffer(wet, dry.sample_rate)
