from dataclasses import dataclass

import numpy as np

from lilyvoc.engine.tensor import Array, Tensor
from lilyvoc.error import DimensionError

HARMONICS = 64
NOISE_BINS = 65


@dataclass(frozen=True)
class HnControls:
    """Frame-rate harmonic-plus-noise controls.

    harm_amp is [B, 1], harm_dist is [B, Kh], noise_mags is [B, Nb] and f0 is
    [B] in Hz (0 for unvoiced frames).
    """

    harm_amp: Tensor
    harm_dist: Tensor
    noise_mags: Tensor
    f0: Array

    def __post_init__(self) -> None:
        frames = self.f0.shape[0]
        shapes = (self.harm_amp.shape, self.harm_dist.shape, self.noise_mags.shape)
        if self.f0.ndim != 1 or any(shape[0] != frames for shape in shapes):
            raise DimensionError(
                f"Control frame counts differ: amp {shapes[0]}, dist {shapes[1]}, "
                f"noise {shapes[2]}, f0 {self.f0.shape}."
            )
        if self.harm_amp.shape[1:] != (1,):
            raise DimensionError(f"harm_amp must be [B, 1], got {self.harm_amp.shape}.")

    @property
    def num_frames(self) -> int:
        return self.f0.shape[0]

    @property
    def num_harmonics(self) -> int:
        return self.harm_dist.shape[1]


@dataclass(frozen=True)
class SampleRateControls:
    """Controls brought to the sample rate.

    h is [T, 1 + Kh] (amplitude column first), n is [F, Nb] sampled at the
    noise-frame centres and f0 is [T] in Hz.
    """

    h: Tensor
    n: Tensor
    f0: Array
    sample_rate: int

    def __len__(self) -> int:
        return self.f0.shape[0]

    @property
    def amplitude(self) -> Tensor:
        return self.h[:, :1]

    @property
    def distribution(self) -> Tensor:
        return self.h[:, 1:]


@dataclass(frozen=True)
class ReverbParams:
    """Impulse response whose first tap is the fixed dry path."""

    ir: Tensor

    def __post_init__(self) -> None:
        if self.ir.ndim != 1 or self.ir.shape[0] < 1:
            raise DimensionError(f"Impulse response must be 1-D, got {self.ir.shape}.")

    @classmethod
    def identity(cls, length: int = 1) -> "ReverbParams":
        ir = np.zeros(length)
        ir[0] = 1.0
        return cls(Tensor(ir))
