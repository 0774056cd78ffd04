from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from lilyvoc.engine.tensor import Array, Tensor
from lilyvoc.error import BadRequestError, DimensionError


@dataclass(frozen=True)
class AudioBuffer:
    """Mono samples and their sample rate in Hz."""

    samples: Tensor
    sample_rate: int

    def __post_init__(self) -> None:
        if self.sample_rate <= 0:
            raise BadRequestError(
                f"Sample rate must be positive, got {self.sample_rate}."
            )
        if self.samples.ndim != 1:
            raise DimensionError(f"Audio must be mono, got shape {self.samples.shape}.")

    @classmethod
    def from_array(cls, samples: ArrayLike, sample_rate: int) -> "AudioBuffer":
        return cls(Tensor(np.asarray(samples, dtype=np.float64)), sample_rate)

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    def numpy(self) -> Array:
        return self.samples.data
