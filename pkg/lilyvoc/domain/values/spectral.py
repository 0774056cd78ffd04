from dataclasses import dataclass
from enum import Enum

from lilyvoc.engine.tensor import Tensor
from lilyvoc.error import BadRequestError


class Window(str, Enum):
    HANN = "hann"


@dataclass(frozen=True)
class StftConfig:
    fft_size: int
    hop: int
    win_length: int
    window: Window = Window.HANN

    def __post_init__(self) -> None:
        if min(self.fft_size, self.hop, self.win_length) <= 0:
            raise BadRequestError(f"STFT sizes must be positive: {self}.")
        if self.win_length > self.fft_size or self.hop > self.win_length:
            raise BadRequestError(
                f"STFT needs hop <= win_length <= fft_size, got {self.hop}, "
                f"{self.win_length}, {self.fft_size}."
            )

    @property
    def num_bins(self) -> int:
        return self.fft_size // 2 + 1


@dataclass(frozen=True)
class MelConfig:
    stft: StftConfig
    sample_rate: int
    n_mels: int
    f_min: float = 0.0
    f_max: float | None = None
    power: float = 1.0

    @property
    def upper(self) -> float:
        return self.sample_rate / 2 if self.f_max is None else self.f_max


@dataclass(frozen=True)
class Spectrogram:
    """Linear magnitudes frames[B, fft_size / 2 + 1]."""

    frames: Tensor
    config: StftConfig
    sample_rate: int

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]


@dataclass(frozen=True)
class BandSplit:
    """Contiguous [start, stop) bin ranges partitioning the spectrum."""

    bands: tuple[tuple[int, int], ...]

    @classmethod
    def equal(cls, num_bins: int, count: int = 3) -> "BandSplit":
        if num_bins < count:
            raise BadRequestError(f"Cannot split {num_bins} bins into {count} bands.")
        base, remainder = divmod(num_bins, count)
        # Remainder bins go to the lower bands first.
        sizes = [base + (1 if index < remainder else 0) for index in range(count)]
        bands: list[tuple[int, int]] = []
        start = 0
        for size in sizes:
            bands.append((start, start + size))
            start += size
        return cls(tuple(bands))
