from dataclasses import dataclass

from lilyvoc.engine.tensor import Array
from lilyvoc.error import DimensionError


@dataclass(frozen=True)
class FeatureFrames:
    """Per-frame conditioning at a 5 ms hop.

    mel is [B, n_mels] (normalised log-mel), f0 is [B] in Hz with 0 for
    unvoiced frames and loudness is [B] in [0, 1].
    """

    mel: Array
    f0: Array
    loudness: Array

    def __post_init__(self) -> None:
        frames = self.mel.shape[0]
        if self.f0.shape != (frames,) or self.loudness.shape != (frames,):
            raise DimensionError(
                f"Feature frame counts differ: mel {self.mel.shape}, "
                f"f0 {self.f0.shape}, loudness {self.loudness.shape}."
            )

    @property
    def num_frames(self) -> int:
        return self.mel.shape[0]

    def crop(self, start: int, count: int) -> "FeatureFrames":
        stop = start + count
        return FeatureFrames(
            mel=self.mel[start:stop],
            f0=self.f0[start:stop],
            loudness=self.loudness[start:stop],
        )
