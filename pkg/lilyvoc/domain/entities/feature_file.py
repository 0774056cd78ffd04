from dataclasses import dataclass, field

import numpy as np

from lilyvoc.domain.values.features import FeatureFrames
from lilyvoc.engine.tensor import Array
from lilyvoc.error import CorruptFileError, DimensionError

FEATURE_ARRAYS = ("mel", "f0", "loudness")


@dataclass
class FeatureFile:
    """Per-clip features or corpus statistics as stored on disk.

    Every entry of `arrays` has `frames` rows; `stats` carries the corpus mel
    mean and std used for normalisation.
    """

    sample_rate: int
    hop: int
    frames: int
    arrays: dict[str, Array] = field(default_factory=dict)
    stats: dict[str, Array] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name, array in self.arrays.items():
            if array.ndim == 0 or array.shape[0] != self.frames:
                raise DimensionError(
                    f"Array '{name}' has shape {array.shape}, expected "
                    f"{self.frames} frames."
                )

    @classmethod
    def from_frames(
        cls, features: FeatureFrames, sample_rate: int, hop: int
    ) -> "FeatureFile":
        return cls(
            sample_rate=sample_rate,
            hop=hop,
            frames=features.num_frames,
            arrays={
                "mel": features.mel,
                "f0": features.f0,
                "loudness": features.loudness,
            },
        )

    def to_frames(self, stats: "FeatureFile | None" = None) -> FeatureFrames:
        """Features with the mel z-scored by `stats` when given."""
        missing = [name for name in FEATURE_ARRAYS if name not in self.arrays]
        if missing:
            raise CorruptFileError(f"Feature file lacks arrays {missing}.")
        mel = self.arrays["mel"]
        if stats is not None:
            mel = (mel - stats.stats["mel_mean"]) / stats.stats["mel_std"]
        return FeatureFrames(
            mel=np.asarray(mel, dtype=np.float64),
            f0=self.arrays["f0"],
            loudness=self.arrays["loudness"],
        )
