from dataclasses import dataclass

from lilyvoc.domain.values.audio import AudioBuffer
from lilyvoc.domain.values.features import FeatureFrames
from lilyvoc.error import DimensionError


@dataclass(frozen=True)
class TrainingItem:
    """Aligned features, output-rate target and instructive-rate target."""

    features: FeatureFrames
    target: AudioBuffer
    instructive: AudioBuffer

    def __post_init__(self) -> None:
        frames = self.features.num_frames
        if len(self.target) % frames or len(self.instructive) % frames:
            raise DimensionError(
                f"Targets of {len(self.target)} and {len(self.instructive)} "
                f"samples do not align with {frames} frames."
            )
