import logging
from enum import Enum
from pathlib import Path

import numpy as np
import soundfile as sf

from lilyvoc.domain.values.audio import AudioBuffer
from lilyvoc.error import CorruptFileError, NotFoundError

logger = logging.getLogger(__name__)


class Subtype(str, Enum):
    PCM_16 = "PCM_16"
    PCM_24 = "PCM_24"
    FLOAT = "FLOAT"


class WavDriver:
    """Reads and writes mono RIFF WAV files through libsndfile."""

    def read(self, path: Path) -> AudioBuffer:
        if not path.is_file():
            raise NotFoundError(f"WAV file '{path}' not found.")
        try:
            data, sample_rate = sf.read(path, dtype="float64", always_2d=True)
        except RuntimeError as error:
            raise CorruptFileError(f"Cannot decode '{path}': {error}.") from error
        if data.shape[1] > 1:
            logger.warning(f"'{path}' has {data.shape[1]} channels; using the first.")
        return AudioBuffer.from_array(data[:, 0], int(sample_rate))

    def write(
        self, path: Path, audio: AudioBuffer, subtype: Subtype = Subtype.FLOAT
    ) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        samples = audio.numpy()
        if subtype is not Subtype.FLOAT:
            samples = np.clip(samples, -1.0, 1.0)
        sf.write(
            path,
            samples.astype(np.float32),
            audio.sample_rate,
            subtype=subtype.value,
            format="WAV",
        )
