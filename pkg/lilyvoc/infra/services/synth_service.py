import logging
import time
from pathlib import Path

from lilyvoc.dependencies import build_generator
from lilyvoc.domain.entities.feature_file import FeatureFile
from lilyvoc.domain.values.audio import AudioBuffer
from lilyvoc.domain.values.features import FeatureFrames
from lilyvoc.engine.rng import Rng
from lilyvoc.engine.tensor import no_grad
from lilyvoc.error import ConflictError
from lilyvoc.infra.drivers.wav_driver import Subtype, WavDriver
from lilyvoc.infra.repositories.checkpoint_repository import CheckpointRepository
from lilyvoc.infra.repositories.feature_repository import FeatureRepository
from lilyvoc.models.config import RunConfig
from lilyvoc.models.report import SynthReport
from lilyvoc.networks.generator import Generator

logger = logging.getLogger(__name__)

SYNTH_STREAM = 2


def check_features(feature_file: FeatureFile, config: RunConfig, source: str) -> None:
    if feature_file.sample_rate != config.audio.sample_rate:
        raise ConflictError(
            f"'{source}' targets {feature_file.sample_rate} Hz, the checkpoint "
            f"{config.audio.sample_rate} Hz."
        )
    if feature_file.hop != config.features.hop:
        raise ConflictError(
            f"'{source}' uses hop {feature_file.hop}, the checkpoint "
            f"{config.features.hop}."
        )
    mel = feature_file.arrays.get("mel")
    if mel is None or mel.ndim != 2 or mel.shape[1] != config.features.n_mels:
        shape = None if mel is None else mel.shape
        raise ConflictError(
            f"'{source}' has mel shape {shape}, the checkpoint expects "
            f"{config.features.n_mels} bins."
        )


def synthesize(generator: Generator, features: FeatureFrames, seed: int) -> AudioBuffer:
    """Inference pass: no graph, no reverberated instructive render."""
    with no_grad():
        output = generator(features, Rng(seed).child(SYNTH_STREAM), training=False)
    return output.audio


class SynthService:
    checkpoints: CheckpointRepository
    wav_driver: WavDriver

    def __init__(
        self, checkpoints: CheckpointRepository, wav_driver: WavDriver
    ) -> None:
        self.checkpoints = checkpoints
        self.wav_driver = wav_driver

    def load_generator(self, path: Path) -> tuple[Generator, RunConfig]:
        checkpoint = self.checkpoints.load(path)
        generator = build_generator(checkpoint.config)
        generator.load_state_dict(checkpoint.generator)
        return generator, checkpoint.config

    async def run(
        self,
        checkpoint_path: Path,
        feature_path: Path,
        output: Path,
        stats_path: Path | None = None,
        seed: int | None = None,
    ) -> SynthReport:
        generator, config = self.load_generator(checkpoint_path)
        repository = FeatureRepository(feature_path.parent)
        feature_file = await repository.load(feature_path)
        check_features(feature_file, config, str(feature_path))
        stats = await repository.load(stats_path or repository.stats_path)
        features = feature_file.to_frames(stats)

        started = time.perf_counter()
        audio = synthesize(
            generator, features, config.train.seed if seed is None else seed
        )
        seconds = time.perf_counter() - started
        self.wav_driver.write(output, audio, Subtype.FLOAT)

        report = SynthReport(
            output=str(output),
            samples=len(audio),
            seconds=seconds,
            rtf=seconds / audio.duration,
        )
        logger.info(
            f"Wrote {report.samples} samples to '{output}' (RTF {report.rtf:.3f})."
        )
        return report
