from pathlib import Path

from lilyvoc.engine.rng import Rng
from lilyvoc.infra.drivers.wav_driver import WavDriver
from lilyvoc.infra.repositories.checkpoint_repository import CheckpointRepository
from lilyvoc.infra.repositories.feature_repository import FeatureRepository
from lilyvoc.infra.repositories.metrics_repository import MetricsRepository
from lilyvoc.models.config import RunConfig
from lilyvoc.networks.discriminators import MultiDiscriminator
from lilyvoc.networks.generator import Generator

GENERATOR_STREAM = 0
DISCRIMINATOR_STREAM = 1


def build_generator(config: RunConfig) -> Generator:
    return Generator(Rng(config.init.seed).child(GENERATOR_STREAM), config)


def build_discriminator(config: RunConfig) -> MultiDiscriminator:
    rng = Rng(config.init.seed).child(DISCRIMINATOR_STREAM)
    return MultiDiscriminator(rng, config.mpd, config.mrmbsd)


def get_wav_driver() -> WavDriver:
    return WavDriver()


def get_feature_repository(root: Path | None, config: RunConfig) -> FeatureRepository:
    return FeatureRepository(root or Path(config.paths.data_dir))


def get_checkpoint_repository(
    root: Path | None, config: RunConfig
) -> CheckpointRepository:
    return CheckpointRepository(root or Path(config.paths.checkpoint_dir))


def get_metrics_repository(path: Path | None, config: RunConfig) -> MetricsRepository:
    return MetricsRepository(path or Path(config.paths.metrics_file))
