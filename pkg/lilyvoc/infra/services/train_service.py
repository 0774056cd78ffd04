import logging
from pathlib import Path

from lilyvoc.dependencies import build_discriminator, build_generator
from lilyvoc.domain.entities.checkpoint import Checkpoint, Precision
from lilyvoc.domain.values.audio import AudioBuffer
from lilyvoc.domain.values.batch import TrainingItem
from lilyvoc.engine.rng import Rng
from lilyvoc.error import ConflictError, CorruptFileError, NotFoundError
from lilyvoc.infra.drivers.wav_driver import WavDriver
from lilyvoc.infra.repositories.checkpoint_repository import CheckpointRepository
from lilyvoc.infra.repositories.feature_repository import FeatureRepository
from lilyvoc.infra.repositories.metrics_repository import MetricsRepository
from lilyvoc.models.config import RunConfig
from lilyvoc.models.report import TrainReport
from lilyvoc.synth.interpolate import control_hop
from lilyvoc.training.optimizer import AdamW, AdamWConfig, OptimizerState
from lilyvoc.training.trainer import CROP_STREAM, Trainer

logger = logging.getLogger(__name__)

OPTIMIZER_PREFIX = "adam"


def _slice(audio: AudioBuffer, start: int, stop: int) -> AudioBuffer:
    return AudioBuffer.from_array(audio.numpy()[start:stop], audio.sample_rate)


class TrainingDataset:
    """Whole clips in memory; batches are random crops of them."""

    items: list[TrainingItem]
    hop: int
    instructive_hop: int

    def __init__(
        self, items: list[TrainingItem], hop: int, instructive_hop: int
    ) -> None:
        if not items:
            raise NotFoundError("Training set is empty.")
        self.items = items
        self.hop = hop
        self.instructive_hop = instructive_hop

    @classmethod
    async def load(
        cls, repository: FeatureRepository, wav_driver: WavDriver, config: RunConfig
    ) -> "TrainingDataset":
        rate = config.audio.sample_rate
        instructive_rate = config.audio.instructive_rate
        hop = config.features.hop
        instructive_hop = control_hop(instructive_rate)
        stats = await repository.load_stats()
        items: list[TrainingItem] = []
        for stem in repository.stems():
            feature_file = await repository.load_clip(stem)
            if feature_file.sample_rate != rate or feature_file.hop != hop:
                raise ConflictError(
                    f"'{stem}' was extracted at {feature_file.sample_rate} Hz with "
                    f"hop {feature_file.hop}; config wants {rate} Hz and hop {hop}."
                )
            features = feature_file.to_frames(stats)
            if features.mel.shape[1] != config.features.n_mels:
                raise ConflictError(
                    f"'{stem}' has {features.mel.shape[1]} mel bins, config wants "
                    f"{config.features.n_mels}."
                )
            target = wav_driver.read(repository.target_path(stem))
            instructive = wav_driver.read(
                repository.instructive_path(stem, instructive_rate)
            )
            frames = features.num_frames
            if (
                target.sample_rate != rate
                or instructive.sample_rate != instructive_rate
                or len(target) != frames * hop
                or len(instructive) != frames * instructive_hop
            ):
                raise CorruptFileError(
                    f"Audio targets of '{stem}' do not match its {frames} frames."
                )
            items.append(TrainingItem(features, target, instructive))
        logger.info(f"Loaded {len(items)} training clips from '{repository.root}'.")
        return cls(items, hop, instructive_hop)

    def sample(self, rng: Rng, crop_frames: int) -> TrainingItem:
        """A random clip cut to `crop_frames` frames (or whole, if shorter)."""
        item = self.items[rng.integers(0, len(self.items))]
        frames = item.features.num_frames
        count = min(crop_frames, frames)
        start = rng.integers(0, frames - count + 1)
        stop = start + count
        return TrainingItem(
            features=item.features.crop(start, count),
            target=_slice(item.target, start * self.hop, stop * self.hop),
            instructive=_slice(
                item.instructive,
                start * self.instructive_hop,
                stop * self.instructive_hop,
            ),
        )


def make_checkpoint(trainer: Trainer) -> Checkpoint:
    return Checkpoint(
        config=trainer.config,
        step=trainer.step,
        generator=trainer.generator.state_dict(),
        discriminator=trainer.discriminator.state_dict(),
        g_optimizer=trainer.g_optimizer.state.state_dict(OPTIMIZER_PREFIX),
        d_optimizer=trainer.d_optimizer.state.state_dict(OPTIMIZER_PREFIX),
    )


def restore_trainer(checkpoint: Checkpoint, config: RunConfig) -> Trainer:
    """Rebuild a trainer from `checkpoint`, continuing under `config`."""
    if checkpoint.config.model_fingerprint() != config.model_fingerprint():
        raise ConflictError(
            f"Checkpoint at step {checkpoint.step} was trained with a different "
            "model configuration; refusing to resume."
        )
    if not checkpoint.trainable:
        raise ConflictError("Inference-only checkpoints cannot resume training.")
    generator = build_generator(config)
    discriminator = build_discriminator(config)
    generator.load_state_dict(checkpoint.generator)
    discriminator.load_state_dict(checkpoint.discriminator)
    adamw = AdamWConfig.from_config(config.optim)
    return Trainer(
        config,
        generator,
        discriminator,
        g_optimizer=AdamW(
            generator,
            adamw,
            OptimizerState.from_state_dict(checkpoint.g_optimizer, OPTIMIZER_PREFIX),
        ),
        d_optimizer=AdamW(
            discriminator,
            adamw,
            OptimizerState.from_state_dict(checkpoint.d_optimizer, OPTIMIZER_PREFIX),
        ),
        step=checkpoint.step,
    )


class TrainService:
    config: RunConfig
    dataset: TrainingDataset
    checkpoints: CheckpointRepository
    metrics: MetricsRepository

    def __init__(
        self,
        config: RunConfig,
        dataset: TrainingDataset,
        checkpoints: CheckpointRepository,
        metrics: MetricsRepository,
    ) -> None:
        self.config = config
        self.dataset = dataset
        self.checkpoints = checkpoints
        self.metrics = metrics

    def prepare(self) -> Trainer:
        """Resume from the latest checkpoint, or start fresh."""
        latest = self.checkpoints.latest()
        if latest is None:
            logger.info("No checkpoint found; starting from step 0.")
            trainer = Trainer(
                self.config,
                build_generator(self.config),
                build_discriminator(self.config),
            )
        else:
            trainer = restore_trainer(self.checkpoints.load(latest), self.config)
            logger.info(f"Resuming from '{latest}' at step {trainer.step}.")
        _ = self.metrics.truncate_after(trainer.step)
        return trainer

    def run(self, steps: int | None = None) -> tuple[Trainer, TrainReport]:
        total = self.config.train.steps if steps is None else steps
        trainer = self.prepare()
        start = trainer.step
        batch_size = self.config.train.batch_size
        crop = self.config.train.crop_frames
        every = self.config.train.checkpoint_every
        saved: Path | None = None
        while trainer.step < total:
            batch = [
                self.dataset.sample(trainer.item_rng(index, CROP_STREAM), crop)
                for index in range(batch_size)
            ]
            self.metrics.append(trainer.train_step(batch))
            if trainer.step % every == 0 or trainer.step == total:
                saved = self.checkpoints.save(make_checkpoint(trainer))
        if trainer.step == start:
            logger.info(f"Already at step {start}; nothing to train.")
        report = TrainReport(
            start_step=start,
            final_step=trainer.step,
            checkpoint=str(saved) if saved else None,
        )
        return trainer, report

    def export(
        self, trainer: Trainer, path: Path, precision: Precision = Precision.F32
    ) -> Path:
        """Write an inference-only checkpoint holding just the generator."""
        checkpoint = Checkpoint(
            config=trainer.config,
            step=trainer.step,
            generator=trainer.generator.state_dict(),
            precision=precision,
        )
        return self.checkpoints.save(checkpoint, path)
