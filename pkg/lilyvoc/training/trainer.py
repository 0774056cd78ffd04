import logging
from collections.abc import Iterable, Sequence
from contextlib import nullcontext

from lilyvoc.domain.values.audio import AudioBuffer
from lilyvoc.domain.values.batch import TrainingItem
from lilyvoc.engine.rng import Rng
from lilyvoc.engine.tensor import Tensor, backward, detect_anomaly, no_grad
from lilyvoc.error import InternalError
from lilyvoc.models.config import RunConfig
from lilyvoc.models.metrics import MetricsRecord
from lilyvoc.networks.discriminators import MultiDiscriminator
from lilyvoc.networks.generator import Generator
from lilyvoc.training.losses import (
    GeneratorLosses,
    LossWeights,
    discriminator_adversarial_loss,
    feature_match_loss,
    generator_adversarial_loss,
    generator_total,
    mel_config_for,
    mel_loss,
    non_adversarial_total,
    spectral_loss,
    stft_configs,
)
from lilyvoc.training.optimizer import AdamW, AdamWConfig, clip_grad_norm
from lilyvoc.training.schedule import LrSchedule

logger = logging.getLogger(__name__)

NOISE_STREAM = 0
CROP_STREAM = 1


class Trainer:
    """Alternating least-squares GAN updates: discriminator first, then generator."""

    config: RunConfig
    generator: Generator
    discriminator: MultiDiscriminator
    g_optimizer: AdamW
    d_optimizer: AdamW
    schedule: LrSchedule
    weights: LossWeights
    step: int

    def __init__(
        self,
        config: RunConfig,
        generator: Generator,
        discriminator: MultiDiscriminator,
        g_optimizer: AdamW | None = None,
        d_optimizer: AdamW | None = None,
        step: int = 0,
    ) -> None:
        adamw = AdamWConfig.from_config(config.optim)
        self.config = config
        self.generator = generator
        self.discriminator = discriminator
        self.g_optimizer = g_optimizer or AdamW(generator, adamw)
        self.d_optimizer = d_optimizer or AdamW(discriminator, adamw)
        self.schedule = LrSchedule.from_config(config.optim)
        self.weights = LossWeights.from_config(config.loss)
        self.step = step
        self._stft_configs = stft_configs(config.loss.stft_sets)
        self._instructive_mel = mel_config_for(
            config.audio.instructive_rate, config.features.instructive_mels
        )

    def item_rng(self, item: int, stream: int = NOISE_STREAM) -> Rng:
        """Draws of one batch item at the current step; resumable by construction."""
        return Rng(self.config.train.seed).child(self.step, item, stream)

    def generator_losses(
        self,
        item: TrainingItem,
        audio: AudioBuffer,
        instructive: AudioBuffer,
    ) -> GeneratorLosses:
        fake = self.discriminator(audio)
        with no_grad():
            real = self.discriminator(item.target)
        return GeneratorLosses(
            spectral=spectral_loss(audio, item.target, self._stft_configs),
            feature_match=feature_match_loss(real, fake),
            mel_instructive=mel_loss(
                instructive, item.instructive, self._instructive_mel
            ),
            mel_full=mel_loss(audio, item.target),
            adversarial=generator_adversarial_loss(fake),
        )

    def train_step(self, batch: Sequence[TrainingItem]) -> MetricsRecord:
        if not batch:
            raise InternalError("train_step() received an empty batch.")
        guard = detect_anomaly() if self.config.train.detect_anomaly else nullcontext()
        with guard:
            return self._train_step(batch)

    def _train_step(self, batch: Sequence[TrainingItem]) -> MetricsRecord:
        lr = self.schedule.lr_at(self.step + 1)
        scale = 1.0 / len(batch)
        clip = self.config.optim.grad_clip

        outputs = [
            self.generator(item.features, self.item_rng(index))
            for index, item in enumerate(batch)
        ]

        # Discriminator update on detached fakes.
        self.discriminator.zero_grad()
        d_loss = Tensor(0.0)
        for item, output in zip(batch, outputs, strict=True):
            fake = AudioBuffer(output.audio.samples.detach(), output.audio.sample_rate)
            d_loss = d_loss + discriminator_adversarial_loss(
                self.discriminator(item.target), self.discriminator(fake)
            )
        d_loss = d_loss * scale
        _ = backward(d_loss)
        grad_norm_d = clip_grad_norm(self.discriminator, clip)
        self.d_optimizer.step(lr)

        # Generator update against the refreshed discriminator.
        self.generator.zero_grad()
        self.discriminator.zero_grad()
        g_loss = Tensor(0.0)
        terms: list[GeneratorLosses] = []
        for item, output in zip(batch, outputs, strict=True):
            if output.instructive is None:
                raise InternalError("Generator skipped the instructive render.")
            losses = self.generator_losses(item, output.audio, output.instructive)
            terms.append(losses)
            g_loss = g_loss + generator_total(losses, self.weights)
        g_loss = g_loss * scale
        _ = backward(g_loss)
        grad_norm_g = clip_grad_norm(self.generator, clip)
        self.g_optimizer.step(lr)
        self.discriminator.zero_grad()

        self.step += 1
        record = MetricsRecord(
            step=self.step,
            lr=lr,
            loss_sp=_mean(t.spectral.item() for t in terms),
            loss_fm=_mean(t.feature_match.item() for t in terms),
            loss_mel_8k=_mean(t.mel_instructive.item() for t in terms),
            loss_mel_48k=_mean(t.mel_full.item() for t in terms),
            loss_adv_g=_mean(t.adversarial.item() for t in terms),
            loss_adv_d=d_loss.item(),
            loss_g_total=g_loss.item(),
            loss_non_adv=_mean(non_adversarial_total(t, self.weights) for t in terms),
            grad_norm_g=grad_norm_g,
            grad_norm_d=grad_norm_d,
        )
        if self.step % self.config.train.log_every == 0:
            logger.info(
                f"Step {record.step}: G {record.loss_g_total:.4f}, "
                f"D {record.loss_adv_d:.4f}, lr {record.lr:.3g}."
            )
        return record


def _mean(values: Iterable[float]) -> float:
    items = list(values)
    return sum(items) / len(items)


def train_step(trainer: Trainer, batch: Sequence[TrainingItem]) -> MetricsRecord:
    return trainer.train_step(batch)
