from collections.abc import Sequence
from dataclasses import dataclass

from lilyvoc.domain.values.audio import AudioBuffer
from lilyvoc.domain.values.discriminator import DiscriminatorOutput
from lilyvoc.domain.values.spectral import MelConfig, StftConfig
from lilyvoc.dsp.mel import (
    FEATURE_RATE,
    INSTRUCTIVE_MELS,
    LOG_FLOOR,
    feature_mel_config,
    instructive_mel_config,
    mel_spectrogram,
)
from lilyvoc.dsp.stft import stft_magnitude
from lilyvoc.engine import functional as F
from lilyvoc.engine.tensor import Tensor
from lilyvoc.error import BadRequestError, DimensionError
from lilyvoc.models.config import STFT_SETS, LossSection

SC_FLOOR = 1e-12


@dataclass(frozen=True)
class LossWeights:
    spectral: float = 10.0
    feature_match: float = 1.0
    mel: float = 1.0
    adversarial: float = 120.0

    def __post_init__(self) -> None:
        if min(self.spectral, self.feature_match, self.mel, self.adversarial) <= 0:
            raise BadRequestError(f"Loss weights must be strictly positive: {self}.")

    @classmethod
    def from_config(cls, config: LossSection) -> "LossWeights":
        return cls(
            spectral=config.lambda_sp,
            feature_match=config.lambda_fm,
            mel=config.lambda_mel,
            adversarial=config.lambda_adv,
        )


@dataclass(frozen=True)
class GeneratorLosses:
    spectral: Tensor
    feature_match: Tensor
    mel_instructive: Tensor
    mel_full: Tensor
    adversarial: Tensor


def stft_configs(sets: Sequence[tuple[int, int, int]] = STFT_SETS) -> list[StftConfig]:
    return [StftConfig(fft_size=fft, hop=hop, win_length=win) for fft, hop, win in sets]


def _check_pair(x: AudioBuffer, y: AudioBuffer) -> None:
    if x.sample_rate != y.sample_rate:
        raise BadRequestError(
            f"Cannot compare audio at {x.sample_rate} Hz with {y.sample_rate} Hz."
        )
    if len(x) != len(y):
        raise DimensionError(f"Audio lengths differ: {len(x)} and {len(y)}.")


def spectral_loss(
    x: AudioBuffer,
    y: AudioBuffer,
    configs: Sequence[StftConfig] | None = None,
) -> Tensor:
    """Spectral convergence plus mean log-magnitude L1, averaged over resolutions.

    x is the generated audio and y the reference.
    """
    _check_pair(x, y)
    configs = configs or stft_configs()
    total = Tensor(0.0)
    for config in configs:
        generated = stft_magnitude(x, config).frames
        reference = stft_magnitude(y, config).frames
        norm = F.l2_norm(reference).maximum(SC_FLOOR)
        convergence = F.l2_norm(reference - generated) / norm
        log_distance = F.l1_distance(
            (reference + LOG_FLOOR).log(), (generated + LOG_FLOOR).log()
        )
        total = total + convergence + log_distance
    return total * (1.0 / len(configs))


def mel_config_for(sample_rate: int, n_mels: int = INSTRUCTIVE_MELS) -> MelConfig:
    """Feature analysis at 48 kHz, the rate-scaled analysis otherwise."""
    if sample_rate == FEATURE_RATE:
        return feature_mel_config()
    return instructive_mel_config(sample_rate, n_mels)


def mel_loss(x: AudioBuffer, y: AudioBuffer, config: MelConfig | None = None) -> Tensor:
    """Mean absolute log-mel difference at the rate of the pair."""
    _check_pair(x, y)
    config = config or mel_config_for(x.sample_rate)
    return F.l1_distance(mel_spectrogram(x, config), mel_spectrogram(y, config))


def _check_structure(real: DiscriminatorOutput, fake: DiscriminatorOutput) -> None:
    if len(real) != len(fake) or any(
        len(r) != len(f) for r, f in zip(real.features, fake.features, strict=True)
    ):
        raise DimensionError(
            f"Discriminator outputs differ: {len(real)} and {len(fake)} "
            "sub-discriminators or mismatched layer counts."
        )


def feature_match_loss(real: DiscriminatorOutput, fake: DiscriminatorOutput) -> Tensor:
    """Mean over sub-discriminators and layers of the mean absolute difference."""
    _check_structure(real, fake)
    total = Tensor(0.0)
    for real_maps, fake_maps in zip(real.features, fake.features, strict=True):
        layers = Tensor(0.0)
        for r, f in zip(real_maps, fake_maps, strict=True):
            if r.shape != f.shape:
                raise DimensionError(
                    f"Feature maps differ in shape: {r.shape} and {f.shape}."
                )
            layers = layers + F.l1_distance(f, r.detach())
        total = total + layers * (1.0 / len(real_maps))
    return total * (1.0 / len(real))


def generator_adversarial_loss(fake: DiscriminatorOutput) -> Tensor:
    total = Tensor(0.0)
    for logits in fake.logits:
        total = total + ((1.0 - logits) ** 2).mean()
    return total * (1.0 / len(fake))


def discriminator_adversarial_loss(
    real: DiscriminatorOutput, fake: DiscriminatorOutput
) -> Tensor:
    if len(real) != len(fake):
        raise DimensionError(
            f"Discriminator outputs differ: {len(real)} and {len(fake)} logits."
        )
    total = Tensor(0.0)
    for r, f in zip(real.logits, fake.logits, strict=True):
        total = total + ((1.0 - r) ** 2).mean() + (f**2).mean()
    return total * (1.0 / len(real))


def adversarial_losses(
    real: DiscriminatorOutput, fake: DiscriminatorOutput
) -> tuple[Tensor, Tensor]:
    """Least-squares (generator, discriminator) objectives."""
    return generator_adversarial_loss(fake), discriminator_adversarial_loss(real, fake)


def generator_total(losses: GeneratorLosses, weights: LossWeights) -> Tensor:
    return (
        losses.spectral * weights.spectral
        + losses.feature_match * weights.feature_match
        + (losses.mel_instructive + losses.mel_full) * weights.mel
        + losses.adversarial * weights.adversarial
    )


def non_adversarial_total(losses: GeneratorLosses, weights: LossWeights) -> float:
    """Weighted reconstruction terms only; tracks overfitting progress."""
    return (
        losses.spectral.item() * weights.spectral
        + (losses.mel_instructive.item() + losses.mel_full.item()) * weights.mel
    )
