from lilyvoc.training.losses import (
    GeneratorLosses,
    LossWeights,
    adversarial_losses,
    feature_match_loss,
    generator_total,
    mel_loss,
    spectral_loss,
)
from lilyvoc.training.optimizer import AdamW, AdamWConfig, OptimizerState, adamw_step
from lilyvoc.training.schedule import LrSchedule, lr_at
from lilyvoc.training.trainer import Trainer, train_step

__all__ = [
    "AdamW",
    "AdamWConfig",
    "GeneratorLosses",
    "LossWeights",
    "LrSchedule",
    "OptimizerState",
    "Trainer",
    "adamw_step",
    "adversarial_losses",
    "feature_match_loss",
    "generator_total",
    "lr_at",
    "mel_loss",
    "spectral_loss",
    "train_step",
]
