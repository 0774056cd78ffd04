"""Toy-scale comparison of training with the BridgeNet latent and with zeros.

Both runs share seeds, data and schedule; only `train.latent_ablation`
differs. Writes a table of 48 kHz mel loss per step and, when matplotlib is
installed, a plot.
"""

import argparse
import logging
from pathlib import Path

import numpy as np

from lilyvoc.config import configure_logging, log_settings
from lilyvoc.dependencies import build_discriminator, build_generator
from lilyvoc.domain.entities.feature_file import FeatureFile
from lilyvoc.domain.values.audio import AudioBuffer
from lilyvoc.domain.values.batch import TrainingItem
from lilyvoc.infra.services.extract_service import corpus_stats, extract_clip
from lilyvoc.infra.services.train_service import TrainingDataset
from lilyvoc.models.config import RunConfig
from lilyvoc.synth.interpolate import control_hop
from lilyvoc.training.trainer import CROP_STREAM, Trainer

logger = logging.getLogger(__name__)

CLIP_SECONDS = 2.0
SMOOTHING = 10


def singing_clip(sample_rate: int, seconds: float = CLIP_SECONDS) -> AudioBuffer:
    """A vibrato tone with decaying harmonics and a little breath noise."""
    t = np.arange(round(sample_rate * seconds)) / sample_rate
    f0 = 220.0 * (1.0 + 0.02 * np.sin(2.0 * np.pi * 5.0 * t))
    phase = 2.0 * np.pi * np.cumsum(f0) / sample_rate
    voice = sum(np.sin(k * phase) / k for k in range(1, 9))
    breath = np.random.default_rng(0).normal(0.0, 0.01, t.shape)
    return AudioBuffer.from_array(0.3 * voice + breath, sample_rate)


def toy_dataset(config: RunConfig) -> TrainingDataset:
    clip = extract_clip(singing_clip(config.audio.sample_rate), config)
    stats = corpus_stats([clip.features.mel], config)
    stored = FeatureFile.from_frames(
        clip.features, config.audio.sample_rate, config.features.hop
    )
    item = TrainingItem(stored.to_frames(stats), clip.target, clip.instructive)
    return TrainingDataset(
        [item], config.features.hop, control_hop(config.audio.instructive_rate)
    )


def train_curve(
    config: RunConfig, dataset: TrainingDataset, steps: int
) -> list[float]:
    trainer = Trainer(config, build_generator(config), build_discriminator(config))
    curve: list[float] = []
    while trainer.step < steps:
        batch = [
            dataset.sample(
                trainer.item_rng(index, CROP_STREAM), config.train.crop_frames
            )
            for index in range(config.train.batch_size)
        ]
        curve.append(trainer.train_step(batch).loss_mel_48k)
    return curve


def smooth(curve: list[float], width: int = SMOOTHING) -> list[float]:
    return [
        float(np.mean(curve[max(0, i - width + 1) : i + 1]))
        for i in range(len(curve))
    ]


def steps_to(curve: list[float], threshold: float) -> int | None:
    for step, value in enumerate(smooth(curve), start=1):
        if value <= threshold:
            return step
    return None


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=300)
    parser.add_argument(
        "--threshold",
        type=float,
        help="Mel loss target (default: 90%% of the ablated run's final value).",
    )
    parser.add_argument("--out", type=Path, default=Path("runs/convergence"))
    args = parser.parse_args()
    configure_logging(log_settings)

    base = RunConfig.toy()
    dataset = toy_dataset(base)
    curves: dict[str, list[float]] = {}
    for name, ablate in (("latent", False), ("zeros", True)):
        config = base.model_copy(
            update={"train": base.train.model_copy(update={"latent_ablation": ablate})}
        )
        logger.info(f"Training the '{name}' run for {args.steps} steps.")
        curves[name] = train_curve(config, dataset, args.steps)

    threshold = args.threshold or 0.9 * smooth(curves["zeros"])[-1]
    args.out.mkdir(parents=True, exist_ok=True)
    table = args.out / "mel_loss.tsv"
    pairs = zip(curves["latent"], curves["zeros"], strict=True)
    rows = ["step\tlatent\tzeros"] + [
        f"{step}\t{a:.6f}\t{b:.6f}" for step, (a, b) in enumerate(pairs, start=1)
    ]
    _ = table.write_text("\n".join(rows) + "\n", encoding="utf-8")
    for name, curve in curves.items():
        logger.info(
            f"'{name}' reaches mel loss {threshold:.4f} at step "
            f"{steps_to(curve, threshold)}."
        )

    try:
        import matplotlib.pyplot as plt
    except ImportError:
        logger.info(f"matplotlib not installed; table written to '{table}'.")
        return
    figure, axis = plt.subplots(figsize=(6, 4))
    for name, curve in curves.items():
        axis.plot(smooth(curve), label=name)
    axis.axhline(threshold, color="grey", linestyle="--", linewidth=0.8)
    axis.set_xlabel("step")
    axis.set_ylabel("48 kHz mel loss")
    axis.legend()
    figure.tight_layout()
    figure.savefig(args.out / "mel_loss.png", dpi=120)
    logger.info(f"Wrote '{table}' and the plot to '{args.out}'.")


if __name__ == "__main__":
    main()
