import logging
import math
from pathlib import Path

import numpy as np

from lilyvoc.domain.values.audio import AudioBuffer
from lilyvoc.dsp.pitch import yin_pitch
from lilyvoc.engine.tensor import no_grad
from lilyvoc.error import BadRequestError, NotFoundError
from lilyvoc.infra.drivers.wav_driver import WavDriver
from lilyvoc.models.config import RunConfig
from lilyvoc.models.report import EvalReport, PairReport
from lilyvoc.training.losses import (
    mel_config_for,
    mel_loss,
    spectral_loss,
    stft_configs,
)

logger = logging.getLogger(__name__)

REPORT_NAME = "report.json"


def _head(audio: AudioBuffer, length: int) -> AudioBuffer:
    return AudioBuffer.from_array(audio.numpy()[:length], audio.sample_rate)


def f0_rmse(
    reference: AudioBuffer, generated: AudioBuffer, config: RunConfig
) -> tuple[float, int]:
    """RMS F0 difference in Hz over frames voiced in both signals."""
    features = config.features
    f0_ref, f0_gen = (
        yin_pitch(
            audio,
            f0_min=features.f0_min,
            f0_max=features.f0_max,
            threshold=features.yin_threshold,
        )
        for audio in (reference, generated)
    )
    voiced = (f0_ref > 0) & (f0_gen > 0)
    count = int(voiced.sum())
    if count == 0:
        return 0.0, 0
    return float(np.sqrt(np.mean((f0_ref[voiced] - f0_gen[voiced]) ** 2))), count


def compare(
    stem: str, reference: AudioBuffer, generated: AudioBuffer, config: RunConfig
) -> PairReport:
    if reference.sample_rate != generated.sample_rate:
        raise BadRequestError(
            f"'{stem}': reference is {reference.sample_rate} Hz, generated is "
            f"{generated.sample_rate} Hz."
        )
    length = min(len(reference), len(generated))
    if len(reference) != len(generated):
        logger.warning(
            f"'{stem}': lengths {len(reference)} and {len(generated)} differ; "
            f"comparing the first {length} samples."
        )
        reference = _head(reference, length)
        generated = _head(generated, length)
    with no_grad():
        spectral = spectral_loss(
            generated, reference, stft_configs(config.loss.stft_sets)
        ).item()
        mel = mel_loss(
            generated,
            reference,
            mel_config_for(reference.sample_rate, config.features.instructive_mels),
        ).item()
    rmse, voiced = f0_rmse(reference, generated, config)
    return PairReport(
        stem=stem, spectral=spectral, mel=mel, f0_rmse=rmse, voiced_frames=voiced
    )


class EvalService:
    config: RunConfig
    wav_driver: WavDriver

    def __init__(self, config: RunConfig, wav_driver: WavDriver) -> None:
        self.config = config
        self.wav_driver = wav_driver

    def run(
        self, ref_dir: Path, gen_dir: Path, output: Path | None = None
    ) -> EvalReport:
        for directory in (ref_dir, gen_dir):
            if not directory.is_dir():
                raise NotFoundError(f"Directory '{directory}' not found.")
        references = {path.stem: path for path in ref_dir.glob("*.wav")}
        generated = {path.stem: path for path in gen_dir.glob("*.wav")}
        stems = sorted(references.keys() & generated.keys())
        unpaired = sorted(references.keys() ^ generated.keys())
        for stem in unpaired:
            logger.warning(f"'{stem}' has no counterpart; excluded.")
        if not stems:
            raise BadRequestError(f"No paired files in '{ref_dir}' and '{gen_dir}'.")

        pairs = [
            compare(
                stem,
                self.wav_driver.read(references[stem]),
                self.wav_driver.read(generated[stem]),
                self.config,
            )
            for stem in stems
        ]
        report = EvalReport(
            pairs=pairs,
            unpaired=unpaired,
            mean_spectral=math.fsum(pair.spectral for pair in pairs) / len(pairs),
            mean_mel=math.fsum(pair.mel for pair in pairs) / len(pairs),
            mean_f0_rmse=math.fsum(pair.f0_rmse for pair in pairs) / len(pairs),
        )
        output = output or gen_dir / REPORT_NAME
        output.parent.mkdir(parents=True, exist_ok=True)
        _ = output.write_text(report.model_dump_json(indent=2), encoding="utf-8")
        logger.info(f"Evaluated {len(pairs)} pairs; report at '{output}'.")
        return report
