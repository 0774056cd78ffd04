import asyncio
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from lilyvoc.domain.entities.feature_file import FeatureFile
from lilyvoc.domain.values.audio import AudioBuffer
from lilyvoc.domain.values.features import FeatureFrames
from lilyvoc.domain.values.job import ExtractJob, JobStatus
from lilyvoc.domain.values.spectral import MelConfig, StftConfig
from lilyvoc.dsp.loudness import loudness
from lilyvoc.dsp.mel import mel_spectrogram
from lilyvoc.dsp.pitch import yin_pitch
from lilyvoc.dsp.resample import resample
from lilyvoc.engine.tensor import Array, no_grad
from lilyvoc.error import BadRequestError, InputTooShortError, NotFoundError
from lilyvoc.infra.drivers.wav_driver import Subtype, WavDriver
from lilyvoc.infra.repositories.feature_repository import FeatureRepository
from lilyvoc.infra.services.extract_worker import run_jobs
from lilyvoc.models.config import RunConfig
from lilyvoc.models.report import ExtractReport

logger = logging.getLogger(__name__)

STD_FLOOR = 1e-8


@dataclass(frozen=True)
class ExtractedClip:
    features: FeatureFrames
    target: AudioBuffer
    instructive: AudioBuffer


def analysis_config(config: RunConfig) -> MelConfig:
    features = config.features
    return MelConfig(
        stft=StftConfig(
            fft_size=features.fft_size,
            hop=features.hop,
            win_length=features.win_length,
        ),
        sample_rate=config.audio.sample_rate,
        n_mels=features.n_mels,
    )


def extract_clip(audio: AudioBuffer, config: RunConfig) -> ExtractedClip:
    """Features of one clip, cropped to a whole number of frames."""
    rate = config.audio.sample_rate
    hop = config.features.hop
    if audio.sample_rate != rate:
        logger.warning(f"Resampling {audio.sample_rate} Hz input to {rate} Hz.")
        audio = resample(audio, rate)
    frames = len(audio) // hop
    if frames == 0:
        raise InputTooShortError(
            f"Clip of {len(audio)} samples is shorter than one {hop}-sample frame."
        )
    # Features describe the float32 samples that land on disk.
    target = AudioBuffer.from_array(
        audio.numpy()[: frames * hop].astype(np.float32), rate
    )
    features = config.features
    with no_grad():
        mel = mel_spectrogram(target, analysis_config(config)).data
    f0 = yin_pitch(
        target,
        f0_min=features.f0_min,
        f0_max=features.f0_max,
        threshold=features.yin_threshold,
    )
    level = loudness(target, analysis_config(config).stft)
    return ExtractedClip(
        features=FeatureFrames(mel=mel, f0=f0, loudness=level),
        target=target,
        instructive=resample(target, config.audio.instructive_rate),
    )


def corpus_stats(mels: list[Array], config: RunConfig) -> FeatureFile:
    """Per-dimension mel mean and std over every frame of the corpus."""
    if not mels:
        raise BadRequestError("Corpus is empty; no clip could be extracted.")
    stacked = np.concatenate(mels, axis=0)
    return FeatureFile(
        sample_rate=config.audio.sample_rate,
        hop=config.features.hop,
        frames=0,
        stats={
            "mel_mean": stacked.mean(axis=0),
            "mel_std": np.maximum(stacked.std(axis=0), STD_FLOOR),
        },
    )


class ExtractService:
    config: RunConfig
    wav_driver: WavDriver
    repository: FeatureRepository
    _mels: dict[str, Array]

    def __init__(
        self, config: RunConfig, wav_driver: WavDriver, repository: FeatureRepository
    ) -> None:
        self.config = config
        self.wav_driver = wav_driver
        self.repository = repository
        self._mels = {}

    async def run(self, in_dir: Path) -> ExtractReport:
        if not in_dir.is_dir():
            raise NotFoundError(f"Input directory '{in_dir}' not found.")
        jobs = [
            ExtractJob(stem=path.stem, source=path)
            for path in sorted(in_dir.glob("*.wav"))
        ]
        logger.info(f"Extracting {len(jobs)} clips from '{in_dir}'.")
        self._mels = {}
        _ = await run_jobs(jobs, self._extract_one, self.config.features.workers)

        done = [job.stem for job in jobs if job.status is JobStatus.COMPLETED]
        failed = {
            job.stem: job.message for job in jobs if job.status is JobStatus.FAILED
        }
        # Stats follow stem order, not completion order.
        stats = corpus_stats([self._mels[stem] for stem in done], self.config)
        await self.repository.save_stats(stats)
        frames = sum(self._mels[stem].shape[0] for stem in done)
        logger.info(
            f"Extracted {len(done)} clips ({frames} frames); {len(failed)} skipped."
        )
        return ExtractReport(clips=done, failed=failed, frames=frames)

    async def _extract_one(self, job: ExtractJob) -> None:
        self.repository.check_stem(job.stem)
        audio = await asyncio.to_thread(self.wav_driver.read, job.source)
        clip = await asyncio.to_thread(extract_clip, audio, self.config)
        audio_config = self.config.audio
        feature_file = FeatureFile.from_frames(
            clip.features, audio_config.sample_rate, self.config.features.hop
        )
        await self.repository.save_clip(job.stem, feature_file)
        await asyncio.to_thread(
            self.wav_driver.write,
            self.repository.target_path(job.stem),
            clip.target,
            Subtype.FLOAT,
        )
        await asyncio.to_thread(
            self.wav_driver.write,
            self.repository.instructive_path(job.stem, audio_config.instructive_rate),
            clip.instructive,
            Subtype.FLOAT,
        )
        self._mels[job.stem] = clip.features.mel
