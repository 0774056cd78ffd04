import asyncio
from pathlib import Path

import numpy as np
import pytest

from lilyvoc.domain.entities.checkpoint import Checkpoint, Precision
from lilyvoc.domain.values.audio import AudioBuffer
from lilyvoc.domain.values.batch import TrainingItem
from lilyvoc.domain.values.features import FeatureFrames
from lilyvoc.engine.rng import Rng
from lilyvoc.error import ConflictError, NotFoundError
from lilyvoc.infra.drivers.wav_driver import WavDriver
from lilyvoc.infra.repositories.checkpoint_repository import CheckpointRepository
from lilyvoc.infra.repositories.feature_repository import FeatureRepository
from lilyvoc.infra.repositories.metrics_repository import MetricsRepository
from lilyvoc.infra.services.extract_service import ExtractService
from lilyvoc.infra.services.train_service import (
    TrainingDataset,
    TrainService,
    restore_trainer,
)
from lilyvoc.models.config import RunConfig

FRAMES = 40


def _item(seed: int) -> TrainingItem:
    rng = Rng(seed)
    t48 = np.arange(240 * FRAMES) / 48000
    t8 = np.arange(40 * FRAMES) / 8000
    f0 = 110.0 * (seed + 2)
    return TrainingItem(
        features=FeatureFrames(
            mel=rng.normal((FRAMES, 120)),
            f0=np.full(FRAMES, f0),
            loudness=np.full(FRAMES, 0.5),
        ),
        target=AudioBuffer.from_array(0.3 * np.sin(2 * np.pi * f0 * t48), 48000),
        instructive=AudioBuffer.from_array(0.3 * np.sin(2 * np.pi * f0 * t8), 8000),
    )


def _dataset() -> TrainingDataset:
    return TrainingDataset([_item(0), _item(1)], hop=240, instructive_hop=40)


def _service(config: RunConfig, run_dir: Path) -> TrainService:
    return TrainService(
        config,
        _dataset(),
        CheckpointRepository(run_dir / "checkpoints"),
        MetricsRepository(run_dir / "metrics.jsonl"),
    )


def test_empty_dataset():
    with pytest.raises(NotFoundError):
        _ = TrainingDataset([], hop=240, instructive_hop=40)


def test_sample_crops_aligned_windows():
    dataset = _dataset()
    item = dataset.sample(Rng(3), crop_frames=20)
    assert item.features.num_frames == 20
    assert len(item.target) == 20 * 240
    assert len(item.instructive) == 20 * 40

    again = dataset.sample(Rng(3), crop_frames=20)
    np.testing.assert_array_equal(again.target.numpy(), item.target.numpy())

    whole = dataset.sample(Rng(3), crop_frames=100)
    assert whole.features.num_frames == FRAMES


def test_dataset_loads_extracted_corpus(toy_config: RunConfig, tmp_path: Path):
    wav_dir = tmp_path / "wav"
    wav_dir.mkdir()
    driver = WavDriver()
    for seed in (1, 2):
        audio = AudioBuffer.from_array(0.4 * Rng(seed).uniform(12000), 48000)
        driver.write(wav_dir / f"clip{seed}.wav", audio)
    repository = FeatureRepository(tmp_path / "features")
    _ = asyncio.run(ExtractService(toy_config, driver, repository).run(wav_dir))

    dataset = asyncio.run(TrainingDataset.load(repository, driver, toy_config))
    assert len(dataset.items) == 2
    assert dataset.items[0].features.num_frames == 50
    assert len(dataset.items[1].instructive) == 2000


def test_resumed_run_matches_uninterrupted_run(toy_config: RunConfig, tmp_path: Path):
    straight_trainer, straight_report = _service(toy_config, tmp_path / "a").run(2)
    assert (straight_report.start_step, straight_report.final_step) == (0, 2)

    _, first = _service(toy_config, tmp_path / "b").run(1)
    assert first.checkpoint is not None
    resumed_trainer, resumed_report = _service(toy_config, tmp_path / "b").run(2)
    assert (resumed_report.start_step, resumed_report.final_step) == (1, 2)

    straight_state = straight_trainer.generator.state_dict()
    for name, value in resumed_trainer.generator.state_dict().items():
        np.testing.assert_array_equal(value, straight_state[name])
    straight_metrics = MetricsRepository(tmp_path / "a" / "metrics.jsonl").read()
    resumed_metrics = MetricsRepository(tmp_path / "b" / "metrics.jsonl").read()
    assert resumed_metrics == straight_metrics


def test_finished_run_does_nothing(toy_config: RunConfig, tmp_path: Path):
    _ = _service(toy_config, tmp_path).run(1)
    trainer, report = _service(toy_config, tmp_path).run(1)
    assert trainer.step == 1
    assert report.checkpoint is None
    assert len(MetricsRepository(tmp_path / "metrics.jsonl").read()) == 1


def test_resume_refuses_other_model(toy_config: RunConfig):
    checkpoint = Checkpoint(
        config=toy_config,
        step=1,
        generator={},
        discriminator={"w": np.zeros(1)},
        g_optimizer={"w": np.zeros(1)},
    )
    with pytest.raises(ConflictError):
        _ = restore_trainer(checkpoint, RunConfig())


def test_resume_refuses_inference_export(toy_config: RunConfig):
    checkpoint = Checkpoint(config=toy_config, step=1, generator={})
    with pytest.raises(ConflictError):
        _ = restore_trainer(checkpoint, toy_config)


def test_export_holds_only_the_generator(toy_config: RunConfig, tmp_path: Path):
    service = _service(toy_config, tmp_path)
    trainer = service.prepare()
    path = service.export(trainer, tmp_path / "export" / "voc.npz")
    exported = service.checkpoints.load(path)
    assert exported.precision is Precision.F32
    assert not exported.trainable
    assert exported.discriminator == {}
    assert exported.generator.keys() == trainer.generator.state_dict().keys()
