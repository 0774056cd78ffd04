import asyncio
import zlib
from pathlib import Path

import numpy as np
import pytest

from lilyvoc.domain.entities.checkpoint import Checkpoint, Precision
from lilyvoc.domain.entities.feature_file import FeatureFile
from lilyvoc.domain.values.audio import AudioBuffer
from lilyvoc.engine.rng import Rng
from lilyvoc.error import (
    BadRequestError,
    CorruptFileError,
    DimensionError,
    NotFoundError,
)
from lilyvoc.infra.drivers.wav_driver import Subtype, WavDriver
from lilyvoc.infra.repositories.checkpoint_repository import (
    CheckpointRepository,
    checkpoint_name,
)
from lilyvoc.infra.repositories.feature_repository import (
    HEADER,
    FeatureRepository,
    decode_feature_file,
    encode_feature_file,
)
from lilyvoc.infra.repositories.metrics_repository import MetricsRepository
from lilyvoc.models.config import RunConfig
from lilyvoc.models.metrics import MetricsRecord


def _feature_file(rng: Rng, frames: int = 12) -> FeatureFile:
    return FeatureFile(
        sample_rate=48000,
        hop=240,
        frames=frames,
        arrays={
            "mel": rng.normal((frames, 120)),
            "f0": np.linspace(0.0, 300.0, frames),
            "loudness": np.full(frames, 0.25),
        },
        stats={"mel_mean": rng.child(1).normal(120)},
    )


def _record(step: int) -> MetricsRecord:
    values = dict.fromkeys(MetricsRecord.model_fields, 0.5)
    return MetricsRecord.model_validate({**values, "step": step})


def test_feature_file_round_trip(rng: Rng, tmp_path: Path):
    original = _feature_file(rng)
    repository = FeatureRepository(tmp_path)
    asyncio.run(repository.save_clip("clip", original))
    loaded = asyncio.run(repository.load_clip("clip"))
    assert (loaded.sample_rate, loaded.hop, loaded.frames) == (48000, 240, 12)
    assert loaded.arrays.keys() == original.arrays.keys()
    for name, array in original.arrays.items():
        np.testing.assert_array_equal(loaded.arrays[name], array)
    np.testing.assert_array_equal(loaded.stats["mel_mean"], original.stats["mel_mean"])


def test_stems_skip_statistics(rng: Rng, tmp_path: Path):
    repository = FeatureRepository(tmp_path)
    for stem in ("b", "a"):
        asyncio.run(repository.save_clip(stem, _feature_file(rng)))
    stats = FeatureFile(48000, 240, 0, stats={"mel_mean": np.zeros(120)})
    asyncio.run(repository.save_stats(stats))
    assert repository.stems() == ["a", "b"]
    assert repository.instructive_path("a", 8000).name == "a.8k.wav"
    with pytest.raises(NotFoundError):
        _ = FeatureRepository(tmp_path / "missing").stems()


def test_flipped_byte_fails_checksum(rng: Rng):
    data = bytearray(encode_feature_file(_feature_file(rng)))
    data[HEADER.size + 10] ^= 0xFF
    with pytest.raises(CorruptFileError):
        _ = decode_feature_file(bytes(data))


def test_truncated_and_foreign_files_are_rejected(rng: Rng):
    data = encode_feature_file(_feature_file(rng))
    with pytest.raises(CorruptFileError):
        _ = decode_feature_file(data[:10])
    with pytest.raises(CorruptFileError):
        _ = decode_feature_file(data[:-40])
    with pytest.raises(CorruptFileError):
        _ = decode_feature_file(b"RIFF" + data[4:])


def test_missing_feature_file(tmp_path: Path):
    with pytest.raises(NotFoundError):
        _ = asyncio.run(FeatureRepository(tmp_path).load_clip("nope"))


def test_reserved_stems_are_rejected(rng: Rng, tmp_path: Path):
    repository = FeatureRepository(tmp_path)
    for stem in ("stats", "a.8k", "take.16k", ""):
        with pytest.raises(BadRequestError):
            asyncio.run(repository.save_clip(stem, _feature_file(rng)))
    asyncio.run(repository.save_clip("take.01", _feature_file(rng)))
    assert repository.stems() == ["take.01"]
    assert not repository.stats_path.exists()


def test_feature_file_without_arrays_is_corrupt():
    stats_only = FeatureFile(48000, 240, 0, stats={"mel_mean": np.zeros(120)})
    with pytest.raises(CorruptFileError):
        _ = stats_only.to_frames()


def test_misaligned_arrays_are_corrupt(rng: Rng):
    clip = _feature_file(rng)
    with pytest.raises(DimensionError):
        _ = FeatureFile(48000, 240, 11, arrays=clip.arrays)
    data = bytearray(encode_feature_file(clip))
    # Patch the frame count in the header and re-sign the body.
    frames_offset = HEADER.size - 8
    data[frames_offset : frames_offset + 4] = (11).to_bytes(4, "little")
    body = bytes(data[:-4])
    data[-4:] = zlib.crc32(body).to_bytes(4, "little")
    with pytest.raises(CorruptFileError):
        _ = decode_feature_file(bytes(data))


def test_feature_normalisation_uses_stats(rng: Rng):
    clip = _feature_file(rng)
    stats = FeatureFile(
        sample_rate=48000,
        hop=240,
        frames=0,
        stats={"mel_mean": np.full(120, 1.0), "mel_std": np.full(120, 2.0)},
    )
    frames = clip.to_frames(stats)
    np.testing.assert_allclose(frames.mel, (clip.arrays["mel"] - 1.0) / 2.0)
    np.testing.assert_array_equal(frames.f0, clip.arrays["f0"])


def test_checkpoint_round_trip(rng: Rng, tmp_path: Path):
    repository = CheckpointRepository(tmp_path)
    checkpoint = Checkpoint(
        config=RunConfig.toy(),
        step=25,
        generator={"w": rng.normal((3, 2))},
        discriminator={"v": rng.normal(4)},
        g_optimizer={"adam.step": np.array(25), "adam.first.w": np.ones((3, 2))},
        d_optimizer={"adam.step": np.array(25)},
    )
    path = repository.save(checkpoint)
    assert path.name == checkpoint_name(25) == "ckpt_00000025.npz"
    loaded = repository.load(path)
    assert loaded.config == checkpoint.config
    assert loaded.step == 25
    assert loaded.trainable
    np.testing.assert_array_equal(loaded.generator["w"], checkpoint.generator["w"])
    np.testing.assert_array_equal(loaded.g_optimizer["adam.first.w"], np.ones((3, 2)))


def test_exported_checkpoint_is_single_precision(rng: Rng, tmp_path: Path):
    repository = CheckpointRepository(tmp_path)
    weights = rng.normal(5)
    export = Checkpoint(
        config=RunConfig.toy(),
        step=3,
        generator={"w": weights},
        precision=Precision.F32,
    )
    loaded = repository.load(repository.save(export, tmp_path / "export.npz"))
    assert not loaded.trainable
    assert loaded.precision is Precision.F32
    np.testing.assert_array_equal(loaded.generator["w"], weights.astype(np.float32))


def test_latest_checkpoint(rng: Rng, tmp_path: Path):
    repository = CheckpointRepository(tmp_path)
    assert repository.latest() is None
    for step in (10, 2, 7):
        _ = repository.save(
            Checkpoint(config=RunConfig.toy(), step=step, generator={})
        )
    (tmp_path / "notes.txt").write_text("x")
    assert repository.list_steps() == [2, 7, 10]
    assert repository.latest() == tmp_path / "ckpt_00000010.npz"


def test_corrupt_checkpoint(tmp_path: Path):
    repository = CheckpointRepository(tmp_path)
    with pytest.raises(NotFoundError):
        _ = repository.load(tmp_path / "ckpt_00000001.npz")
    bad = tmp_path / "ckpt_00000001.npz"
    bad.write_bytes(b"not a zip archive")
    with pytest.raises(CorruptFileError):
        _ = repository.load(bad)


def test_metrics_append_read_and_truncate(tmp_path: Path):
    repository = MetricsRepository(tmp_path / "run" / "metrics.jsonl")
    assert repository.read() == []
    for step in (1, 2, 3):
        repository.append(_record(step))
    assert [record.step for record in repository.read()] == [1, 2, 3]
    assert repository.truncate_after(1) == 1
    assert [record.step for record in repository.read()] == [1]
    repository.append(_record(2))
    assert [record.step for record in repository.read()] == [1, 2]


def test_corrupt_metrics_line(tmp_path: Path):
    path = tmp_path / "metrics.jsonl"
    path.write_text('{"step": 1}\n', encoding="utf-8")
    with pytest.raises(CorruptFileError):
        _ = MetricsRepository(path).read()


def test_wav_round_trip(rng: Rng, tmp_path: Path):
    driver = WavDriver()
    samples = 0.5 * rng.uniform(480)
    audio = AudioBuffer.from_array(samples, 48000)
    driver.write(tmp_path / "float.wav", audio, Subtype.FLOAT)
    loaded = driver.read(tmp_path / "float.wav")
    assert loaded.sample_rate == 48000
    np.testing.assert_array_equal(loaded.numpy(), samples.astype(np.float32))
    driver.write(tmp_path / "pcm.wav", audio, Subtype.PCM_16)
    np.testing.assert_allclose(
        driver.read(tmp_path / "pcm.wav").numpy(), samples, atol=1e-4
    )


def test_wav_errors(tmp_path: Path):
    driver = WavDriver()
    with pytest.raises(NotFoundError):
        _ = driver.read(tmp_path / "missing.wav")
    garbage = tmp_path / "garbage.wav"
    garbage.write_bytes(b"definitely not audio")
    with pytest.raises(CorruptFileError):
        _ = driver.read(garbage)
