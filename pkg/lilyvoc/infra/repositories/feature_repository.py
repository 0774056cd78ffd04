"""Binary feature container; the layout is documented in docs/FEATURE_FORMAT.md."""

import re
import struct
import zlib
from pathlib import Path

import aiofiles
import numpy as np

from lilyvoc.domain.entities.feature_file import FeatureFile
from lilyvoc.engine.tensor import Array
from lilyvoc.error import (
    BadRequestError,
    CorruptFileError,
    DimensionError,
    NotFoundError,
)

MAGIC = b"LVFT"
VERSION = 1
HEADER = struct.Struct("<4sHHIIIHH")
SECTION = struct.Struct("<HB")
CRC = struct.Struct("<I")
FEATURE_SUFFIX = ".feat"
STATS_NAME = "stats.feat"
# Stems that would overwrite the statistics or another clip's instructive WAV.
RESERVED_STEM = re.compile(r"stats|.*\.\d+k")


def _encode_arrays(arrays: dict[str, Array]) -> bytes:
    chunks: list[bytes] = []
    for name, array in arrays.items():
        encoded = name.encode("utf-8")
        chunks.append(SECTION.pack(len(encoded), array.ndim))
        chunks.append(encoded)
        chunks.append(struct.pack(f"<{array.ndim}I", *array.shape))
        chunks.append(np.ascontiguousarray(array, dtype="<f8").tobytes())
    return b"".join(chunks)


def encode_feature_file(feature_file: FeatureFile) -> bytes:
    header = HEADER.pack(
        MAGIC,
        VERSION,
        0,
        feature_file.sample_rate,
        feature_file.hop,
        feature_file.frames,
        len(feature_file.arrays),
        len(feature_file.stats),
    )
    body = (
        header
        + _encode_arrays(feature_file.arrays)
        + _encode_arrays(feature_file.stats)
    )
    return body + CRC.pack(zlib.crc32(body))


class _Reader:
    data: bytes
    offset: int

    def __init__(self, data: bytes) -> None:
        self.data = data
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            raise CorruptFileError("Feature file is truncated.")
        chunk = self.data[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def arrays(self, count: int) -> dict[str, Array]:
        arrays: dict[str, Array] = {}
        for _ in range(count):
            name_length, ndim = SECTION.unpack(self.take(SECTION.size))
            name = self.take(name_length).decode("utf-8")
            shape = struct.unpack(f"<{ndim}I", self.take(4 * ndim))
            size = int(np.prod(shape)) if ndim else 1
            values = np.frombuffer(self.take(8 * size), dtype="<f8")
            arrays[name] = values.astype(np.float64).reshape(shape)
        return arrays


def decode_feature_file(data: bytes, source: str = "<bytes>") -> FeatureFile:
    if len(data) < HEADER.size + CRC.size:
        raise CorruptFileError(f"'{source}' is too short to be a feature file.")
    body, trailer = data[: -CRC.size], data[-CRC.size :]
    (expected,) = CRC.unpack(trailer)
    if zlib.crc32(body) != expected:
        raise CorruptFileError(f"Checksum mismatch in '{source}'.")
    magic, version, _, sample_rate, hop, frames, n_arrays, n_stats = HEADER.unpack(
        body[: HEADER.size]
    )
    if magic != MAGIC:
        raise CorruptFileError(f"'{source}' is not a feature file.")
    if version != VERSION:
        raise CorruptFileError(f"'{source}' has unsupported version {version}.")
    reader = _Reader(body)
    reader.offset = HEADER.size
    arrays = reader.arrays(n_arrays)
    stats = reader.arrays(n_stats)
    if reader.offset != len(body):
        raise CorruptFileError(f"'{source}' has trailing bytes.")
    try:
        return FeatureFile(
            sample_rate=sample_rate,
            hop=hop,
            frames=frames,
            arrays=arrays,
            stats=stats,
        )
    except DimensionError as error:
        raise CorruptFileError(f"'{source}': {error}") from error


class FeatureRepository:
    root: Path

    def __init__(self, root: Path) -> None:
        self.root = root

    def path_for(self, stem: str) -> Path:
        return self.root / f"{stem}{FEATURE_SUFFIX}"

    def check_stem(self, stem: str) -> None:
        if not stem or RESERVED_STEM.fullmatch(stem):
            raise BadRequestError(
                f"Stem '{stem}' collides with the names extract writes in "
                f"'{self.root}'; rename the clip."
            )

    @property
    def stats_path(self) -> Path:
        return self.root / STATS_NAME

    def stems(self) -> list[str]:
        """Clip stems in sorted order, excluding the statistics file."""
        if not self.root.is_dir():
            raise NotFoundError(f"Feature directory '{self.root}' not found.")
        return sorted(
            path.stem
            for path in self.root.glob(f"*{FEATURE_SUFFIX}")
            if path.name != STATS_NAME
        )

    async def save(self, path: Path, feature_file: FeatureFile) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        async with aiofiles.open(path, "wb") as f:
            _ = await f.write(encode_feature_file(feature_file))

    async def load(self, path: Path) -> FeatureFile:
        if not path.is_file():
            raise NotFoundError(f"Feature file '{path}' not found.")
        async with aiofiles.open(path, "rb") as f:
            data = await f.read()
        return decode_feature_file(data, str(path))

    async def save_clip(self, stem: str, feature_file: FeatureFile) -> None:
        self.check_stem(stem)
        await self.save(self.path_for(stem), feature_file)

    async def load_clip(self, stem: str) -> FeatureFile:
        return await self.load(self.path_for(stem))

    async def save_stats(self, stats: FeatureFile) -> None:
        await self.save(self.stats_path, stats)

    async def load_stats(self) -> FeatureFile:
        return await self.load(self.stats_path)

    def target_path(self, stem: str) -> Path:
        return self.root / f"{stem}.wav"

    def instructive_path(self, stem: str, sample_rate: int) -> Path:
        return self.root / f"{stem}.{sample_rate // 1000}k.wav"
