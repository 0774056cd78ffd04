import json
import logging
import re
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from lilyvoc.domain.entities.checkpoint import Checkpoint, Precision
from lilyvoc.engine.tensor import Array
from lilyvoc.error import CorruptFileError, NotFoundError
from lilyvoc.models.config import RunConfig

logger = logging.getLogger(__name__)

CHECKPOINT_PATTERN = re.compile(r"^ckpt_(\d{8})\.npz$")
GROUPS = ("generator", "discriminator", "g_optimizer", "d_optimizer")
META_KEY = "meta"


def checkpoint_name(step: int) -> str:
    return f"ckpt_{step:08d}.npz"


class CheckpointRepository:
    root: Path

    def __init__(self, root: Path) -> None:
        self.root = root

    def list_steps(self) -> list[int]:
        if not self.root.is_dir():
            return []
        steps: list[int] = []
        for path in self.root.iterdir():
            match = CHECKPOINT_PATTERN.match(path.name)
            if match:
                steps.append(int(match.group(1)))
        return sorted(steps)

    def latest(self) -> Path | None:
        steps = self.list_steps()
        return self.root / checkpoint_name(steps[-1]) if steps else None

    def save(self, checkpoint: Checkpoint, path: Path | None = None) -> Path:
        path = path or self.root / checkpoint_name(checkpoint.step)
        path.parent.mkdir(parents=True, exist_ok=True)
        dtype = np.float32 if checkpoint.precision is Precision.F32 else np.float64
        meta = {
            "config": checkpoint.config.model_dump(mode="json"),
            "step": checkpoint.step,
            "precision": checkpoint.precision.value,
        }
        arrays: dict[str, Array] = {
            META_KEY: np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8)
        }
        for group in GROUPS:
            for name, value in getattr(checkpoint, group).items():
                stored = value if group.endswith("optimizer") else value.astype(dtype)
                arrays[f"{group}/{name}"] = stored
        with path.open("wb") as f:
            np.savez(f, **arrays)
        logger.info(f"Saved checkpoint at step {checkpoint.step} to '{path}'.")
        return path

    def load(self, path: Path) -> Checkpoint:
        if not path.is_file():
            raise NotFoundError(f"Checkpoint '{path}' not found.")
        try:
            with np.load(path, allow_pickle=False) as archive:
                contents = {key: archive[key] for key in archive.files}
            meta = json.loads(contents.pop(META_KEY).tobytes().decode("utf-8"))
            config = RunConfig.model_validate(meta["config"])
        except (OSError, ValueError, KeyError, ValidationError) as error:
            raise CorruptFileError(
                f"Cannot read checkpoint '{path}': {error}."
            ) from error
        groups: dict[str, dict[str, Array]] = {group: {} for group in GROUPS}
        for key, value in contents.items():
            group, _, name = key.partition("/")
            if group not in groups:
                raise CorruptFileError(
                    f"Checkpoint '{path}' has unknown entry '{key}'."
                )
            groups[group][name] = np.asarray(value, dtype=np.float64)
        return Checkpoint(
            config=config,
            step=int(meta["step"]),
            generator=groups["generator"],
            discriminator=groups["discriminator"],
            g_optimizer=groups["g_optimizer"],
            d_optimizer=groups["d_optimizer"],
            precision=Precision(meta["precision"]),
        )
