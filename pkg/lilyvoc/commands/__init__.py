from argparse import Namespace
from pathlib import Path

from lilyvoc.config import load_config
from lilyvoc.models.config import RunConfig


def config_from_args(args: Namespace) -> RunConfig:
    path: Path | None = args.config
    overrides: list[str] = args.overrides
    return load_config(path, overrides)


def optional_path(value: str | None) -> Path | None:
    return Path(value) if value else None
