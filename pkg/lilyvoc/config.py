import json
import logging
from pathlib import Path
from typing import Any, ClassVar

from pydantic import ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from lilyvoc.error import ConfigError, NotFoundError
from lilyvoc.models.config import RunConfig


class LogSettings(BaseSettings):
    LILYVOC_LOG_LEVEL: str = "INFO"
    LILYVOC_LOG_FORMAT: str = "%(asctime)s %(levelname)s %(name)s: %(message)s"
    model_config: ClassVar[SettingsConfigDict] = {
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "extra": "ignore",
        "frozen": True,
    }


def configure_logging(settings: LogSettings, level: str | None = None) -> None:
    name = (level or settings.LILYVOC_LOG_LEVEL).upper()
    if name not in logging.getLevelNamesMapping():
        raise ConfigError(f"Unknown log level '{name}'.")
    logging.basicConfig(
        level=name, format=settings.LILYVOC_LOG_FORMAT, force=True
    )


def parse_value(text: str) -> Any:
    """JSON when it parses (numbers, lists, booleans), else the raw string."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_assignment(line: str, origin: str) -> tuple[list[str], Any]:
    key, sep, value = line.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError(f"Expected 'key = value' at {origin}, got '{line}'.")
    return key.split("."), parse_value(value.strip())


def parse_config_text(text: str, source: str = "<text>") -> list[tuple[list[str], Any]]:
    entries: list[tuple[list[str], Any]] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            entries.append(parse_assignment(line, f"{source}:{number}"))
    return entries


def _assign(tree: dict[str, Any], path: list[str], value: Any) -> None:
    node = tree
    for part in path[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigError(f"Key '{'.'.join(path)}' nests under a value.")
        node = child
    node[path[-1]] = value


def build_config(entries: list[tuple[list[str], Any]]) -> RunConfig:
    tree: dict[str, Any] = {}
    for path, value in entries:
        _assign(tree, path, value)
    try:
        return RunConfig.model_validate(tree)
    except ValidationError as error:
        problems = "; ".join(
            f"{'.'.join(str(part) for part in item['loc'])}: {item['msg']}"
            for item in error.errors()
        )
        raise ConfigError(f"Invalid configuration: {problems}.") from error


def load_config(
    path: Path | None = None, overrides: list[str] | None = None
) -> RunConfig:
    """Defaults, then the file, then `key=value` overrides."""
    entries: list[tuple[list[str], Any]] = []
    if path is not None:
        if not path.is_file():
            raise NotFoundError(f"Config file '{path}' not found.")
        entries.extend(parse_config_text(path.read_text(encoding="utf-8"), str(path)))
    for override in overrides or []:
        entries.append(parse_assignment(override, "--set"))
    return build_config(entries)


def dump_config(config: RunConfig) -> str:
    """Render a config in the key = value format that load_config reads."""
    lines: list[str] = []
    for section, values in config.model_dump(mode="json").items():
        for key, value in values.items():
            lines.append(f"{section}.{key} = {json.dumps(value)}")
    return "\n".join(lines) + "\n"


log_settings = LogSettings()
