import logging
from pathlib import Path

from pydantic import ValidationError

from lilyvoc.error import CorruptFileError
from lilyvoc.models.metrics import MetricsRecord

logger = logging.getLogger(__name__)


class MetricsRepository:
    """Append-only JSON lines, one MetricsRecord per training step."""

    path: Path

    def __init__(self, path: Path) -> None:
        self.path = path

    def read(self) -> list[MetricsRecord]:
        if not self.path.is_file():
            return []
        records: list[MetricsRecord] = []
        for number, line in enumerate(
            self.path.read_text(encoding="utf-8").splitlines(), start=1
        ):
            if not line.strip():
                continue
            try:
                records.append(MetricsRecord.model_validate_json(line))
            except ValidationError as error:
                raise CorruptFileError(
                    f"Bad metrics record at '{self.path}':{number}."
                ) from error
        return records

    def truncate_after(self, step: int) -> int:
        """Drop records beyond `step` (left by a run that outlived its checkpoint)."""
        records = self.read()
        kept = [record for record in records if record.step <= step]
        if len(kept) != len(records):
            logger.info(
                f"Dropping {len(records) - len(kept)} metrics records after step "
                f"{step}."
            )
            _ = self.path.write_text(
                "".join(record.model_dump_json() + "\n" for record in kept),
                encoding="utf-8",
            )
        return len(kept)

    def append(self, record: MetricsRecord) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8") as f:
            _ = f.write(record.model_dump_json() + "\n")
