from dataclasses import dataclass
from enum import Enum
from pathlib import Path


class JobStatus(str, Enum):
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


@dataclass
class ExtractJob:
    stem: str
    source: Path
    status: JobStatus = JobStatus.PENDING
    message: str = ""
