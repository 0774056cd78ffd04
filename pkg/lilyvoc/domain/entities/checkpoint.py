from dataclasses import dataclass, field
from enum import Enum

from lilyvoc.engine.tensor import Array
from lilyvoc.models.config import RunConfig


class Precision(str, Enum):
    F64 = "f64"
    F32 = "f32"


@dataclass
class Checkpoint:
    """Everything needed to continue a run or to synthesise from it.

    Inference exports carry only the generator; their optimizer and
    discriminator states are empty.
    """

    config: RunConfig
    step: int
    generator: dict[str, Array]
    discriminator: dict[str, Array] = field(default_factory=dict)
    g_optimizer: dict[str, Array] = field(default_factory=dict)
    d_optimizer: dict[str, Array] = field(default_factory=dict)
    precision: Precision = Precision.F64

    @property
    def seed(self) -> int:
        return self.config.train.seed

    @property
    def trainable(self) -> bool:
        return bool(self.discriminator) and bool(self.g_optimizer)
