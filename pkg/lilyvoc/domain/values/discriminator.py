from dataclasses import dataclass, field

from lilyvoc.engine.tensor import Tensor


@dataclass
class DiscriminatorOutput:
    """Logits and per-layer feature maps of every sub-discriminator."""

    logits: list[Tensor] = field(default_factory=list)
    features: list[list[Tensor]] = field(default_factory=list)

    def extend(self, other: "DiscriminatorOutput") -> None:
        self.logits.extend(other.logits)
        self.features.extend(other.features)

    def __len__(self) -> int:
        return len(self.logits)
