from dataclasses import dataclass

from lilyvoc.models.config import OptimSection


@dataclass(frozen=True)
class LrSchedule:
    """Linear warmup from 0 to `peak`, then geometric decay per step."""

    peak: float = 2e-4
    warmup_steps: int = 5000
    decay: float = 0.999

    @classmethod
    def from_config(cls, config: OptimSection) -> "LrSchedule":
        return cls(
            peak=config.peak_lr, warmup_steps=config.warmup_steps, decay=config.decay
        )

    def lr_at(self, step: int) -> float:
        if step < 0:
            raise ValueError(f"Step must be non-negative, got {step}.")
        if step <= self.warmup_steps:
            if self.warmup_steps == 0:
                return self.peak
            return self.peak * step / self.warmup_steps
        return self.peak * self.decay ** (step - self.warmup_steps)


def lr_at(step: int, schedule: LrSchedule | None = None) -> float:
    return (schedule or LrSchedule()).lr_at(step)
