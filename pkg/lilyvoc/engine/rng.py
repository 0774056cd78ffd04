from dataclasses import dataclass, field

import numpy as np

from lilyvoc.engine.tensor import Array


@dataclass(frozen=True)
class Rng:
    """Counter-based (Philox) generator addressed by a seed and a spawn path.

    Children are derived, never advanced from a shared stream, so any draw can
    be reproduced from (seed, path) alone.
    """

    seed: int
    path: tuple[int, ...] = ()
    _generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"Seed must be an unsigned 64-bit int, got {self.seed}.")
        sequence = np.random.SeedSequence(self.seed, spawn_key=self.path)
        object.__setattr__(
            self, "_generator", np.random.Generator(np.random.Philox(sequence))
        )

    def child(self, *keys: int) -> "Rng":
        return Rng(self.seed, (*self.path, *keys))

    def normal(self, size: int | tuple[int, ...], scale: float = 1.0) -> Array:
        return self._generator.normal(0.0, scale, size)

    def uniform(
        self, size: int | tuple[int, ...], low: float = -1.0, high: float = 1.0
    ) -> Array:
        return self._generator.uniform(low, high, size)

    def integers(self, low: int, high: int) -> int:
        return int(self._generator.integers(low, high))
