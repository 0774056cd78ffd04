import math
from dataclasses import dataclass, field

import numpy as np

from lilyvoc.engine.module import Module, Parameter
from lilyvoc.engine.tensor import Array
from lilyvoc.error import ConflictError, NumericalError
from lilyvoc.models.config import OptimSection


@dataclass
class OptimizerState:
    """First and second moments keyed by parameter name."""

    step: int = 0
    first: dict[str, Array] = field(default_factory=dict)
    second: dict[str, Array] = field(default_factory=dict)

    def state_dict(self, prefix: str) -> dict[str, Array]:
        state = {f"{prefix}.step": np.array(self.step)}
        for name, moment in self.first.items():
            state[f"{prefix}.first.{name}"] = moment
            state[f"{prefix}.second.{name}"] = self.second[name]
        return state

    @classmethod
    def from_state_dict(cls, state: dict[str, Array], prefix: str) -> "OptimizerState":
        first_prefix, second_prefix = f"{prefix}.first.", f"{prefix}.second."
        return cls(
            step=int(state[f"{prefix}.step"]),
            first={
                key.removeprefix(first_prefix): np.array(value, dtype=np.float64)
                for key, value in state.items()
                if key.startswith(first_prefix)
            },
            second={
                key.removeprefix(second_prefix): np.array(value, dtype=np.float64)
                for key, value in state.items()
                if key.startswith(second_prefix)
            },
        )


@dataclass(frozen=True)
class AdamWConfig:
    beta1: float = 0.8
    beta2: float = 0.99
    eps: float = 1e-8
    weight_decay: float = 0.01

    @classmethod
    def from_config(cls, config: OptimSection) -> "AdamWConfig":
        return cls(
            beta1=config.beta1,
            beta2=config.beta2,
            eps=config.eps,
            weight_decay=config.weight_decay,
        )


def adamw_step(
    params: dict[str, Parameter],
    state: OptimizerState,
    lr: float,
    config: AdamWConfig | None = None,
) -> OptimizerState:
    """One AdamW update in place; missing gradients count as zeros."""
    config = config or AdamWConfig()
    for name, param in params.items():
        if param.grad is not None and not np.all(np.isfinite(param.grad)):
            raise NumericalError(f"Gradient of '{name}' contains NaN or Inf.")
        moment = state.first.get(name)
        if moment is not None and moment.shape != param.shape:
            raise ConflictError(
                f"Optimizer moment of '{name}' has shape {moment.shape}, parameter "
                f"has {param.shape}."
            )
    state.step += 1
    step = state.step
    first_correction = 1.0 - config.beta1**step
    second_correction = 1.0 - config.beta2**step
    for name, param in params.items():
        grad = np.zeros(param.shape) if param.grad is None else param.grad
        first = state.first.get(name, np.zeros(param.shape))
        second = state.second.get(name, np.zeros(param.shape))
        first = config.beta1 * first + (1.0 - config.beta1) * grad
        second = config.beta2 * second + (1.0 - config.beta2) * grad * grad
        state.first[name], state.second[name] = first, second
        update = (first / first_correction) / (
            np.sqrt(second / second_correction) + config.eps
        )
        param.data = param.data - lr * config.weight_decay * param.data - lr * update
    return state


def global_grad_norm(module: Module) -> float:
    total = 0.0
    for param in module.parameters():
        if param.grad is not None:
            total += float(np.sum(param.grad * param.grad))
    return math.sqrt(total)


def clip_grad_norm(module: Module, max_norm: float) -> float:
    """Rescale gradients to `max_norm` if above it; returns the norm before."""
    norm = global_grad_norm(module)
    if norm > max_norm:
        scale = max_norm / norm
        for param in module.parameters():
            if param.grad is not None:
                param.grad = param.grad * scale
    return norm


class AdamW:
    """Binds a module, its moments and the hyperparameters."""

    module: Module
    state: OptimizerState
    config: AdamWConfig

    def __init__(
        self,
        module: Module,
        config: AdamWConfig,
        state: OptimizerState | None = None,
    ) -> None:
        self.module = module
        self.config = config
        self.state = state or OptimizerState()

    def step(self, lr: float) -> None:
        params = dict(self.module.named_parameters())
        _ = adamw_step(params, self.state, lr, self.config)
