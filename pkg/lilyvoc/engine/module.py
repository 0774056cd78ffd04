import math
from collections.abc import Iterator
from typing import Any

import numpy as np
from numpy.typing import ArrayLike

from lilyvoc.engine import functional as F
from lilyvoc.engine.rng import Rng
from lilyvoc.engine.tensor import Array, Tensor
from lilyvoc.error import ConflictError


class Parameter(Tensor):
    def __init__(self, data: ArrayLike) -> None:
        super().__init__(data, requires_grad=True, op="parameter")


class Module:
    """Container whose Parameters are discovered in attribute order."""

    def __call__(self, *args: Any, **kwargs: Any) -> Any:
        return self.forward(*args, **kwargs)

    def forward(self, *args: Any, **kwargs: Any) -> Any:
        raise NotImplementedError

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Parameter]]:
        for name, value in vars(self).items():
            yield from _named(value, f"{prefix}{name}")

    def parameters(self) -> list[Parameter]:
        return [param for _, param in self.named_parameters()]

    def num_parameters(self) -> int:
        return sum(param.size for param in self.parameters())

    def zero_grad(self) -> None:
        for param in self.parameters():
            param.grad = None

    def state_dict(self) -> dict[str, Array]:
        return {name: param.data.copy() for name, param in self.named_parameters()}

    def load_state_dict(self, state: dict[str, Array]) -> None:
        params = dict(self.named_parameters())
        if params.keys() != state.keys():
            missing = sorted(params.keys() - state.keys())
            unexpected = sorted(state.keys() - params.keys())
            raise ConflictError(
                f"State does not match module: missing {missing[:3]}, "
                f"unexpected {unexpected[:3]}."
            )
        for name, param in params.items():
            value = np.asarray(state[name], dtype=np.float64)
            if value.shape != param.shape:
                raise ConflictError(
                    f"Parameter '{name}' has shape {param.shape}, state has "
                    f"{value.shape}."
                )
            param.data = value.copy()


def _named(value: Any, name: str) -> Iterator[tuple[str, Parameter]]:
    if isinstance(value, Parameter):
        yield name, value
    elif isinstance(value, Module):
        yield from value.named_parameters(f"{name}.")
    elif isinstance(value, list | tuple):
        for index, item in enumerate(value):  # pyright: ignore[reportUnknown]
            yield from _named(item, f"{name}.{index}")


def uniform_init(rng: Rng, shape: tuple[int, ...], fan_in: int) -> Parameter:
    bound = 1.0 / math.sqrt(fan_in)
    return Parameter(rng.uniform(shape, -bound, bound))


class Linear(Module):
    weight: Parameter
    bias: Parameter

    def __init__(self, rng: Rng, din: int, dout: int) -> None:
        self.weight = uniform_init(rng.child(0), (din, dout), din)
        self.bias = uniform_init(rng.child(1), (dout,), din)

    def forward(self, x: Tensor) -> Tensor:
        return F.linear(x, self.weight, self.bias)


class Conv1d(Module):
    weight: Parameter
    bias: Parameter
    stride: int
    dilation: int
    padding: int

    def __init__(  # noqa: PLR0913
        self,
        rng: Rng,
        c_in: int,
        c_out: int,
        kernel: int,
        stride: int = 1,
        dilation: int = 1,
        padding: int | None = None,
    ) -> None:
        fan_in = c_in * kernel
        self.weight = uniform_init(rng.child(0), (c_out, c_in, kernel), fan_in)
        self.bias = uniform_init(rng.child(1), (c_out,), fan_in)
        self.stride = stride
        self.dilation = dilation
        # Default keeps the length at stride 1 for odd kernels.
        self.padding = dilation * (kernel - 1) // 2 if padding is None else padding

    def forward(self, x: Tensor) -> Tensor:
        return F.conv1d(
            x, self.weight, self.bias, self.stride, self.dilation, self.padding
        )


class ConvTranspose1d(Module):
    weight: Parameter
    bias: Parameter
    stride: int
    padding: int

    def __init__(  # noqa: PLR0913
        self,
        rng: Rng,
        c_in: int,
        c_out: int,
        kernel: int,
        stride: int,
        padding: int = 0,
    ) -> None:
        fan_in = c_in * kernel // stride
        self.weight = uniform_init(rng.child(0), (c_in, c_out, kernel), fan_in)
        self.bias = uniform_init(rng.child(1), (c_out,), fan_in)
        self.stride = stride
        self.padding = padding

    def forward(self, x: Tensor) -> Tensor:
        return F.conv_transpose1d(x, self.weight, self.bias, self.stride, self.padding)


class Conv2d(Module):
    weight: Parameter
    bias: Parameter
    stride: tuple[int, int]
    dilation: tuple[int, int]
    padding: tuple[int, int]

    def __init__(  # noqa: PLR0913
        self,
        rng: Rng,
        c_in: int,
        c_out: int,
        kernel: tuple[int, int],
        stride: tuple[int, int] = (1, 1),
        dilation: tuple[int, int] = (1, 1),
        zero_init: bool = False,
    ) -> None:
        fan_in = c_in * kernel[0] * kernel[1]
        self.weight = uniform_init(rng.child(0), (c_out, c_in, *kernel), fan_in)
        self.bias = uniform_init(rng.child(1), (c_out,), fan_in)
        if zero_init:
            self.weight.data[:] = 0.0
            self.bias.data[:] = 0.0
        self.stride = stride
        self.dilation = dilation
        self.padding = (
            dilation[0] * (kernel[0] - 1) // 2,
            dilation[1] * (kernel[1] - 1) // 2,
        )

    def forward(self, x: Tensor) -> Tensor:
        return F.conv2d(
            x, self.weight, self.bias, self.stride, self.dilation, self.padding
        )


class GRU(Module):
    weight_ih: Parameter
    weight_hh: Parameter
    bias_ih: Parameter
    bias_hh: Parameter
    hidden: int

    def __init__(self, rng: Rng, din: int, hidden: int) -> None:
        bound = 1.0 / math.sqrt(hidden)
        self.weight_ih = Parameter(
            rng.child(0).uniform((din, 3 * hidden), -bound, bound)
        )
        self.weight_hh = Parameter(
            rng.child(1).uniform((hidden, 3 * hidden), -bound, bound)
        )
        self.bias_ih = Parameter(rng.child(2).uniform((3 * hidden,), -bound, bound))
        self.bias_hh = Parameter(rng.child(3).uniform((3 * hidden,), -bound, bound))
        self.hidden = hidden

    def forward(self, x: Tensor, h0: Tensor | None = None) -> Tensor:
        h0 = Tensor(np.zeros(self.hidden)) if h0 is None else h0
        return F.gru_forward(
            x, h0, self.weight_ih, self.weight_hh, self.bias_ih, self.bias_hh
        )


class LayerNorm(Module):
    gain: Parameter
    shift: Parameter

    def __init__(self, size: int) -> None:
        self.gain = Parameter(np.ones(size))
        self.shift = Parameter(np.zeros(size))

    def forward(self, x: Tensor) -> Tensor:
        return F.layer_norm(x, self.gain, self.shift)


class MLP(Module):
    """Stack of Linear -> LayerNorm -> leaky_relu blocks."""

    linears: list[Linear]
    norms: list[LayerNorm]

    def __init__(self, rng: Rng, din: int, hidden: int, layers: int) -> None:
        sizes = [din] + [hidden] * layers
        self.linears = [
            Linear(rng.child(index), a, b)
            for index, (a, b) in enumerate(zip(sizes[:-1], sizes[1:], strict=True))
        ]
        self.norms = [LayerNorm(hidden) for _ in range(layers)]

    def forward(self, x: Tensor) -> Tensor:
        for linear, norm in zip(self.linears, self.norms, strict=True):
            x = F.leaky_relu(norm(linear(x)))
        return x
