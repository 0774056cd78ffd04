from lilyvoc.engine.module import (
    GRU,
    MLP,
    Conv1d,
    Conv2d,
    ConvTranspose1d,
    LayerNorm,
    Linear,
    Module,
    Parameter,
)
from lilyvoc.engine.rng import Rng
from lilyvoc.engine.tensor import (
    Graph,
    Tensor,
    as_tensor,
    backward,
    concat,
    detect_anomaly,
    no_grad,
    pad,
    stack,
    where,
)

__all__ = [
    "GRU",
    "MLP",
    "Conv1d",
    "Conv2d",
    "ConvTranspose1d",
    "Graph",
    "LayerNorm",
    "Linear",
    "Module",
    "Parameter",
    "Rng",
    "Tensor",
    "as_tensor",
    "backward",
    "concat",
    "detect_anomaly",
    "no_grad",
    "pad",
    "stack",
    "where",
]
