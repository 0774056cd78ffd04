from collections.abc import Callable, Sequence

import numpy as np

from lilyvoc.engine.rng import Rng
from lilyvoc.engine.tensor import Tensor, backward

FD_STEP = 1e-5


def relative_error(analytic: float, numeric: float, floor: float = 1e-6) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def check_gradients(
    loss_fn: Callable[[], Tensor],
    tensors: Sequence[Tensor],
    samples_per_tensor: int | None = None,
    rng: Rng | None = None,
    step: float = FD_STEP,
    floor: float = 1e-6,
) -> float:
    """Compare backward() against central differences.

    `loss_fn` must rebuild the graph from `tensors` on every call. With
    `samples_per_tensor` only that many random entries of each tensor are
    perturbed. Returns the largest relative error seen.
    """
    for tensor in tensors:
        tensor.grad = None
    backward(loss_fn())
    analytic = [
        np.zeros(t.shape) if t.grad is None else t.grad.copy() for t in tensors
    ]
    rng = rng or Rng(0)
    worst = 0.0
    for position, tensor in enumerate(tensors):
        flat = tensor.data.reshape(-1)
        indices = np.arange(flat.size)
        if samples_per_tensor is not None and flat.size > samples_per_tensor:
            picker = rng.child(position)
            indices = np.array(
                [picker.integers(0, flat.size) for _ in range(samples_per_tensor)]
            )
        for index in indices:
            original = flat[index]
            flat[index] = original + step
            upper = loss_fn().item()
            flat[index] = original - step
            lower = loss_fn().item()
            flat[index] = original
            numeric = (upper - lower) / (2.0 * step)
            error = relative_error(
                float(analytic[position].reshape(-1)[index]), numeric, floor
            )
            worst = max(worst, error)
    return worst
