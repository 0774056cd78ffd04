import math
from enum import Enum

import numpy as np
import scipy.signal

from lilyvoc.engine.tensor import Array, Tensor, as_tensor
from lilyvoc.error import BadRequestError, DimensionError, InputTooShortError

LEAKY_SLOPE = 0.1
EXP_SIGMOID_EXPONENT = math.log(10.0)
EXP_SIGMOID_MAX = 2.0
EXP_SIGMOID_FLOOR = 1e-7


class Activation(str, Enum):
    LEAKY_RELU = "leaky_relu"
    SIGMOID = "sigmoid"
    TANH = "tanh"
    EXP_SIGMOID = "exp_sigmoid"


def linear(x: Tensor, weight: Tensor, bias: Tensor | None = None) -> Tensor:
    if x.ndim != 2 or weight.ndim != 2 or x.shape[1] != weight.shape[0]:
        raise DimensionError(
            f"linear() input {x.shape} does not match weight {weight.shape}."
        )
    out = x @ weight
    if bias is not None:
        if bias.shape != (weight.shape[1],):
            raise DimensionError(
                f"linear() bias {bias.shape} does not match weight {weight.shape}."
            )
        out = out + bias
    return out


def conv1d_length(
    length: int, kernel: int, stride: int = 1, dilation: int = 1, padding: int = 0
) -> int:
    return (length + 2 * padding - dilation * (kernel - 1) - 1) // stride + 1


def conv1d(  # noqa: PLR0913
    x: Tensor,
    kernels: Tensor,
    bias: Tensor | None = None,
    stride: int = 1,
    dilation: int = 1,
    padding: int = 0,
) -> Tensor:
    """Cross-correlation of x[C_in, L] with kernels[C_out, C_in, K]."""
    if min(stride, dilation) < 1 or kernels.ndim != 3 or kernels.shape[2] < 1:
        raise BadRequestError(
            f"Invalid conv1d parameters: kernels {kernels.shape}, "
            f"stride {stride}, dilation {dilation}."
        )
    if x.ndim != 2 or x.shape[0] != kernels.shape[1]:
        raise DimensionError(
            f"conv1d() input {x.shape} does not match kernels {kernels.shape}."
        )
    c_out, _, k_size = kernels.shape
    length = x.shape[1]
    out_len = conv1d_length(length, k_size, stride, dilation, padding)
    if out_len <= 0:
        raise InputTooShortError(
            f"conv1d() input length {length} too short for kernel {k_size}, "
            f"dilation {dilation}, padding {padding}."
        )
    xp = np.pad(x.data, ((0, 0), (padding, padding)))
    w = kernels.data
    span = stride * (out_len - 1) + 1

    def window(k: int) -> slice:
        return slice(k * dilation, k * dilation + span, stride)

    out = np.zeros((c_out, out_len))
    for k in range(k_size):
        out += w[:, :, k] @ xp[:, window(k)]

    def backward(g: Array) -> tuple[Array, Array]:
        grad_xp = np.zeros_like(xp)
        grad_w = np.zeros_like(w)
        for k in range(k_size):
            cols = xp[:, window(k)]
            grad_w[:, :, k] = g @ cols.T
            grad_xp[:, window(k)] += w[:, :, k].T @ g
        return grad_xp[:, padding : padding + length], grad_w

    result = Tensor._make(out, (x, kernels), backward, "conv1d")
    if bias is not None:
        result = result + bias.reshape(c_out, 1)
    return result


def conv_transpose1d(  # noqa: PLR0913
    x: Tensor,
    kernels: Tensor,
    bias: Tensor | None = None,
    stride: int = 1,
    padding: int = 0,
) -> Tensor:
    """Adjoint of conv1d for x[C_in, L] and kernels[C_in, C_out, K].

    Output length is (L - 1) * stride + K - 2 * padding.
    """
    if stride < 1:
        raise BadRequestError(f"conv_transpose1d() stride must be >= 1, got {stride}.")
    if x.ndim != 2 or x.shape[1] == 0:
        raise InputTooShortError(f"conv_transpose1d() got empty input {x.shape}.")
    if kernels.ndim != 3 or x.shape[0] != kernels.shape[0]:
        raise DimensionError(
            f"conv_transpose1d() input {x.shape} does not match kernels "
            f"{kernels.shape}."
        )
    _, c_out, k_size = kernels.shape
    length = x.shape[1]
    full_len = (length - 1) * stride + k_size
    if full_len - 2 * padding <= 0:
        raise InputTooShortError(
            f"conv_transpose1d() padding {padding} removes the whole output."
        )
    xd, w = x.data, kernels.data
    span = stride * (length - 1) + 1

    def window(k: int) -> slice:
        return slice(k, k + span, stride)

    out = np.zeros((c_out, full_len))
    for k in range(k_size):
        out[:, window(k)] += w[:, :, k].T @ xd
    out = out[:, padding : full_len - padding]

    def backward(g: Array) -> tuple[Array, Array]:
        full = np.pad(g, ((0, 0), (padding, padding)))
        grad_x = np.zeros_like(xd)
        grad_w = np.zeros_like(w)
        for k in range(k_size):
            cols = full[:, window(k)]
            grad_x += w[:, :, k] @ cols
            grad_w[:, :, k] = xd @ cols.T
        return grad_x, grad_w

    result = Tensor._make(out, (x, kernels), backward, "conv_transpose1d")
    if bias is not None:
        result = result + bias.reshape(c_out, 1)
    return result


def conv2d(  # noqa: PLR0913
    x: Tensor,
    kernels: Tensor,
    bias: Tensor | None = None,
    stride: tuple[int, int] = (1, 1),
    dilation: tuple[int, int] = (1, 1),
    padding: tuple[int, int] = (0, 0),
) -> Tensor:
    """Cross-correlation of x[C_in, H, W] with kernels[C_out, C_in, KH, KW]."""
    if x.ndim != 3 or kernels.ndim != 4 or x.shape[0] != kernels.shape[1]:
        raise DimensionError(
            f"conv2d() input {x.shape} does not match kernels {kernels.shape}."
        )
    c_out, _, kh, kw = kernels.shape
    _, height, width = x.shape
    out_h = conv1d_length(height, kh, stride[0], dilation[0], padding[0])
    out_w = conv1d_length(width, kw, stride[1], dilation[1], padding[1])
    if out_h <= 0 or out_w <= 0:
        raise InputTooShortError(
            f"conv2d() input {x.shape} too small for kernels {kernels.shape}."
        )
    xp = np.pad(x.data, ((0, 0), padding[:1] * 2, padding[1:] * 2))
    w = kernels.data
    span_h = stride[0] * (out_h - 1) + 1
    span_w = stride[1] * (out_w - 1) + 1

    def window(i: int, j: int) -> tuple[slice, slice, slice]:
        top, left = i * dilation[0], j * dilation[1]
        return (
            slice(None),
            slice(top, top + span_h, stride[0]),
            slice(left, left + span_w, stride[1]),
        )

    out = np.zeros((c_out, out_h, out_w))
    for i in range(kh):
        for j in range(kw):
            out += np.tensordot(w[:, :, i, j], xp[window(i, j)], axes=(1, 0))

    def backward(g: Array) -> tuple[Array, Array]:
        grad_xp = np.zeros_like(xp)
        grad_w = np.zeros_like(w)
        for i in range(kh):
            for j in range(kw):
                cols = xp[window(i, j)]
                grad_w[:, :, i, j] = np.tensordot(g, cols, axes=((1, 2), (1, 2)))
                grad_xp[window(i, j)] += np.tensordot(w[:, :, i, j], g, axes=(0, 0))
        return (
            grad_xp[
                :, padding[0] : padding[0] + height, padding[1] : padding[1] + width
            ],
            grad_w,
        )

    result = Tensor._make(out, (x, kernels), backward, "conv2d")
    if bias is not None:
        result = result + bias.reshape(c_out, 1, 1)
    return result


def _sigmoid(a: Array) -> Array:
    return np.exp(-np.logaddexp(0.0, -a))


def gru_forward(  # noqa: PLR0913
    x: Tensor,
    h0: Tensor,
    weight_ih: Tensor,
    weight_hh: Tensor,
    bias_ih: Tensor,
    bias_hh: Tensor,
) -> Tensor:
    """Run a GRU over x[B, din] and return every hidden state g[B, H].

    Gate blocks are ordered (reset, update, candidate) along the 3H axis of
    weight_ih[din, 3H] and weight_hh[H, 3H].
    """
    steps, din = x.shape
    hidden = h0.shape[0]
    if weight_ih.shape != (din, 3 * hidden) or weight_hh.shape != (hidden, 3 * hidden):
        raise DimensionError(
            f"GRU weights {weight_ih.shape}, {weight_hh.shape} do not match input "
            f"{x.shape} and hidden size {hidden}."
        )
    w_hh = weight_hh.data
    projected = x.data @ weight_ih.data + bias_ih.data
    states = np.zeros((steps + 1, hidden))
    states[0] = h0.data
    resets = np.zeros((steps, hidden))
    updates = np.zeros((steps, hidden))
    candidates = np.zeros((steps, hidden))
    recurrent_n = np.zeros((steps, hidden))
    for t in range(steps):
        rec = states[t] @ w_hh + bias_hh.data
        r = _sigmoid(projected[t, :hidden] + rec[:hidden])
        z = _sigmoid(projected[t, hidden : 2 * hidden] + rec[hidden : 2 * hidden])
        n = np.tanh(projected[t, 2 * hidden :] + r * rec[2 * hidden :])
        states[t + 1] = (1.0 - z) * n + z * states[t]
        resets[t], updates[t], candidates[t] = r, z, n
        recurrent_n[t] = rec[2 * hidden :]

    def backward(g: Array) -> tuple[Array, Array, Array, Array, Array, Array]:
        grad_proj = np.zeros_like(projected)
        grad_rec = np.zeros((steps, 3 * hidden))
        carry = np.zeros(hidden)
        for t in reversed(range(steps)):
            dh = g[t] + carry
            r, z, n = resets[t], updates[t], candidates[t]
            dn = dh * (1.0 - z) * (1.0 - n * n)
            dz = dh * (states[t] - n) * z * (1.0 - z)
            dr = dn * recurrent_n[t] * r * (1.0 - r)
            grad_proj[t] = np.concatenate([dr, dz, dn])
            grad_rec[t] = np.concatenate([dr, dz, dn * r])
            carry = dh * z + grad_rec[t] @ w_hh.T
        return (
            grad_proj @ weight_ih.data.T,
            carry,
            x.data.T @ grad_proj,
            states[:-1].T @ grad_rec,
            grad_proj.sum(axis=0),
            grad_rec.sum(axis=0),
        )

    return Tensor._make(
        states[1:],
        (x, h0, weight_ih, weight_hh, bias_ih, bias_hh),
        backward,
        "gru",
    )


def leaky_relu(x: Tensor, slope: float = LEAKY_SLOPE) -> Tensor:
    a = x.data
    scale = np.where(a > 0, 1.0, slope)
    return Tensor._make(a * scale, (x,), lambda g: (g * scale,), "leaky_relu")


def sigmoid(x: Tensor) -> Tensor:
    out = _sigmoid(x.data)
    return Tensor._make(out, (x,), lambda g: (g * out * (1.0 - out),), "sigmoid")


def tanh(x: Tensor) -> Tensor:
    out = np.tanh(x.data)
    return Tensor._make(out, (x,), lambda g: (g * (1.0 - out * out),), "tanh")


def exp_sigmoid(x: Tensor) -> Tensor:
    """Strictly positive, bounded amplitude nonlinearity."""
    s = _sigmoid(x.data)
    powered = s**EXP_SIGMOID_EXPONENT
    out = EXP_SIGMOID_MAX * powered + EXP_SIGMOID_FLOOR
    return Tensor._make(
        out,
        (x,),
        lambda g: (g * EXP_SIGMOID_MAX * EXP_SIGMOID_EXPONENT * powered * (1.0 - s),),
        "exp_sigmoid",
    )


def activation(x: Tensor, kind: Activation) -> Tensor:
    match kind:
        case Activation.LEAKY_RELU:
            return leaky_relu(x)
        case Activation.SIGMOID:
            return sigmoid(x)
        case Activation.TANH:
            return tanh(x)
        case Activation.EXP_SIGMOID:
            return exp_sigmoid(x)


def layer_norm(x: Tensor, gain: Tensor, shift: Tensor, eps: float = 1e-5) -> Tensor:
    centred = x - x.mean(axis=-1, keepdims=True)
    variance = (centred * centred).mean(axis=-1, keepdims=True)
    return centred / (variance + eps).sqrt() * gain + shift


def frame_indices(length: int, frame_length: int, hop: int) -> Array:
    count = (length - frame_length) // hop + 1
    if count <= 0:
        raise InputTooShortError(
            f"Signal of {length} samples is shorter than one frame ({frame_length})."
        )
    return np.arange(count)[:, None] * hop + np.arange(frame_length)[None, :]


def frame(x: Tensor, frame_length: int, hop: int) -> Tensor:
    """Slice x[L] into frames[F, frame_length] (no padding)."""
    return x[frame_indices(x.shape[0], frame_length, hop)]


def overlap_add(frames: Tensor, hop: int) -> Tensor:
    """Adjoint of `frame`: sum frames[F, N] at offsets f * hop."""
    count, frame_length = frames.shape
    length = (count - 1) * hop + frame_length
    index = np.arange(count)[:, None] * hop + np.arange(frame_length)[None, :]
    out = np.zeros(length)
    np.add.at(out, index, frames.data)
    return Tensor._make(out, (frames,), lambda g: (g[index],), "overlap_add")


def rfft_magnitude(frames: Tensor, n_fft: int) -> Tensor:
    """|rfft| along the last axis of frames[F, n_fft]."""
    if frames.shape[-1] != n_fft or n_fft % 2:
        raise DimensionError(
            f"rfft_magnitude() needs frames of even length {n_fft}, got {frames.shape}."
        )
    spectrum = np.fft.rfft(frames.data, n=n_fft, axis=-1)
    magnitude = np.abs(spectrum)

    def backward(g: Array) -> tuple[Array]:
        safe = np.where(magnitude > 0, magnitude, 1.0)
        cotangent = np.where(magnitude > 0, g / safe, 0.0) * spectrum
        # Hermitian irfft doubles interior bins, so halve them first.
        cotangent[..., 1:-1] *= 0.5
        return (np.fft.irfft(cotangent, n=n_fft, axis=-1) * n_fft,)

    return Tensor._make(magnitude, (frames,), backward, "rfft_magnitude")


def fft_convolve(signal: Tensor, kernel: Tensor) -> Tensor:
    """Linear convolution of two 1-D tensors truncated to len(signal)."""
    length, taps = signal.shape[0], kernel.shape[0]
    a, b = signal.data, kernel.data
    out = scipy.signal.fftconvolve(a, b)[:length]

    def backward(g: Array) -> tuple[Array, Array]:
        grad_a = scipy.signal.fftconvolve(g, b[::-1])[taps - 1 : taps - 1 + length]
        grad_b = np.zeros(taps)
        corr = scipy.signal.fftconvolve(g, a[::-1])[length - 1 :]
        grad_b[: min(taps, corr.shape[0])] = corr[:taps]
        return grad_a, grad_b

    return Tensor._make(out, (signal, kernel), backward, "fft_convolve")


def l1_distance(a: Tensor, b: Tensor | Array) -> Tensor:
    return (a - as_tensor(b)).abs().mean()


def l2_norm(x: Tensor) -> Tensor:
    """Frobenius norm with a zero subgradient at the origin."""
    a = x.data
    norm = float(np.sqrt(np.sum(a * a)))
    scale = 1.0 / norm if norm > 0.0 else 0.0
    return Tensor._make(np.array(norm), (x,), lambda g: (g * a * scale,), "l2_norm")
