import numpy as np
import pytest

from lilyvoc.engine import functional as F
from lilyvoc.engine.gradcheck import check_gradients
from lilyvoc.engine.rng import Rng
from lilyvoc.engine.tensor import Tensor, backward
from lilyvoc.error import BadRequestError, DimensionError, InputTooShortError

TOLERANCE = 1e-4


def _random(rng: Rng, *shape: int) -> Tensor:
    return Tensor(rng.normal(shape), requires_grad=True)


def test_linear_identity():
    out = F.linear(Tensor([[1.0, 2.0]]), Tensor(np.eye(2)))
    np.testing.assert_array_equal(out.numpy(), [[1.0, 2.0]])


def test_linear_with_bias():
    out = F.linear(Tensor([[1.0, 1.0]]), Tensor([[2.0], [3.0]]), Tensor([1.0]))
    np.testing.assert_array_equal(out.numpy(), [[6.0]])


def test_linear_rejects_mismatch():
    with pytest.raises(DimensionError):
        _ = F.linear(Tensor(np.ones((1, 3))), Tensor(np.ones((2, 2))))


def test_conv1d_unit_kernel_is_identity():
    x = Tensor([[1.0, 2.0, 3.0, 4.0]])
    out = F.conv1d(x, Tensor(np.ones((1, 1, 1))))
    np.testing.assert_array_equal(out.numpy(), x.numpy())


def test_conv1d_box_kernel():
    out = F.conv1d(Tensor([[1.0, 2.0, 3.0, 4.0]]), Tensor([[[1.0, 1.0]]]))
    np.testing.assert_array_equal(out.numpy(), [[3.0, 5.0, 7.0]])


def test_conv1d_output_length():
    x = Tensor(np.ones((2, 50)))
    kernels = Tensor(np.ones((3, 2, 5)))
    out = F.conv1d(x, kernels, stride=2, dilation=3, padding=4)
    assert out.shape == (3, F.conv1d_length(50, 5, 2, 3, 4))


def test_conv1d_rejects_bad_arguments():
    with pytest.raises(BadRequestError):
        _ = F.conv1d(Tensor(np.ones((1, 4))), Tensor(np.ones((1, 1, 2))), stride=0)
    with pytest.raises(DimensionError):
        _ = F.conv1d(Tensor(np.ones((2, 4))), Tensor(np.ones((1, 1, 2))))
    with pytest.raises(InputTooShortError):
        _ = F.conv1d(Tensor(np.ones((1, 2))), Tensor(np.ones((1, 1, 5))))


def test_conv_transpose_spreads_single_sample():
    out = F.conv_transpose1d(Tensor([[1.0]]), Tensor(np.ones((1, 1, 3))), stride=2)
    np.testing.assert_array_equal(out.numpy(), [[1.0, 1.0, 1.0]])


def test_conv_transpose_output_length():
    out = F.conv_transpose1d(
        Tensor(np.ones((1, 100))), Tensor(np.ones((1, 1, 12))), stride=6
    )
    assert out.shape == (1, 606)


def test_conv_transpose_is_adjoint_of_conv(rng: Rng):
    kernels = rng.child(0).normal((3, 2, 4))
    x = rng.child(1).normal((2, 20))
    y = rng.child(2).normal((3, 9))
    forward = F.conv1d(Tensor(x), Tensor(kernels), stride=2).numpy()
    adjoint = F.conv_transpose1d(Tensor(y), Tensor(kernels), stride=2).numpy()
    np.testing.assert_allclose(np.sum(forward * y), np.sum(x * adjoint))


def test_conv_gradients(rng: Rng):
    x = _random(rng.child(0), 2, 11)
    k = _random(rng.child(1), 3, 2, 3)
    b = _random(rng.child(2), 3)
    weights = rng.child(3).normal((3, 5))

    def loss() -> Tensor:
        return (F.conv1d(x, k, b, stride=2, dilation=2, padding=1) * weights).sum()

    assert check_gradients(loss, [x, k, b]) < TOLERANCE


def test_conv_transpose_gradients(rng: Rng):
    x = _random(rng.child(0), 2, 5)
    k = _random(rng.child(1), 2, 3, 4)
    weights = rng.child(2).normal((3, 8))

    def loss() -> Tensor:
        return (F.conv_transpose1d(x, k, stride=2, padding=2) * weights).sum()

    assert check_gradients(loss, [x, k]) < TOLERANCE


def test_conv2d_gradients(rng: Rng):
    x = _random(rng.child(0), 2, 7, 3)
    k = _random(rng.child(1), 2, 2, 3, 1)
    weights = rng.child(2).normal((2, 4, 3))

    def loss() -> Tensor:
        return (F.conv2d(x, k, stride=(2, 1), padding=(1, 0)) * weights).sum()

    assert check_gradients(loss, [x, k]) < TOLERANCE


def test_gru_with_zero_weights_stays_at_zero():
    out = F.gru_forward(
        Tensor(np.ones((4, 3))),
        Tensor(np.zeros(2)),
        Tensor(np.zeros((3, 6))),
        Tensor(np.zeros((2, 6))),
        Tensor(np.zeros(6)),
        Tensor(np.zeros(6)),
    )
    np.testing.assert_array_equal(out.numpy(), np.zeros((4, 2)))


def test_gru_gradients(rng: Rng):
    hidden = 3
    tensors = [
        _random(rng.child(0), 5, 2),
        _random(rng.child(1), hidden),
        _random(rng.child(2), 2, 3 * hidden),
        _random(rng.child(3), hidden, 3 * hidden),
        _random(rng.child(4), 3 * hidden),
        _random(rng.child(5), 3 * hidden),
    ]
    weights = rng.child(6).normal((5, hidden))

    def loss() -> Tensor:
        return (F.gru_forward(*tensors) * weights).sum()

    assert check_gradients(loss, tensors) < TOLERANCE


def test_activations():
    assert F.leaky_relu(Tensor([-1.0])).item() == pytest.approx(-0.1)
    assert F.leaky_relu(Tensor([2.0])).item() == 2.0
    assert F.sigmoid(Tensor([0.0])).item() == pytest.approx(0.5)
    assert F.tanh(Tensor([0.0])).item() == 0.0


def test_exp_sigmoid_is_monotone_and_bounded():
    out = F.exp_sigmoid(Tensor(np.linspace(-20.0, 20.0, 101))).numpy()
    assert np.all(np.diff(out) > 0)
    assert np.all(out > 0)
    assert np.all(out <= F.EXP_SIGMOID_MAX + F.EXP_SIGMOID_FLOOR)


def test_activation_gradients(rng: Rng):
    x = _random(rng, 7)
    for kind in F.Activation:

        def loss(kind: F.Activation = kind) -> Tensor:
            return (F.activation(x, kind) * Tensor(np.arange(1.0, 8.0))).sum()

        assert check_gradients(loss, [x]) < TOLERANCE


def test_layer_norm_normalises_last_axis(rng: Rng):
    x = Tensor(rng.normal((4, 16), scale=3.0) + 5.0)
    out = F.layer_norm(x, Tensor(np.ones(16)), Tensor(np.zeros(16))).numpy()
    np.testing.assert_allclose(out.mean(axis=-1), 0.0, atol=1e-12)
    np.testing.assert_allclose(out.std(axis=-1), 1.0, atol=1e-3)


def test_frame_and_overlap_add_are_adjoint(rng: Rng):
    x = rng.child(0).normal(40)
    framed = F.frame(Tensor(x), 8, 4)
    assert framed.shape == (9, 8)
    y = rng.child(1).normal(framed.shape)
    summed = F.overlap_add(Tensor(y), 4).numpy()
    np.testing.assert_allclose(np.sum(framed.numpy() * y), np.sum(x * summed))


def test_frame_rejects_short_signal():
    with pytest.raises(InputTooShortError):
        _ = F.frame_indices(4, 8, 2)


def test_rfft_magnitude_gradients(rng: Rng):
    frames = _random(rng.child(0), 3, 8)
    weights = rng.child(1).normal((3, 5))

    def loss() -> Tensor:
        return (F.rfft_magnitude(frames, 8) * weights).sum()

    assert check_gradients(loss, [frames]) < TOLERANCE


def test_fft_convolve_matches_direct_convolution(rng: Rng):
    signal = rng.child(0).normal(20)
    kernel = rng.child(1).normal(6)
    out = F.fft_convolve(Tensor(signal), Tensor(kernel)).numpy()
    np.testing.assert_allclose(out, np.convolve(signal, kernel)[:20], atol=1e-12)


def test_fft_convolve_gradients(rng: Rng):
    signal = _random(rng.child(0), 12)
    kernel = _random(rng.child(1), 5)
    weights = rng.child(2).normal(12)

    def loss() -> Tensor:
        return (F.fft_convolve(signal, kernel) * weights).sum()

    assert check_gradients(loss, [signal, kernel]) < TOLERANCE


def test_l2_norm_has_zero_subgradient_at_origin():
    x = Tensor(np.zeros(3), requires_grad=True)
    norm = F.l2_norm(x)
    assert norm.item() == 0.0
    backward(norm)
    np.testing.assert_array_equal(x.grad, np.zeros(3))


def test_l1_distance_is_mean_absolute_difference():
    assert F.l1_distance(Tensor([1.0, -1.0]), np.array([0.0, 1.0])).item() == 1.5
