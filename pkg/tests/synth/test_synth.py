import numpy as np
import pytest
import scipy.signal

from lilyvoc.domain.values.audio import AudioBuffer
from lilyvoc.domain.values.controls import HnControls, ReverbParams, SampleRateControls
from lilyvoc.engine.gradcheck import check_gradients
from lilyvoc.engine.rng import Rng
from lilyvoc.engine.tensor import Array, Tensor, backward
from lilyvoc.error import DimensionError
from lilyvoc.synth.interpolate import control_hop, interpolate_controls
from lilyvoc.synth.noise import filtered_noise
from lilyvoc.synth.oscillator import harmonic_oscillator
from lilyvoc.synth.render import render_8k, render_streams, upsample_controls
from lilyvoc.synth.reverb import Reverb, reverb

RATE = 8000


def _sample_controls(f0: float, harmonics: int, length: int) -> SampleRateControls:
    return SampleRateControls(
        h=Tensor(np.ones((length, 1 + harmonics))),
        n=Tensor(np.zeros((1, 65))),
        f0=np.full(length, f0),
        sample_rate=RATE,
    )


def _frame_controls(frames: int, f0: float = 220.0) -> HnControls:
    return HnControls(
        harm_amp=Tensor(np.full((frames, 1), 0.5)),
        harm_dist=Tensor(np.ones((frames, 16))),
        noise_mags=Tensor(np.full((frames, 65), 0.01)),
        f0=np.full(frames, f0),
    )


def test_control_hop():
    assert control_hop(8000) == 40
    assert control_hop(48000) == 240


def test_interpolating_constant_frames_is_constant():
    frames = Tensor(np.full((5, 3), 0.7))
    out = interpolate_controls(frames, 200, 40)
    assert out.shape == (200, 3)
    np.testing.assert_allclose(out.numpy(), 0.7)


def test_interpolation_ramps_between_frame_centres():
    out = interpolate_controls(Tensor([[0.0], [1.0]]), 80, 40).numpy()[:, 0]
    np.testing.assert_array_equal(out[:20], 0.0)
    np.testing.assert_allclose(out[20:60], np.arange(20, 60) / 40 - 0.5)
    np.testing.assert_array_equal(out[60:], 1.0)


def test_interpolation_rejects_wrong_length():
    with pytest.raises(DimensionError):
        _ = interpolate_controls(Tensor(np.ones((2, 1))), 79, 40)


def test_single_harmonic_is_an_analytic_sine():
    audio, _ = harmonic_oscillator(_sample_controls(440.0, 1, 800), RATE)
    expected = np.sin(2.0 * np.pi * 440.0 * np.arange(800) / RATE)
    np.testing.assert_allclose(audio.numpy(), expected, atol=1e-9)


def test_unvoiced_samples_are_silent():
    audio, _ = harmonic_oscillator(_sample_controls(0.0, 4, 400), RATE)
    np.testing.assert_array_equal(audio.numpy(), np.zeros(400))


def test_harmonics_above_nyquist_are_dropped():
    audio, _ = harmonic_oscillator(_sample_controls(3000.0, 4, 400), RATE)
    expected = np.sin(2.0 * np.pi * 3000.0 * np.arange(400) / RATE)
    np.testing.assert_allclose(audio.numpy(), expected, atol=1e-9)


def test_aliased_harmonics_stay_below_minus_80_db():
    # 1.5 kHz with four harmonics: 4.5 and 6 kHz would fold to 3.5 and 2 kHz.
    audio, _ = harmonic_oscillator(_sample_controls(1500.0, 4, RATE), RATE)
    power = np.abs(np.fft.rfft(audio.numpy())) ** 2
    peak = power.max()
    for folded in (2000, 3500):
        assert 10 * np.log10(max(power[folded], 1e-30) / peak) <= -80.0
    assert power[1500] == pytest.approx(power[3000], rel=1e-9)


def test_oscillator_is_linear_in_amplitude(rng: Rng):
    dist = rng.uniform((400, 6), 0.1, 1.0)
    amp = rng.child(1).uniform((400, 1), 0.0, 1.0)

    def render(scale: float) -> Array:
        controls = SampleRateControls(
            h=Tensor(np.concatenate([scale * amp, dist], axis=1)),
            n=Tensor(np.zeros((1, 65))),
            f0=np.full(400, 310.0),
            sample_rate=RATE,
        )
        audio, _ = harmonic_oscillator(controls, RATE)
        return audio.numpy()

    np.testing.assert_allclose(render(2.5), 2.5 * render(1.0), rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(
        render(1.0) + render(0.5), render(1.5), rtol=1e-12, atol=1e-15
    )


def test_phase_carries_across_blocks():
    whole, _ = harmonic_oscillator(_sample_controls(330.0, 3, 600), RATE)
    first, phase = harmonic_oscillator(_sample_controls(330.0, 3, 250), RATE)
    second, _ = harmonic_oscillator(_sample_controls(330.0, 3, 350), RATE, phase)
    np.testing.assert_allclose(
        np.concatenate([first.numpy(), second.numpy()]), whole.numpy(), atol=1e-9
    )


def test_oscillator_gradients_reach_controls(rng: Rng):
    h = Tensor(rng.uniform((40, 4), 0.1, 1.0), requires_grad=True)
    weights = rng.child(1).normal(40)

    def loss() -> Tensor:
        controls = SampleRateControls(
            h=h, n=Tensor(np.zeros((1, 65))), f0=np.full(40, 500.0), sample_rate=RATE
        )
        audio, _ = harmonic_oscillator(controls, RATE)
        return (audio.samples * weights).sum()

    assert check_gradients(loss, [h]) < 1e-4


def test_zero_noise_magnitudes_are_silent(rng: Rng):
    noise = filtered_noise(Tensor(np.zeros((4, 65))), 160, rng)
    assert len(noise) == 160
    assert np.sqrt(np.mean(noise.numpy() ** 2)) < 1e-5


def test_noise_is_reproducible_per_rng():
    mags = Tensor(np.ones((4, 65)))
    a = filtered_noise(mags, 160, Rng(3)).numpy()
    b = filtered_noise(mags, 160, Rng(3)).numpy()
    c = filtered_noise(mags, 160, Rng(4)).numpy()
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    assert np.sqrt(np.mean(a**2)) > 1e-3


def test_noise_is_linear_in_magnitudes(rng: Rng):
    mags = Tensor(rng.uniform((2, 65), 0.0, 1.0), requires_grad=True)
    weights = rng.child(1).normal(80)

    def loss() -> Tensor:
        return (filtered_noise(mags, 80, Rng(5)).samples * weights).sum()

    assert check_gradients(loss, [mags], samples_per_tensor=10) < 1e-4


def test_noise_rejects_indivisible_length():
    with pytest.raises(DimensionError):
        _ = filtered_noise(Tensor(np.ones((3, 65))), 100, Rng(0))


def _noise_psd(mags: Array) -> tuple[Array, Array]:
    frames = 160
    noise = filtered_noise(Tensor(np.tile(mags, (frames, 1))), 200 * frames, Rng(11))
    return scipy.signal.welch(noise.numpy(), fs=RATE, nperseg=256)


def test_flat_magnitudes_give_white_noise():
    freqs, psd = _noise_psd(np.ones(65))
    band = (freqs >= 100.0) & (freqs <= 3800.0)
    level_db = 10 * np.log10(psd[band] / np.mean(psd[band]))
    assert np.all(np.abs(level_db) <= 3.0)


def test_band_limited_magnitudes_keep_energy_low():
    # Bins of 62.5 Hz; pass up to 937.5 Hz.
    mags = np.zeros(65)
    mags[:16] = 1.0
    freqs, psd = _noise_psd(mags)
    assert psd[freqs < RATE / 6].sum() >= 0.95 * psd.sum()


def test_unit_impulse_reverb_is_identity(rng: Rng):
    dry = AudioBuffer.from_array(rng.normal(300), RATE)
    wet = reverb(dry, ReverbParams.identity(50))
    np.testing.assert_allclose(wet.numpy(), dry.numpy(), atol=1e-12)


def test_two_tap_reverb_is_an_echo(rng: Rng):
    samples = rng.normal(300)
    ir = np.zeros(101)
    ir[0] = ir[100] = 1.0
    wet = reverb(AudioBuffer.from_array(samples, RATE), ReverbParams(Tensor(ir)))
    expected = samples.copy()
    expected[100:] += samples[:200]
    np.testing.assert_allclose(wet.numpy(), expected, atol=1e-12)


def test_reverb_module_trains_only_the_tail(rng: Rng):
    module = Reverb(rng, RATE, seconds=0.05)
    ir = module.params().ir
    assert ir.shape == (400,)
    assert ir.numpy()[0] == 1.0
    wet = module(AudioBuffer.from_array(rng.child(1).normal(200), RATE))
    backward((wet.samples * wet.samples).sum())
    assert [name for name, _ in module.named_parameters()] == ["tail"]
    assert module.tail.grad is not None


def test_upsampled_controls_span_hop_times_frames():
    upsampled = upsample_controls(_frame_controls(10), RATE)
    assert len(upsampled) == 400
    assert upsampled.h.shape == (400, 17)
    np.testing.assert_allclose(upsampled.f0, 220.0)


def test_render_length_and_reproducibility():
    controls = _frame_controls(200)
    harmonic, noise = render_streams(controls, Rng(1))
    assert harmonic.shape == (8000,)
    assert noise.shape == (8000,)
    again, _ = render_streams(controls, Rng(1))
    np.testing.assert_array_equal(harmonic.numpy(), again.numpy())


def test_dry_render_with_identity_reverb_sums_streams():
    render = render_8k(_frame_controls(20), Rng(2), ReverbParams.identity())
    assert len(render.audio) == 800
    np.testing.assert_allclose(
        render.audio.numpy(),
        render.harmonic.numpy() + render.noise.numpy(),
        atol=1e-12,
    )


def test_controls_reject_mismatched_frames():
    with pytest.raises(DimensionError):
        _ = HnControls(
            harm_amp=Tensor(np.ones((3, 1))),
            harm_dist=Tensor(np.ones((4, 2))),
            noise_mags=Tensor(np.ones((3, 65))),
            f0=np.ones(3),
        )
