import numpy as np
import pytest

from lilyvoc.dependencies import build_generator
from lilyvoc.domain.values.audio import AudioBuffer
from lilyvoc.domain.values.features import FeatureFrames
from lilyvoc.engine.rng import Rng
from lilyvoc.engine.tensor import Tensor, backward, no_grad
from lilyvoc.error import DimensionError
from lilyvoc.models.config import InstructNetSection, RunConfig
from lilyvoc.networks.bridgenet import BridgeNet
from lilyvoc.networks.exwavenet import ExWaveNet
from lilyvoc.networks.instructnet import InstructNet
from lilyvoc.synth.render import render_streams
from lilyvoc.synth.reverb import reverb

FRAMES = 20


def _features(rng: Rng, frames: int = FRAMES, n_mels: int = 120) -> FeatureFrames:
    return FeatureFrames(
        mel=rng.normal((frames, n_mels)),
        f0=np.full(frames, 220.0),
        loudness=np.full(frames, 0.5),
    )


def test_instructnet_control_shapes(rng: Rng, toy_config: RunConfig):
    net = InstructNet(rng, toy_config.instructnet, 120)
    features = _features(rng.child(9))
    controls, trace = net(Tensor(features.mel), features.f0, features.loudness)
    assert controls.harm_amp.shape == (FRAMES, 1)
    assert controls.harm_dist.shape == (FRAMES, 16)
    assert controls.noise_mags.shape == (FRAMES, 65)
    assert trace.recurrent.shape == (FRAMES, 32)
    # exp_sigmoid keeps every control strictly positive.
    assert np.all(controls.harm_dist.numpy() > 0)
    assert np.all(controls.noise_mags.numpy() > 0)


def test_instructnet_rejects_mismatched_inputs(rng: Rng, toy_config: RunConfig):
    net = InstructNet(rng, toy_config.instructnet, 120)
    with pytest.raises(DimensionError):
        _ = net(Tensor(np.zeros((FRAMES, 120))), np.zeros(FRAMES - 1), np.zeros(FRAMES))


def test_instructnet_needs_matching_gru_width(rng: Rng):
    with pytest.raises(DimensionError):
        _ = InstructNet(rng, InstructNetSection(hidden=16, gru_hidden=8), 120)


def test_bridgenet_upsamples_by_rate_ratio(rng: Rng, toy_config: RunConfig):
    net = BridgeNet(rng, toy_config.bridgenet, 6)
    harmonic = Tensor(rng.child(1).normal(800))
    noise = Tensor(rng.child(2).normal(800))
    latent = net(harmonic, noise)
    assert latent.shape == (8, 4800)
    with pytest.raises(DimensionError):
        _ = net(harmonic, Tensor(np.zeros(400)))


def test_exwavenet_output_is_bounded(rng: Rng, toy_config: RunConfig):
    net = ExWaveNet(rng, toy_config.exwavenet, 120, 8)
    assert net.receptive_field() == 1 + 4 * (1 + 2 + 4 + 8)
    mel = Tensor(rng.child(1).normal((FRAMES, 120)))
    audio = net(mel, Tensor(rng.child(2).normal((8, 240 * FRAMES)))).numpy()
    assert audio.shape == (240 * FRAMES,)
    assert np.all(np.abs(audio) <= 1.0)
    with pytest.raises(DimensionError):
        _ = net(mel, Tensor(np.zeros((8, 240 * FRAMES - 1))))


@pytest.mark.parametrize(
    "frames",
    [FRAMES, 10, 200, pytest.param(1000, marks=pytest.mark.slow)],
)
def test_generator_forward_lengths(rng: Rng, toy_config: RunConfig, frames: int):
    generator = build_generator(toy_config)
    with no_grad():
        output = generator(_features(rng, frames), Rng(1))
    assert len(output.audio) == 240 * frames
    assert output.audio.sample_rate == 48000
    assert output.instructive is not None
    assert len(output.instructive) == 40 * frames
    assert output.instructive.sample_rate == 8000
    assert output.harmonic.shape == output.noise.shape == (40 * frames,)


def test_inference_skips_instructive_render(rng: Rng, toy_config: RunConfig):
    generator = build_generator(toy_config)
    with no_grad():
        output = generator(_features(rng), Rng(1), training=False)
    assert output.instructive is None
    assert len(output.audio) == 240 * FRAMES


def test_generator_is_deterministic(rng: Rng, toy_config: RunConfig):
    features = _features(rng)
    with no_grad():
        a = build_generator(toy_config)(features, Rng(5)).audio.numpy()
        b = build_generator(toy_config)(features, Rng(5)).audio.numpy()
    np.testing.assert_array_equal(a, b)


def test_latent_ablation_keeps_output_length(rng: Rng, toy_config: RunConfig):
    config = toy_config.model_copy(
        update={"train": toy_config.train.model_copy(update={"latent_ablation": True})}
    )
    with no_grad():
        output = build_generator(config)(_features(rng), Rng(1))
    assert len(output.audio) == 240 * FRAMES


def test_gradients_reach_every_parameter(rng: Rng, toy_config: RunConfig):
    generator = build_generator(toy_config)
    output = generator(_features(rng), Rng(1))
    assert output.instructive is not None
    loss = (output.audio.samples**2).sum() + (output.instructive.samples**2).sum()
    backward(loss)
    silent = [
        name
        for name, param in generator.named_parameters()
        if param.grad is None or not np.any(param.grad != 0)
    ]
    assert silent == []


def test_last_gated_layer_only_feeds_skips(rng: Rng, toy_config: RunConfig):
    net = ExWaveNet(rng, toy_config.exwavenet, 120, 8)
    assert [layer.residual is None for layer in net.layers] == [
        False,
        False,
        False,
        True,
    ]


def test_instructive_audio_is_the_reverberated_stream_sum(
    rng: Rng, toy_config: RunConfig
):
    generator = build_generator(toy_config)
    features = _features(rng)
    with no_grad():
        output = generator(features, Rng(1))
        harmonic, noise = render_streams(output.controls, Rng(1), 8000)
        dry = AudioBuffer(output.harmonic + output.noise, 8000)
        expected = reverb(dry, generator.reverb.params())
    assert output.instructive is not None
    np.testing.assert_array_equal(output.harmonic.numpy(), harmonic.numpy())
    np.testing.assert_array_equal(output.noise.numpy(), noise.numpy())
    np.testing.assert_allclose(
        output.instructive.numpy(), expected.numpy(), rtol=0, atol=1e-12
    )


def test_exwavenet_influence_matches_receptive_field(rng: Rng, toy_config: RunConfig):
    net = ExWaveNet(rng, toy_config.exwavenet, 120, 8)
    mel = Tensor(rng.child(1).normal((FRAMES, 120)))
    latent = rng.child(2).normal((8, 240 * FRAMES))
    centre = 120 * FRAMES
    bumped = latent.copy()
    bumped[:, centre] += 1.0
    with no_grad():
        delta = net(mel, Tensor(bumped)).numpy() - net(mel, Tensor(latent)).numpy()
    reached = np.flatnonzero(np.abs(delta) > 1e-12)
    field = net.receptive_field()
    assert reached.size == field
    assert (reached.min(), reached.max()) == (centre - field // 2, centre + field // 2)


def test_default_exwavenet_receptive_field():
    config = RunConfig()
    net = ExWaveNet(Rng(0), config.exwavenet, 120, config.bridgenet.latent_channels)
    assert net.receptive_field() == 15289


@pytest.mark.parametrize("length", [800, 8000, 16000])
def test_bridgenet_length_is_exact(rng: Rng, toy_config: RunConfig, length: int):
    net = BridgeNet(rng, toy_config.bridgenet, 6)
    with no_grad():
        latent = net(Tensor(rng.child(1).normal(length)), Tensor(np.zeros(length)))
    assert latent.shape == (8, 6 * length)


def test_bridgenet_output_is_bounded_for_silence(rng: Rng, toy_config: RunConfig):
    net = BridgeNet(rng, toy_config.bridgenet, 6)
    with no_grad():
        latent = net(Tensor(np.zeros(800)), Tensor(np.zeros(800))).numpy()
    assert np.all(np.isfinite(latent))
    assert np.max(np.abs(latent)) < 10.0
