from dataclasses import dataclass

import numpy as np

from lilyvoc.domain.values.audio import AudioBuffer
from lilyvoc.domain.values.controls import HnControls
from lilyvoc.domain.values.features import FeatureFrames
from lilyvoc.engine.module import Module
from lilyvoc.engine.rng import Rng
from lilyvoc.engine.tensor import Tensor
from lilyvoc.models.config import RunConfig
from lilyvoc.networks.bridgenet import BridgeNet
from lilyvoc.networks.exwavenet import ExWaveNet
from lilyvoc.networks.instructnet import InstructNet
from lilyvoc.synth.reverb import Reverb, reverb
from lilyvoc.synth.render import render_streams


@dataclass(frozen=True)
class GeneratorOutput:
    audio: AudioBuffer
    instructive: AudioBuffer | None
    harmonic: Tensor
    noise: Tensor
    controls: HnControls


class Generator(Module):
    """InstructNet -> BridgeNet -> ExWaveNet.

    The reverberated instructive audio is only rendered while training; the
    dry harmonic and noise streams always feed BridgeNet.
    """

    instructnet: InstructNet
    reverb: Reverb
    bridgenet: BridgeNet
    exwavenet: ExWaveNet
    instructive_rate: int
    sample_rate: int
    latent_ablation: bool

    def __init__(self, rng: Rng, config: RunConfig) -> None:
        n_mels = config.features.n_mels
        rate = config.audio.instructive_rate
        self.instructnet = InstructNet(rng.child(0), config.instructnet, n_mels)
        self.reverb = Reverb(rng.child(1), rate, config.instructnet.reverb_seconds)
        self.bridgenet = BridgeNet(
            rng.child(2), config.bridgenet, config.audio.upsample_factor
        )
        self.exwavenet = ExWaveNet(
            rng.child(3), config.exwavenet, n_mels, config.bridgenet.latent_channels
        )
        self.instructive_rate = rate
        self.sample_rate = config.audio.sample_rate
        self.latent_ablation = config.train.latent_ablation

    def forward(
        self, features: FeatureFrames, rng: Rng, training: bool = True
    ) -> GeneratorOutput:
        mel = Tensor(features.mel)
        controls, _ = self.instructnet(mel, features.f0, features.loudness)
        harmonic, noise = render_streams(controls, rng, self.instructive_rate)
        instructive = None
        if training:
            dry = AudioBuffer(harmonic + noise, self.instructive_rate)
            instructive = reverb(dry, self.reverb.params())
        if self.latent_ablation:
            channels = self.bridgenet.out.weight.shape[0]
            length = self.bridgenet.factor * harmonic.shape[0]
            latent = Tensor(np.zeros((channels, length)))
        else:
            latent = self.bridgenet(harmonic, noise)
        audio = self.exwavenet(mel, latent)
        return GeneratorOutput(
            audio=AudioBuffer(audio, self.sample_rate),
            instructive=instructive,
            harmonic=harmonic,
            noise=noise,
            controls=controls,
        )


def generator_forward(
    generator: Generator, features: FeatureFrames, rng: Rng, training: bool = True
) -> GeneratorOutput:
    return generator(features, rng, training)
