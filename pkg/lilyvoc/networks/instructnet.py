from dataclasses import dataclass

import numpy as np

from lilyvoc.domain.values.controls import HnControls
from lilyvoc.engine import functional as F
from lilyvoc.engine.module import GRU, MLP, Linear, Module
from lilyvoc.engine.rng import Rng
from lilyvoc.engine.tensor import Array, Tensor
from lilyvoc.error import DimensionError
from lilyvoc.models.config import InstructNetSection


@dataclass(frozen=True)
class InstructNetTrace:
    """Intermediate sequences kept for inspection and tests."""

    pitch: Tensor
    fused: Tensor
    recurrent: Tensor


class InstructNet(Module):
    """Fuses pitch, loudness and mel into harmonic-plus-noise controls.

    c = f1(p) + f2(l) + f3(m) runs through a GRU; the GRU output plus f1(p)
    feeds a post MLP whose two heads give the harmonic and noise controls.
    """

    mlp_p: MLP
    mlp_l: MLP
    mlp_m: MLP
    gru: GRU
    mlp_post: MLP
    head_h: Linear
    head_n: Linear
    pitch_scale: float

    def __init__(self, rng: Rng, config: InstructNetSection, n_mels: int) -> None:
        hidden = config.hidden
        self.mlp_p = MLP(rng.child(0), 1, hidden, config.layers)
        self.mlp_l = MLP(rng.child(1), 1, hidden, config.layers)
        self.mlp_m = MLP(rng.child(2), n_mels, hidden, config.layers)
        self.gru = GRU(rng.child(3), hidden, config.gru_hidden)
        self.mlp_post = MLP(rng.child(4), config.gru_hidden, hidden, config.layers)
        self.head_h = Linear(rng.child(5), hidden, 1 + config.harmonics)
        self.head_n = Linear(rng.child(6), hidden, config.noise_bins)
        self.pitch_scale = config.pitch_scale
        if config.gru_hidden != hidden:
            raise DimensionError(
                f"GRU width {config.gru_hidden} must equal the MLP width {hidden} "
                "so the pitch embedding can be added to it."
            )

    def forward(
        self, mel: Tensor, f0: Array, loudness: Array
    ) -> tuple[HnControls, InstructNetTrace]:
        frames = mel.shape[0]
        if f0.shape != (frames,) or loudness.shape != (frames,):
            raise DimensionError(
                f"InstructNet inputs disagree on B: mel {mel.shape}, f0 {f0.shape}, "
                f"loudness {loudness.shape}."
            )
        pitch = self.mlp_p(Tensor((f0 / self.pitch_scale).reshape(frames, 1)))
        level = self.mlp_l(Tensor(np.asarray(loudness).reshape(frames, 1)))
        fused = pitch + level + self.mlp_m(mel)
        recurrent = self.gru(fused)
        hidden = self.mlp_post(recurrent + pitch)
        harmonic = F.exp_sigmoid(self.head_h(hidden))
        controls = HnControls(
            harm_amp=harmonic[:, :1],
            harm_dist=harmonic[:, 1:],
            noise_mags=F.exp_sigmoid(self.head_n(hidden)),
            f0=np.asarray(f0, dtype=np.float64),
        )
        return controls, InstructNetTrace(pitch=pitch, fused=fused, recurrent=recurrent)
