from lilyvoc.engine import functional as F
from lilyvoc.engine.module import Conv1d, ConvTranspose1d, Module
from lilyvoc.engine.rng import Rng
from lilyvoc.engine.tensor import Tensor, concat
from lilyvoc.error import DimensionError
from lilyvoc.models.config import ExWaveNetSection


class GatedLayer(Module):
    """Dilated tanh * sigmoid unit with residual and skip projections.

    The last layer of a stack only feeds the skip sum and has no residual
    projection.
    """

    dilated: Conv1d
    residual: Conv1d | None
    skip: Conv1d
    channels: int

    def __init__(  # noqa: PLR0913
        self,
        rng: Rng,
        channels: int,
        skip_channels: int,
        kernel: int,
        dilation: int,
        last: bool = False,
    ) -> None:
        self.dilated = Conv1d(
            rng.child(0), channels, 2 * channels, kernel, dilation=dilation
        )
        self.residual = None if last else Conv1d(rng.child(1), channels, channels, 1)
        self.skip = Conv1d(rng.child(2), channels, skip_channels, 1)
        self.channels = channels

    def forward(self, x: Tensor) -> tuple[Tensor, Tensor]:
        gates = self.dilated(x)
        hidden = F.tanh(gates[: self.channels]) * F.sigmoid(gates[self.channels :])
        if self.residual is not None:
            x = x + self.residual(hidden)
        return x, self.skip(hidden)


class ExWaveNet(Module):
    """Non-causal dilated convolution stack synthesising output-rate audio.

    The mel frames are upsampled by transposed convolutions to the latent
    length and concatenated with the latent channels.
    """

    upsampler: list[ConvTranspose1d]
    inlet: Conv1d
    layers: list[GatedLayer]
    post: Conv1d
    out: Conv1d
    hop: int
    kernel: int
    dilations: list[int]

    def __init__(
        self,
        rng: Rng,
        config: ExWaveNetSection,
        n_mels: int,
        latent_channels: int,
    ) -> None:
        width = config.upsample_channels
        sizes = [n_mels] + [width] * len(config.upsample_strides)
        self.upsampler = [
            ConvTranspose1d(
                rng.child(0, index),
                sizes[index],
                sizes[index + 1],
                kernel=2 * stride,
                stride=stride,
                padding=stride // 2,
            )
            for index, stride in enumerate(config.upsample_strides)
        ]
        residual = config.residual_channels
        self.inlet = Conv1d(rng.child(1), width + latent_channels, residual, 1)
        self.layers = [
            GatedLayer(
                rng.child(2, index),
                residual,
                config.skip_channels,
                config.kernel,
                dilation,
                last=index == len(config.dilations) - 1,
            )
            for index, dilation in enumerate(config.dilations)
        ]
        self.post = Conv1d(rng.child(3), config.skip_channels, config.skip_channels, 1)
        self.out = Conv1d(rng.child(4), config.skip_channels, 1, 1)
        self.hop = config.upsample_factor
        self.kernel = config.kernel
        self.dilations = config.dilations

    def receptive_field(self) -> int:
        """Latent samples that can influence one output sample."""
        return 1 + sum((self.kernel - 1) * dilation for dilation in self.dilations)

    def upsample_mel(self, mel: Tensor) -> Tensor:
        """[B, n_mels] frames to [width, hop * B] channels."""
        x = mel.T
        for conv in self.upsampler:
            x = F.leaky_relu(conv(x))
        return x

    def forward(self, mel: Tensor, latent: Tensor) -> Tensor:
        """Return [T'] samples in [-1, 1] for mel [B, n_mels] and latent [C_u, T']."""
        frames, length = mel.shape[0], latent.shape[1]
        if length != self.hop * frames:
            raise DimensionError(
                f"Latent has {length} samples but {frames} mel frames need "
                f"{self.hop * frames}."
            )
        x = self.inlet(concat([self.upsample_mel(mel), latent], axis=0))
        x, skips = self.layers[0](x)
        for layer in self.layers[1:]:
            x, skip = layer(x)
            skips = skips + skip
        y = self.out(F.leaky_relu(self.post(F.leaky_relu(skips))))
        return F.tanh(y).reshape(length)
