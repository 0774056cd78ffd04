from lilyvoc.engine import functional as F
from lilyvoc.engine.module import Conv1d, ConvTranspose1d, Module
from lilyvoc.engine.rng import Rng
from lilyvoc.engine.tensor import Tensor, concat, pad, stack
from lilyvoc.error import DimensionError, InternalError
from lilyvoc.models.config import BridgeNetSection


class BridgeNet(Module):
    """Upsamples the dry instructive streams to the output rate and refines them.

    A transposed convolution by `factor` feeds a 1-D UNet whose decoder mirrors
    the encoder strides and concatenates the matching encoder activations.
    """

    upsample: ConvTranspose1d
    encoder: list[Conv1d]
    decoder: list[ConvTranspose1d]
    out: Conv1d
    factor: int
    total_stride: int

    def __init__(self, rng: Rng, config: BridgeNetSection, factor: int) -> None:
        channels = config.channels
        strides = config.down_strides
        self.upsample = ConvTranspose1d(
            rng.child(0), 2, channels[0], kernel=2 * factor, stride=factor
        )
        self.encoder = [
            Conv1d(
                rng.child(1, level),
                channels[level],
                channels[level + 1],
                kernel=2 * stride,
                stride=stride,
                padding=stride // 2,
            )
            for level, stride in enumerate(strides)
        ]
        # Decoder level j undoes encoder level (depth - 1 - j).
        depth = len(strides)
        self.decoder = []
        for j, stride in enumerate(config.up_strides):
            level = depth - 1 - j
            c_in = channels[level + 1] * (1 if j == 0 else 2)
            self.decoder.append(
                ConvTranspose1d(
                    rng.child(2, j),
                    c_in,
                    channels[level],
                    kernel=2 * stride,
                    stride=stride,
                    padding=stride // 2,
                )
            )
        self.out = Conv1d(rng.child(3), 2 * channels[0], channels[0], config.out_kernel)
        self.factor = factor
        self.total_stride = config.total_stride

    def forward(self, harmonic: Tensor, noise: Tensor) -> Tensor:
        """Map [T] harmonic and noise streams to a latent [C_u, factor * T]."""
        if harmonic.shape != noise.shape or harmonic.ndim != 1:
            raise DimensionError(
                f"BridgeNet streams must be equal 1-D tensors, got {harmonic.shape} "
                f"and {noise.shape}."
            )
        length = harmonic.shape[0]
        target = self.factor * length
        full = self.upsample(stack([harmonic, noise]))
        # (T + 1) * factor samples; keep the centred T * factor.
        crop = self.factor // 2
        x = F.leaky_relu(full[:, crop : crop + target])

        padded_length = -(-target // self.total_stride) * self.total_stride
        x = pad(x, [(0, 0), (0, padded_length - target)])
        skips = [x]
        for conv in self.encoder:
            x = F.leaky_relu(conv(x))
            skips.append(x)
        skips.pop()
        for j, conv in enumerate(self.decoder):
            if j > 0:
                x = concat([x, skips.pop()], axis=0)
            x = F.leaky_relu(conv(x))
        x = concat([x, skips.pop()], axis=0)
        latent = self.out(x)
        if latent.shape[1] != padded_length:
            raise InternalError(
                f"BridgeNet produced {latent.shape[1]} samples from a "
                f"{padded_length}-sample input."
            )
        return latent[:, :target]
