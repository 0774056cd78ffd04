"""Multi-period and multi-resolution multi-band STFT critics."""

import math

from lilyvoc.domain.values.audio import AudioBuffer
from lilyvoc.domain.values.discriminator import DiscriminatorOutput
from lilyvoc.domain.values.spectral import StftConfig
from lilyvoc.dsp.bands import band_split
from lilyvoc.dsp.stft import stft_magnitude
from lilyvoc.engine import functional as F
from lilyvoc.engine.module import Conv2d, Module
from lilyvoc.engine.rng import Rng
from lilyvoc.engine.tensor import Tensor, pad
from lilyvoc.error import BadRequestError, InputTooShortError
from lilyvoc.models.config import MpdSection, MrMbsdSection

LOG_FLOOR = 1e-5


def reshape_period(x: AudioBuffer, period: int) -> Tensor:
    """Zero-pad to a multiple of `period` and fold to [1, ceil(N / p), p]."""
    if period < 2:
        raise BadRequestError(f"Period must be at least 2, got {period}.")
    length = len(x)
    rows = math.ceil(length / period)
    padded = pad(x.samples, [(0, rows * period - length)])
    return padded.reshape(1, rows, period)


class PeriodCritic(Module):
    """2-D conv stack over the (time, phase) fold of one period."""

    convs: list[Conv2d]
    post: Conv2d
    period: int

    def __init__(self, rng: Rng, config: MpdSection, period: int) -> None:
        sizes = [1, *config.channels]
        last = len(config.channels) - 1
        self.convs = [
            Conv2d(
                rng.child(index),
                sizes[index],
                sizes[index + 1],
                kernel=(config.kernel, 1),
                stride=(1 if index == last else config.stride, 1),
            )
            for index in range(len(config.channels))
        ]
        self.post = Conv2d(
            rng.child(len(config.channels)),
            sizes[-1],
            1,
            kernel=(config.post_kernel, 1),
            zero_init=config.zero_init_logits,
        )
        self.period = period

    def forward(self, x: AudioBuffer) -> tuple[Tensor, list[Tensor]]:
        h = reshape_period(x, self.period)
        features: list[Tensor] = []
        for conv in self.convs:
            h = F.leaky_relu(conv(h))
            features.append(h)
        return self.post(h), features


class MultiPeriodDiscriminator(Module):
    critics: list[PeriodCritic]

    def __init__(self, rng: Rng, config: MpdSection) -> None:
        self.critics = [
            PeriodCritic(rng.child(index), config, period)
            for index, period in enumerate(config.periods)
        ]

    def forward(self, x: AudioBuffer) -> DiscriminatorOutput:
        output = DiscriminatorOutput()
        for critic in self.critics:
            logits, features = critic(x)
            output.logits.append(logits)
            output.features.append(features)
        return output


class BandCritic(Module):
    """Conv stack over one log-magnitude sub-band laid out as [1, time, freq]."""

    convs: list[Conv2d]
    post: Conv2d

    def __init__(self, rng: Rng, config: MrMbsdSection) -> None:
        channels = config.channels
        self.convs = [Conv2d(rng.child(0), 1, channels[0], kernel=(3, 9))]
        for index, dilation in enumerate(config.time_dilations):
            self.convs.append(
                Conv2d(
                    rng.child(index + 1),
                    channels[index],
                    channels[index + 1],
                    kernel=(3, 9),
                    stride=(1, 2),
                    dilation=(dilation, 1),
                )
            )
        depth = len(config.time_dilations)
        self.convs.append(
            Conv2d(rng.child(depth + 1), channels[depth], channels[depth + 1], (3, 3))
        )
        self.post = Conv2d(
            rng.child(depth + 2),
            channels[-1],
            1,
            kernel=(3, 3),
            zero_init=config.zero_init_logits,
        )

    def forward(self, band: Tensor) -> tuple[Tensor, list[Tensor]]:
        h = (band + LOG_FLOOR).log().reshape(1, *band.shape)
        features: list[Tensor] = []
        for conv in self.convs:
            h = F.leaky_relu(conv(h))
            features.append(h)
        return self.post(h), features


class MultiBandStftDiscriminator(Module):
    """One critic per (STFT resolution, frequency band), resolution-major."""

    critics: list[list[BandCritic]]
    stft_configs: list[StftConfig]
    bands: int

    def __init__(self, rng: Rng, config: MrMbsdSection) -> None:
        self.stft_configs = [
            StftConfig(fft_size=fft, hop=hop, win_length=win)
            for fft, hop, win in config.stft_sets
        ]
        self.critics = [
            [BandCritic(rng.child(index, band), config) for band in range(config.bands)]
            for index in range(len(self.stft_configs))
        ]
        self.bands = config.bands

    @property
    def min_length(self) -> int:
        return max(stft.win_length for stft in self.stft_configs)

    def forward(self, x: AudioBuffer) -> DiscriminatorOutput:
        if len(x) < self.min_length:
            raise InputTooShortError(
                f"MR-MBSD needs at least {self.min_length} samples, got {len(x)}."
            )
        output = DiscriminatorOutput()
        for stft, critics in zip(self.stft_configs, self.critics, strict=True):
            spectrogram = stft_magnitude(x, stft)
            for band, critic in zip(
                band_split(spectrogram, self.bands), critics, strict=True
            ):
                logits, features = critic(band)
                output.logits.append(logits)
                output.features.append(features)
        return output


class MultiDiscriminator(Module):
    """MPD followed by MR-MBSD; outputs keep that order."""

    mpd: MultiPeriodDiscriminator
    mrmbsd: MultiBandStftDiscriminator

    def __init__(self, rng: Rng, mpd: MpdSection, mrmbsd: MrMbsdSection) -> None:
        self.mpd = MultiPeriodDiscriminator(rng.child(0), mpd)
        self.mrmbsd = MultiBandStftDiscriminator(rng.child(1), mrmbsd)

    def forward(self, x: AudioBuffer) -> DiscriminatorOutput:
        output = self.mpd(x)
        output.extend(self.mrmbsd(x))
        return output


def mpd_forward(mpd: MultiPeriodDiscriminator, x: AudioBuffer) -> DiscriminatorOutput:
    return mpd(x)


def mrmbsd_forward(
    mrmbsd: MultiBandStftDiscriminator, x: AudioBuffer
) -> DiscriminatorOutput:
    return mrmbsd(x)
