import math
from typing import ClassVar, Literal, Self

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

SECTION_CONFIG: ConfigDict = {"extra": "forbid", "frozen": True}

STFT_SETS: list[tuple[int, int, int]] = [
    (512, 128, 512),
    (1024, 256, 1024),
    (1024, 512, 1024),
    (2048, 512, 2048),
]


class AudioSection(BaseModel):
    sample_rate: int = 48000
    instructive_rate: Literal[4000, 8000, 16000, 24000] = 8000

    model_config: ClassVar[ConfigDict] = SECTION_CONFIG

    @property
    def upsample_factor(self) -> int:
        return self.sample_rate // self.instructive_rate


class FeaturesSection(BaseModel):
    n_mels: int = Field(120, ge=1)
    fft_size: int = 1024
    win_length: int = 960
    hop: int = 240
    instructive_mels: int = Field(80, ge=1)
    f0_min: float = Field(50.0, gt=0)
    f0_max: float = Field(1200.0, gt=0)
    yin_threshold: float = Field(0.15, gt=0, lt=1)
    workers: int = Field(4, ge=1)

    model_config: ClassVar[ConfigDict] = SECTION_CONFIG


class InstructNetSection(BaseModel):
    hidden: int = Field(512, ge=1)
    layers: int = Field(3, ge=1)
    gru_hidden: int = Field(512, ge=1)
    harmonics: int = Field(64, ge=1)
    noise_bins: Literal[65] = 65
    pitch_scale: float = Field(1200.0, gt=0)
    reverb_seconds: float = Field(0.5, gt=0)

    model_config: ClassVar[ConfigDict] = SECTION_CONFIG


class BridgeNetSection(BaseModel):
    channels: list[int] = [32, 64, 128, 256]
    down_strides: list[int] = [8, 2, 2]
    up_strides: list[int] = [2, 2, 8]
    out_kernel: int = Field(3, ge=1)

    model_config: ClassVar[ConfigDict] = SECTION_CONFIG

    @model_validator(mode="after")
    def check_strides(self) -> Self:
        if len(self.channels) != len(self.down_strides) + 1:
            raise ValueError("bridgenet.channels needs one entry per level plus one.")
        if list(reversed(self.down_strides)) != self.up_strides:
            raise ValueError("bridgenet.up_strides must mirror down_strides.")
        if any(stride < 1 or stride % 2 for stride in self.down_strides):
            raise ValueError("bridgenet strides must be even and positive.")
        return self

    @property
    def latent_channels(self) -> int:
        return self.channels[0]

    @property
    def total_stride(self) -> int:
        return math.prod(self.down_strides)


class ExWaveNetSection(BaseModel):
    layers: int = Field(18, ge=1)
    kernel: int = Field(15, ge=1)
    dilation_cycle: list[int] = [1, 3, 9, 27, 81, 243]
    residual_channels: int = Field(64, ge=1)
    skip_channels: int = Field(64, ge=1)
    upsample_strides: list[int] = [10, 6, 4]
    upsample_channels: int = Field(64, ge=1)

    model_config: ClassVar[ConfigDict] = SECTION_CONFIG

    @model_validator(mode="after")
    def check_shapes(self) -> Self:
        if self.kernel % 2 == 0:
            raise ValueError("exwavenet.kernel must be odd.")
        if any(stride < 1 or stride % 2 for stride in self.upsample_strides):
            raise ValueError("exwavenet.upsample_strides must be even and positive.")
        return self

    @property
    def dilations(self) -> list[int]:
        cycle = self.dilation_cycle
        return [cycle[index % len(cycle)] for index in range(self.layers)]

    @property
    def upsample_factor(self) -> int:
        return math.prod(self.upsample_strides)


class MpdSection(BaseModel):
    periods: list[int] = [2, 3, 5, 7, 11]
    channels: list[int] = [32, 128, 512, 512, 512]
    kernel: int = Field(5, ge=1)
    stride: int = Field(3, ge=1)
    post_kernel: int = Field(3, ge=1)
    zero_init_logits: bool = False

    model_config: ClassVar[ConfigDict] = SECTION_CONFIG

    @field_validator("periods")
    @classmethod
    def check_periods(cls, periods: list[int]) -> list[int]:
        if any(b <= a for a, b in zip(periods, periods[1:], strict=False)):
            raise ValueError("mpd.periods must be strictly increasing.")
        if periods and periods[0] < 2:
            raise ValueError("mpd.periods must be at least 2.")
        for index, a in enumerate(periods):
            for b in periods[index + 1 :]:
                if math.gcd(a, b) != 1:
                    raise ValueError(f"mpd.periods {a} and {b} are not coprime.")
        return periods


class MrMbsdSection(BaseModel):
    stft_sets: list[tuple[int, int, int]] = Field(default_factory=lambda: STFT_SETS)
    bands: int = Field(3, ge=1)
    channels: list[int] = [32, 64, 128, 256, 256]
    time_dilations: list[int] = [1, 2, 4]
    zero_init_logits: bool = False

    model_config: ClassVar[ConfigDict] = SECTION_CONFIG

    @model_validator(mode="after")
    def check_depth(self) -> Self:
        if len(self.channels) != len(self.time_dilations) + 2:
            raise ValueError("mrmbsd.channels needs len(time_dilations) + 2 entries.")
        return self


class LossSection(BaseModel):
    lambda_sp: float = Field(10.0, gt=0)
    lambda_fm: float = Field(1.0, gt=0)
    lambda_mel: float = Field(1.0, gt=0)
    lambda_adv: float = Field(120.0, gt=0)
    stft_sets: list[tuple[int, int, int]] = Field(default_factory=lambda: STFT_SETS)

    model_config: ClassVar[ConfigDict] = SECTION_CONFIG


class OptimSection(BaseModel):
    peak_lr: float = Field(2e-4, gt=0)
    warmup_steps: int = Field(5000, ge=0)
    decay: float = Field(0.999, gt=0, le=1)
    beta1: float = Field(0.8, ge=0, lt=1)
    beta2: float = Field(0.99, ge=0, lt=1)
    eps: float = Field(1e-8, gt=0)
    weight_decay: float = Field(0.01, ge=0)
    grad_clip: float = Field(10.0, gt=0)

    model_config: ClassVar[ConfigDict] = SECTION_CONFIG


class TrainSection(BaseModel):
    steps: int = Field(400000, ge=0)
    batch_size: int = Field(8, ge=1)
    crop_frames: int = Field(100, ge=2)
    checkpoint_every: int = Field(1000, ge=1)
    log_every: int = Field(1, ge=1)
    seed: int = Field(1234, ge=0)
    latent_ablation: bool = False
    detect_anomaly: bool = False

    model_config: ClassVar[ConfigDict] = SECTION_CONFIG


class InitSection(BaseModel):
    seed: int = Field(0, ge=0)

    model_config: ClassVar[ConfigDict] = SECTION_CONFIG


class PathsSection(BaseModel):
    data_dir: str = "data/features"
    checkpoint_dir: str = "runs/checkpoints"
    metrics_file: str = "runs/metrics.jsonl"

    model_config: ClassVar[ConfigDict] = SECTION_CONFIG


class RunConfig(BaseModel):
    """Every tunable of a run; the defaults are the full-scale settings."""

    audio: AudioSection = AudioSection()
    features: FeaturesSection = FeaturesSection()
    instructnet: InstructNetSection = InstructNetSection()
    bridgenet: BridgeNetSection = BridgeNetSection()
    exwavenet: ExWaveNetSection = ExWaveNetSection()
    mpd: MpdSection = MpdSection()
    mrmbsd: MrMbsdSection = MrMbsdSection()
    loss: LossSection = LossSection()
    optim: OptimSection = OptimSection()
    train: TrainSection = TrainSection()
    init: InitSection = InitSection()
    paths: PathsSection = PathsSection()

    model_config: ClassVar[ConfigDict] = SECTION_CONFIG

    @model_validator(mode="after")
    def check_rates(self) -> Self:
        if self.audio.sample_rate % self.audio.instructive_rate:
            raise ValueError("audio.instructive_rate must divide audio.sample_rate.")
        if self.exwavenet.upsample_factor != self.features.hop:
            raise ValueError(
                f"exwavenet.upsample_strides multiply to "
                f"{self.exwavenet.upsample_factor}, features.hop is "
                f"{self.features.hop}."
            )
        return self

    def model_fingerprint(self) -> dict[str, object]:
        """Sections that fix parameter shapes; a resume must match them."""
        return self.model_dump(
            include={
                "audio",
                "features",
                "instructnet",
                "bridgenet",
                "exwavenet",
                "mpd",
                "mrmbsd",
                "init",
            }
        )

    @classmethod
    def toy(cls) -> "RunConfig":
        """Desk-scale preset used by the tests and the convergence demo."""
        return cls(
            instructnet=InstructNetSection(
                hidden=32, layers=2, gru_hidden=32, harmonics=16, reverb_seconds=0.05
            ),
            bridgenet=BridgeNetSection(channels=[8, 8, 16, 16]),
            exwavenet=ExWaveNetSection(
                layers=4,
                kernel=5,
                dilation_cycle=[1, 2, 4, 8],
                residual_channels=8,
                skip_channels=8,
                upsample_channels=8,
            ),
            mpd=MpdSection(channels=[4, 8, 8, 8, 8]),
            mrmbsd=MrMbsdSection(channels=[4, 4, 8, 8, 8]),
            optim=OptimSection(peak_lr=1e-3, warmup_steps=10),
            train=TrainSection(
                steps=50, batch_size=1, crop_frames=100, checkpoint_every=25
            ),
        )
