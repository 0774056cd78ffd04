from dataclasses import dataclass

from lilyvoc.domain.values.audio import AudioBuffer
from lilyvoc.domain.values.controls import HnControls, ReverbParams, SampleRateControls
from lilyvoc.engine.rng import Rng
from lilyvoc.engine.tensor import Tensor, concat
from lilyvoc.synth.interpolate import control_hop, interpolate_controls
from lilyvoc.synth.noise import filter_noise_frames, noise_frame_magnitudes
from lilyvoc.synth.oscillator import harmonic_oscillator
from lilyvoc.synth.reverb import reverb

INSTRUCTIVE_RATE = 8000


@dataclass(frozen=True)
class InstructiveRender:
    """Reverberated instructive audio plus the dry streams BridgeNet reads."""

    audio: AudioBuffer
    harmonic: Tensor
    noise: Tensor


def upsample_controls(controls: HnControls, sample_rate: int) -> SampleRateControls:
    hop = control_hop(sample_rate)
    length = hop * controls.num_frames
    frames = concat([controls.harm_amp, controls.harm_dist], axis=1)
    h = interpolate_controls(frames, length, hop)
    f0 = interpolate_controls(
        Tensor(controls.f0.reshape(-1, 1)), length, hop
    ).data.reshape(length)
    n = noise_frame_magnitudes(controls.noise_mags, length)
    return SampleRateControls(h=h, n=n, f0=f0, sample_rate=sample_rate)


def render_streams(
    controls: HnControls, rng: Rng, sample_rate: int = INSTRUCTIVE_RATE
) -> tuple[Tensor, Tensor]:
    """Pre-reverb harmonic and noise sample streams, each [T]."""
    upsampled = upsample_controls(controls, sample_rate)
    harmonic, _ = harmonic_oscillator(upsampled, sample_rate)
    noise = filter_noise_frames(upsampled.n, len(upsampled), rng)
    return harmonic.samples, noise


def render_instructive(
    controls: HnControls,
    rng: Rng,
    reverb_params: ReverbParams,
    sample_rate: int = INSTRUCTIVE_RATE,
) -> InstructiveRender:
    harmonic, noise = render_streams(controls, rng, sample_rate)
    dry = AudioBuffer(harmonic + noise, sample_rate)
    return InstructiveRender(
        audio=reverb(dry, reverb_params), harmonic=harmonic, noise=noise
    )


def render_8k(
    controls: HnControls, rng: Rng, reverb_params: ReverbParams
) -> InstructiveRender:
    return render_instructive(controls, rng, reverb_params, INSTRUCTIVE_RATE)
