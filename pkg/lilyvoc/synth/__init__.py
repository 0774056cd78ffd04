from lilyvoc.synth.interpolate import control_hop, interpolate_controls
from lilyvoc.synth.noise import filtered_noise
from lilyvoc.synth.oscillator import harmonic_oscillator
from lilyvoc.synth.render import (
    INSTRUCTIVE_RATE,
    InstructiveRender,
    render_8k,
    render_instructive,
    render_streams,
    upsample_controls,
)
from lilyvoc.synth.reverb import Reverb, reverb

__all__ = [
    "INSTRUCTIVE_RATE",
    "InstructiveRender",
    "Reverb",
    "control_hop",
    "filtered_noise",
    "harmonic_oscillator",
    "interpolate_controls",
    "render_8k",
    "render_instructive",
    "render_streams",
    "reverb",
    "upsample_controls",
]
