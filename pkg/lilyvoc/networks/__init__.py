from lilyvoc.networks.bridgenet import BridgeNet
from lilyvoc.networks.discriminators import (
    MultiBandStftDiscriminator,
    MultiDiscriminator,
    MultiPeriodDiscriminator,
    mpd_forward,
    mrmbsd_forward,
    reshape_period,
)
from lilyvoc.networks.exwavenet import ExWaveNet
from lilyvoc.networks.generator import Generator, GeneratorOutput, generator_forward
from lilyvoc.networks.instructnet import InstructNet

__all__ = [
    "BridgeNet",
    "ExWaveNet",
    "Generator",
    "GeneratorOutput",
    "InstructNet",
    "MultiBandStftDiscriminator",
    "MultiDiscriminator",
    "MultiPeriodDiscriminator",
    "generator_forward",
    "mpd_forward",
    "mrmbsd_forward",
    "reshape_period",
]
