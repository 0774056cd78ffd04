from lilyvoc.dsp.bands import band_split
from lilyvoc.dsp.loudness import loudness, loudness_db
from lilyvoc.dsp.mel import (
    feature_mel_config,
    instructive_mel_config,
    mel_filterbank,
    mel_spectrogram,
)
from lilyvoc.dsp.pitch import yin_pitch
from lilyvoc.dsp.resample import resample
from lilyvoc.dsp.stft import stft_magnitude

__all__ = [
    "band_split",
    "feature_mel_config",
    "instructive_mel_config",
    "loudness",
    "loudness_db",
    "mel_filterbank",
    "mel_spectrogram",
    "resample",
    "stft_magnitude",
    "yin_pitch",
]
