from lilyvoc.domain.values.spectral import BandSplit, Spectrogram
from lilyvoc.engine.tensor import Tensor


def band_split(spectrogram: Spectrogram, count: int = 3) -> list[Tensor]:
    """Equal contiguous sub-bands [B, bins_i]; concatenated they rebuild the input."""
    split = BandSplit.equal(spectrogram.config.num_bins, count)
    return [spectrogram.frames[:, start:stop] for start, stop in split.bands]
