from pydantic import BaseModel


class PairReport(BaseModel):
    stem: str
    spectral: float
    mel: float
    f0_rmse: float
    voiced_frames: int


class EvalReport(BaseModel):
    pairs: list[PairReport]
    unpaired: list[str] = []
    mean_spectral: float
    mean_mel: float
    mean_f0_rmse: float


class SynthReport(BaseModel):
    output: str
    samples: int
    seconds: float
    rtf: float


class ExtractReport(BaseModel):
    clips: list[str]
    failed: dict[str, str] = {}
    frames: int


class TrainReport(BaseModel):
    start_step: int
    final_step: int
    checkpoint: str | None = None
    export: str | None = None
