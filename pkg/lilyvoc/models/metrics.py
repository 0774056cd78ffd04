from typing import ClassVar

from pydantic import BaseModel, ConfigDict


class MetricsRecord(BaseModel):
    """One line of the training metrics log."""

    step: int
    lr: float
    loss_sp: float
    loss_fm: float
    loss_mel_8k: float
    loss_mel_48k: float
    loss_adv_g: float
    loss_adv_d: float
    loss_g_total: float
    loss_non_adv: float
    grad_norm_g: float
    grad_norm_d: float

    model_config: ClassVar[ConfigDict] = {"extra": "forbid", "frozen": True}
