"""
METARX Training Configuration
Learning rates, iteration budgets and meta-learning switches shared by
every training regime.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from enum import Enum
from typing import Any, Dict, Optional


class MetaMode(Enum):
    FIRST_ORDER = "first_order"
    EXACT_HVP = "exact_hvp"


class ThetaPolicy(Enum):
    # theta stays at its last meta-learned value between meta events
    HOLD = "hold"
    # theta follows the most recent online-trained weights between meta events
    TRACK = "track"


@dataclass(frozen=True)
class TrainConfig:
    eta: float = 1e-3
    kappa: float = 0.1
    sgd_iterations: int = 200
    meta_iterations: int = 200
    meta_frequency: int = 5
    gate_threshold: float = 0.02
    batch_size: int = 64
    meta_mode: MetaMode = MetaMode.FIRST_ORDER
    optimizer: str = "adam"
    meta_pair_draws: int = 1
    buffer_size: int = 20
    joint_iterations: int = 1000
    initial_meta_sweeps: int = 1
    hvp_step: float = 1e-5
    theta_policy: ThetaPolicy = ThetaPolicy.HOLD
    meta_support_lr: Optional[float] = None
    meta_outer_lr: Optional[float] = None

    def __post_init__(self) -> None:
        if self.eta < 0 or self.kappa < 0:
            raise ValueError("learning rates must be non-negative")
        if self.meta_frequency < 1:
            raise ValueError("meta frequency must be >= 1")
        if not 0.0 <= self.gate_threshold <= 1.0:
            raise ValueError("gate threshold must lie in [0, 1]")
        if self.batch_size < 1 or self.buffer_size < 1:
            raise ValueError("batch and buffer sizes must be positive")
        if min(self.sgd_iterations, self.meta_iterations, self.joint_iterations, self.initial_meta_sweeps) < 0:
            raise ValueError("iteration counts must be non-negative")
        if self.meta_pair_draws < 0:
            raise ValueError("meta pair draws must be non-negative")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer: {self.optimizer}")

    @property
    def support_lr(self) -> float:
        return self.eta if self.meta_support_lr is None else self.meta_support_lr

    @property
    def outer_lr(self) -> float:
        return self.kappa if self.meta_outer_lr is None else self.meta_outer_lr

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        values = {key: value for key, value in data.items() if key in known}
        if "meta_mode" in values:
            values["meta_mode"] = MetaMode(values["meta_mode"])
        if "theta_policy" in values:
            values["theta_policy"] = ThetaPolicy(values["theta_policy"])
        return cls(**values)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["meta_mode"] = self.meta_mode.value
        data["theta_policy"] = self.theta_policy.value
        return data
