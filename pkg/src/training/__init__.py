# METARX Training Module
from .buffer import (
    LabeledBlock,
    NoValidPairError,
    NonMonotonicIndexError,
    PairBuffer,
    buffer_push,
    sample_consecutive_pair,
)
from .config import MetaMode, ThetaPolicy, TrainConfig
from .meta import (
    InsufficientPilotsError,
    meta_gradient,
    meta_train_initial,
    meta_update,
    meta_update_counted,
)
from .modular import modular_meta_update, modular_online_train
from .objective import MlpObjective, Objective, QuadraticObjective
from .online import joint_train, online_train, run_optimizer

__all__ = [
    "LabeledBlock",
    "NoValidPairError",
    "NonMonotonicIndexError",
    "PairBuffer",
    "buffer_push",
    "sample_consecutive_pair",
    "MetaMode",
    "ThetaPolicy",
    "TrainConfig",
    "InsufficientPilotsError",
    "meta_gradient",
    "meta_train_initial",
    "meta_update",
    "meta_update_counted",
    "modular_meta_update",
    "modular_online_train",
    "MlpObjective",
    "Objective",
    "QuadraticObjective",
    "joint_train",
    "online_train",
    "run_optimizer",
]
