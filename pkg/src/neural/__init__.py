# METARX Neural Module
from .checkpoint import load_params, save_params
from .mlp import (
    Activation,
    LabeledBatch,
    MlpSpec,
    NumericalError,
    clamp_tally,
    classifier_spec,
    flatten,
    forward,
    forward_batch,
    forward_log_batch,
    loss_and_grad,
    mlp_init,
    param_count,
    relu_pattern,
    unflatten,
)
from .optim import (
    AdamOptimizer,
    AdamState,
    Optimizer,
    SgdOptimizer,
    adam_step,
    finite_diff_hvp,
    get_optimizer,
    hvp_finite_diff,
    sgd_step,
)

__all__ = [
    "load_params",
    "save_params",
    "Activation",
    "LabeledBatch",
    "MlpSpec",
    "NumericalError",
    "clamp_tally",
    "classifier_spec",
    "flatten",
    "forward",
    "forward_batch",
    "forward_log_batch",
    "loss_and_grad",
    "mlp_init",
    "param_count",
    "relu_pattern",
    "unflatten",
    "AdamOptimizer",
    "AdamState",
    "Optimizer",
    "SgdOptimizer",
    "adam_step",
    "finite_diff_hvp",
    "get_optimizer",
    "hvp_finite_diff",
    "sgd_step",
]
