# METARX Receivers Module
from .deepsic import (
    DeepSicNet,
    all_modules,
    deepsic_forward,
    deepsic_train_sequential,
    dynamic_module_set,
    load_deepsic,
    module_batch,
    save_deepsic,
    stage_estimates,
)
from .viterbinet import (
    Trellis,
    ViterbiNet,
    nn_loglik_table,
    state_labels,
    true_loglik_table,
    viterbi_csi_detect,
    viterbi_detect,
    viterbinet_training_batch,
)

__all__ = [
    "DeepSicNet",
    "all_modules",
    "deepsic_forward",
    "deepsic_train_sequential",
    "dynamic_module_set",
    "load_deepsic",
    "module_batch",
    "save_deepsic",
    "stage_estimates",
    "Trellis",
    "ViterbiNet",
    "nn_loglik_table",
    "state_labels",
    "true_loglik_table",
    "viterbi_csi_detect",
    "viterbi_detect",
    "viterbinet_training_batch",
]
