# METARX Pipeline Module
from .config import ConfigError, ExperimentConfig, load_config
from .orchestrator import TrialPhase, TrialPipeline, TrialResult, run_trial
from .sweep import SweepResult, run_f_sweep, run_sweep

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "TrialPhase",
    "TrialPipeline",
    "TrialResult",
    "run_trial",
    "SweepResult",
    "run_f_sweep",
    "run_sweep",
]
