"""
METARX Experiment Configuration
Loads YAML (or TOML) experiment files, validates them against the shipped
JSON-Schema and the cross-field rules, and applies CLI overrides.
"""

from __future__ import annotations

import copy
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import yaml
from jsonschema import Draft7Validator

from channel.models import Nonlinearity
from fec.reed_solomon import RsParams
from training.config import TrainConfig

ROOT = Path(__file__).resolve().parents[2]
SCHEMA_PATH = ROOT / "config" / "experiment_schema.yaml"

SISO_SCENARIOS = ("siso_linear", "siso_tanh", "siso_trace", "siso_random")
MIMO_SCENARIOS = ("mimo_linear", "mimo_tanh", "mimo_trace", "mimo_modular")
REGIMES = ("joint", "online", "meta", "modular_meta", "modular_online")
META_REGIMES = ("meta", "modular_meta")
MODULAR_REGIMES = ("modular_meta", "modular_online")


class ConfigError(ValueError):
    """Invalid experiment configuration; `field` is the dotted path of the offending key."""

    def __init__(self, message: str, field: str = ""):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "experiment"
    scenario: str = "siso_linear"
    receiver: str = "viterbinet"
    regime: str = "meta"
    regimes: List[str] = field(default_factory=lambda: ["joint", "online", "meta"])
    seeds: List[int] = field(default_factory=lambda: [1])
    snr_db: float = 12.0
    snr_list: List[float] = field(default_factory=lambda: [12.0])
    pilot_blocks: int = 100
    data_blocks: int = 100
    block_length: int = 136
    pilot_training: str = "streamed"
    code_n: int = 17
    code_k: int = 15
    memory: int = 4
    users: int = 1
    antennas: int = 1
    iterations: int = 5
    hidden_dims: List[int] = field(default_factory=lambda: [100, 50])
    tanh_scale: float = 0.5
    trace_path: Optional[str] = None
    mobile_user: int = 2
    mimo_time_varying: bool = True
    train: TrainConfig = field(default_factory=TrainConfig)
    output_dir: str = "output"

    @property
    def rs_params(self) -> RsParams:
        return RsParams(self.code_n, self.code_k)

    @property
    def is_siso(self) -> bool:
        return self.scenario in SISO_SCENARIOS

    @property
    def nonlinearity(self) -> Nonlinearity:
        return Nonlinearity.TANH if self.scenario.endswith("_tanh") else Nonlinearity.NONE

    @property
    def total_blocks(self) -> int:
        return self.pilot_blocks + self.data_blocks

    def with_overrides(self, **changes: Any) -> "ExperimentConfig":
        return replace(self, **changes)

    def with_train(self, **changes: Any) -> "ExperimentConfig":
        return replace(self, train=replace(self.train, **changes))


_SECTION_FIELDS = {
    "experiment": ("name", "scenario", "receiver", "regime", "regimes", "seeds", "snr_db", "snr_list"),
    "protocol": ("pilot_blocks", "data_blocks", "block_length", "pilot_training"),
    "channel": ("memory", "users", "antennas", "tanh_scale", "trace_path", "mobile_user", "mimo_time_varying"),
    "receiver": ("iterations", "hidden_dims"),
    "output": ("output_dir",),
}


def _load_schema() -> Dict[str, Any]:
    with SCHEMA_PATH.open("r", encoding="utf-8") as handle:
        return yaml.safe_load(handle)


def read_config_file(path: str | Path) -> Dict[str, Any]:
    config_path = Path(path)
    if not config_path.exists():
        raise ConfigError(f"config file not found: {config_path}")
    try:
        if config_path.suffix == ".toml":
            with config_path.open("rb") as handle:
                raw = tomllib.load(handle)
        else:
            with config_path.open("r", encoding="utf-8") as handle:
                raw = yaml.safe_load(handle) or {}
    except (yaml.YAMLError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {config_path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"top level of {config_path} must be a mapping")
    return raw


def apply_override(raw: Dict[str, Any], assignment: str) -> Dict[str, Any]:
    """Apply one `section.key=value` override; the value is parsed as a YAML scalar."""
    if "=" not in assignment:
        raise ConfigError(f"override must look like section.key=value, got {assignment!r}")
    path, text = assignment.split("=", 1)
    keys = [k for k in path.strip().split(".") if k]
    if len(keys) < 2:
        raise ConfigError("override path needs a section and a key", field=path.strip())
    updated = copy.deepcopy(raw)
    node = updated
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigError("override path crosses a non-mapping value", field=path.strip())
    node[keys[-1]] = yaml.safe_load(text)
    return updated


def validate_schema(raw: Dict[str, Any]) -> None:
    validator = Draft7Validator(_load_schema())
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        first = errors[0]
        dotted = ".".join(str(p) for p in first.absolute_path)
        raise ConfigError(first.message, field=dotted)


def _env_float(name: str, field_path: str) -> float:
    value = os.getenv(name, "")
    try:
        return float(value)
    except ValueError as exc:
        raise ConfigError(f"{name} must be a number, got {value!r}", field=field_path) from exc


def config_from_dict(raw: Dict[str, Any]) -> ExperimentConfig:
    validate_schema(raw)
    values: Dict[str, Any] = {}
    for section, names in _SECTION_FIELDS.items():
        block = raw.get(section, {}) or {}
        for name in names:
            if name in block:
                values[name] = block[name]
    code = raw.get("code", {}) or {}
    if "n" in code:
        values["code_n"] = code["n"]
    if "k" in code:
        values["code_k"] = code["k"]
    for name in ("seeds", "regimes", "snr_list", "hidden_dims"):
        if name in values:
            values[name] = list(values[name])
    if "snr_list" not in values and "snr_db" in values:
        values["snr_list"] = [values["snr_db"]]
    if "regimes" not in values and "regime" in values:
        values["regimes"] = [values["regime"]]
    if "output_dir" not in values and os.getenv("METARX_OUTPUT_DIR"):
        values["output_dir"] = os.getenv("METARX_OUTPUT_DIR")
    training = dict(raw.get("training", {}) or {})
    if "gate_threshold" not in training and os.getenv("METARX_GATE_THRESHOLD"):
        training["gate_threshold"] = _env_float("METARX_GATE_THRESHOLD", "training.gate_threshold")
    try:
        values["train"] = TrainConfig.from_dict(training)
    except ValueError as exc:
        raise ConfigError(str(exc), field="training") from exc
    cfg = ExperimentConfig(**values)
    validate_experiment(cfg)
    return cfg


def validate_experiment(cfg: ExperimentConfig) -> None:
    """Cross-field rules the schema cannot express."""
    try:
        params = cfg.rs_params
    except ValueError as exc:
        raise ConfigError(str(exc), field="code") from exc
    if cfg.block_length != params.bits:
        raise ConfigError(f"block length must equal 8*n = {params.bits}", field="protocol.block_length")
    if cfg.receiver in ("viterbinet", "viterbi_csi") and not cfg.is_siso:
        raise ConfigError(f"{cfg.receiver} needs a siso scenario", field="experiment.scenario")
    if cfg.receiver == "deepsic" and cfg.is_siso:
        raise ConfigError("deepsic needs a mimo scenario", field="experiment.scenario")
    if cfg.is_siso and (cfg.users != 1 or cfg.antennas != 1):
        raise ConfigError("siso scenarios use one user and one antenna", field="channel.users")
    for regime in [cfg.regime, *cfg.regimes]:
        if regime not in REGIMES:
            raise ConfigError(f"unknown regime {regime!r}; available: {list(REGIMES)}", field="experiment.regime")
        if regime in MODULAR_REGIMES and cfg.receiver != "deepsic":
            raise ConfigError(f"{regime} needs the deepsic receiver", field="experiment.regime")
    if cfg.scenario.endswith("_trace") and not cfg.trace_path:
        raise ConfigError("trace scenarios need a tap trace", field="channel.trace_path")
    if not cfg.is_siso and not 1 <= cfg.mobile_user <= cfg.users:
        raise ConfigError(f"mobile user must lie in [1, {cfg.users}]", field="channel.mobile_user")
    if cfg.pilot_training == "pooled" and cfg.pilot_blocks < 1:
        raise ConfigError("pooled pilot training needs pilot blocks", field="protocol.pilot_blocks")


def load_config(
    path: str | Path | None = None,
    overrides: Sequence[str] = (),
    base: Optional[Dict[str, Any]] = None,
) -> ExperimentConfig:
    raw = read_config_file(path) if path is not None else copy.deepcopy(base or {})
    for assignment in overrides:
        raw = apply_override(raw, assignment)
    return config_from_dict(raw)
