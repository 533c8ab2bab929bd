"""
METARX Receiver Adapters
Couple a receiver with its training regime: detection, pilot-phase
training and the per-block adaptation step of the streaming protocol.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from neural.checkpoint import save_params
from neural.mlp import mlp_init
from pipeline.config import META_REGIMES, MODULAR_REGIMES, ExperimentConfig
from pipeline.scenario import BlockChannel
from receivers.deepsic import (
    DeepSicNet,
    all_modules,
    deepsic_forward,
    deepsic_train_sequential,
    dynamic_module_set,
    save_deepsic,
)
from receivers.viterbinet import ViterbiNet, viterbi_csi_detect
from training.buffer import LabeledBlock, PairBuffer
from training.config import ThetaPolicy
from training.meta import initial_meta_steps, meta_train_initial, meta_update_counted
from training.modular import (
    modular_meta_update_counted,
    modular_online_train,
    module_builder,
    module_trainer,
)
from training.objective import MlpObjective
from training.online import joint_train, online_train


@dataclass
class AdaptationStats:
    meta_events: List[int] = field(default_factory=list)
    initial_steps: int = 0


class ReceiverAdapter(ABC):
    """A receiver plus the regime that trains it."""

    def __init__(self, cfg: ExperimentConfig, regime: str):
        self.cfg = cfg
        self.regime = regime
        self.buffer = PairBuffer(cfg.train.buffer_size)
        self.stats = AdaptationStats()

    @property
    def is_meta(self) -> bool:
        return self.regime in META_REGIMES

    @property
    def trains_online(self) -> bool:
        return self.regime != "joint"

    def meta_due(self, j: int) -> bool:
        return self.is_meta and j % self.cfg.train.meta_frequency == 0

    @abstractmethod
    def detect(self, observations: np.ndarray, channel: BlockChannel) -> np.ndarray:
        """K x B hard symbol decisions."""
        pass

    def observe(self, block: LabeledBlock) -> None:
        self.buffer.push(block.index, block.symbols, block.observations)

    @abstractmethod
    def initial_training(self, pilots: Sequence[LabeledBlock], rng: np.random.Generator, pooled: bool) -> int:
        """Train on the pilot set after the pilot phase; returns gradient steps."""
        pass

    @abstractmethod
    def adapt(self, j: int, block: Optional[LabeledBlock], rng: np.random.Generator) -> int:
        """One block of the streaming protocol; `block` is None when the gate rejected it."""
        pass

    def save_checkpoint(self, path: Path) -> Optional[Path]:
        """Write the current receiver parameters; receivers without parameters write nothing."""
        return None


class ViterbiNetAdapter(ReceiverAdapter):
    def __init__(self, cfg: ExperimentConfig, regime: str, init_rng: np.random.Generator):
        super().__init__(cfg, regime)
        self.model = ViterbiNet(cfg.memory, tuple(cfg.hidden_dims))
        self.objective = MlpObjective(self.model.spec, cfg.train.batch_size)
        self.phi = mlp_init(self.model.spec, init_rng)
        self.theta = self.phi.copy()

    def _build(self, block: LabeledBlock):
        return self.model.training_batch(block.symbols, block.observations)

    def save_checkpoint(self, path: Path) -> Optional[Path]:
        return save_params(path, self.model.spec, self.phi)

    def detect(self, observations: np.ndarray, channel: BlockChannel) -> np.ndarray:
        return self.model.detect(self.phi, observations)

    def initial_training(self, pilots: Sequence[LabeledBlock], rng: np.random.Generator, pooled: bool) -> int:
        cfg = self.cfg.train
        if not pilots or not (pooled or self.regime == "joint"):
            return 0
        init = self.phi.copy()
        self.phi = joint_train(pilots, self._build, self.objective, init, cfg, rng)
        steps = cfg.joint_iterations
        if self.is_meta and len(pilots) >= 2:
            self.theta = meta_train_initial(pilots, self._build, self.objective, init, cfg, rng)
            steps += initial_meta_steps(pilots, cfg)
        else:
            self.theta = self.phi.copy()
        self.stats.initial_steps = steps
        return steps

    def adapt(self, j: int, block: Optional[LabeledBlock], rng: np.random.Generator) -> int:
        cfg = self.cfg.train
        if block is not None:
            self.observe(block)
        steps = 0
        if self.meta_due(j):
            self.theta, used = meta_update_counted(self.theta, self.buffer, self._build, self.objective, cfg, rng)
            if used:
                self.stats.meta_events.append(j)
            steps += used
        if block is not None and self.trains_online:
            start = self.theta if self.is_meta else self.phi
            self.phi = online_train(start, block, self._build, self.objective, cfg, rng)
            steps += cfg.sgd_iterations
        if self.is_meta and cfg.theta_policy is ThetaPolicy.TRACK:
            self.theta = self.phi.copy()
        return steps


class ViterbiCsiAdapter(ReceiverAdapter):
    """Perfect-CSI Viterbi baseline; it never trains."""

    def __init__(self, cfg: ExperimentConfig, regime: str, sigma: float):
        super().__init__(cfg, regime)
        self.sigma = sigma

    @property
    def trains_online(self) -> bool:
        return False

    def meta_due(self, j: int) -> bool:
        return False

    def detect(self, observations: np.ndarray, channel: BlockChannel) -> np.ndarray:
        return viterbi_csi_detect(channel.taps, self.sigma, observations, self.cfg.memory)

    def initial_training(self, pilots: Sequence[LabeledBlock], rng: np.random.Generator, pooled: bool) -> int:
        return 0

    def adapt(self, j: int, block: Optional[LabeledBlock], rng: np.random.Generator) -> int:
        return 0


class DeepSicAdapter(ReceiverAdapter):
    def __init__(self, cfg: ExperimentConfig, regime: str, init_rng: np.random.Generator):
        super().__init__(cfg, regime)
        self.net = DeepSicNet.initialize(cfg.users, cfg.iterations, cfg.antennas, init_rng, tuple(cfg.hidden_dims))
        self.theta = self.net.params_map()
        if regime in MODULAR_REGIMES:
            self.dynamic = dynamic_module_set(cfg.mobile_user, cfg.users, cfg.iterations)
        else:
            self.dynamic = all_modules(cfg.users, cfg.iterations)

    def _trained_modules(self, j: int):
        """Every module trains during pilots; only the dynamic set adapts on data blocks."""
        if j < self.cfg.pilot_blocks:
            return all_modules(self.cfg.users, self.cfg.iterations)
        return self.dynamic

    def detect(self, observations: np.ndarray, channel: BlockChannel) -> np.ndarray:
        return deepsic_forward(self.net, observations)[1]

    def save_checkpoint(self, path: Path) -> Optional[Path]:
        return save_deepsic(path, self.net)

    def initial_training(self, pilots: Sequence[LabeledBlock], rng: np.random.Generator, pooled: bool) -> int:
        cfg = self.cfg.train
        if not pilots or not (pooled or self.regime == "joint"):
            return 0
        ordered = sorted(pilots, key=lambda block: block.index)
        symbols = np.concatenate([np.atleast_2d(b.symbols) for b in ordered], axis=1)
        observations = np.concatenate([np.atleast_2d(b.observations) for b in ordered], axis=1)
        init = self.net.params_map()
        self.net = deepsic_train_sequential(
            self.net, symbols, observations, module_trainer(self.net, cfg, cfg.joint_iterations), rng
        )
        steps = cfg.joint_iterations
        self.theta = self.net.params_map()
        if self.is_meta and len(pilots) >= 2:
            objective = MlpObjective(self.net.spec, cfg.batch_size)
            for module in sorted(self.dynamic):
                self.theta[module] = meta_train_initial(
                    pilots, module_builder(self.net, module), objective, init[module], cfg, rng
                )
            steps += initial_meta_steps(pilots, cfg)
        self.stats.initial_steps = steps
        return steps

    def adapt(self, j: int, block: Optional[LabeledBlock], rng: np.random.Generator) -> int:
        cfg = self.cfg.train
        if block is not None:
            self.observe(block)
        steps = 0
        if self.meta_due(j):
            self.theta, used = modular_meta_update_counted(
                self.theta, self.buffer, self.net, self._trained_modules(j), cfg, rng
            )
            if used:
                self.stats.meta_events.append(j)
            steps += used
        if block is not None and self.trains_online:
            start = self.theta if self.is_meta else self.net.params_map()
            self.net = modular_online_train(self.net, start, block, self._trained_modules(j), cfg, rng)
            steps += cfg.sgd_iterations
        if self.is_meta and cfg.theta_policy is ThetaPolicy.TRACK:
            self.theta = self.net.params_map()
        return steps


def get_adapter(cfg: ExperimentConfig, regime: str, init_rng: np.random.Generator, sigma: float) -> ReceiverAdapter:
    """Factory for the configured receiver."""
    adapters = {
        "viterbinet": lambda: ViterbiNetAdapter(cfg, regime, init_rng),
        "viterbi_csi": lambda: ViterbiCsiAdapter(cfg, regime, sigma),
        "deepsic": lambda: DeepSicAdapter(cfg, regime, init_rng),
    }
    if cfg.receiver not in adapters:
        raise ValueError(f"Unknown receiver: {cfg.receiver}. Available: {list(adapters.keys())}")
    return adapters[cfg.receiver]()
