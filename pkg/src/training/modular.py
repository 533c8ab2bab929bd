"""
METARX Modular Meta-Learning
Meta-learn and fine-tune only the dynamic DeepSIC modules; static modules
copy their current parameters into theta and are never trained.
"""

from __future__ import annotations

from typing import Dict, Iterable, Tuple

import numpy as np

from neural.mlp import LabeledBatch
from receivers.deepsic import DeepSicNet, ModuleId, deepsic_train_sequential, module_batch, stage_estimates
from training.buffer import LabeledBlock, PairBuffer
from training.config import TrainConfig
from training.meta import meta_update_counted
from training.objective import MlpObjective
from training.online import run_optimizer

ThetaMap = Dict[ModuleId, np.ndarray]


def module_builder(net: DeepSicNet, module: ModuleId):
    """Examples of one module, with interference estimates from the current net."""
    k, q = module

    def build(block: LabeledBlock) -> LabeledBatch:
        prev = stage_estimates(net, block.observations, q - 1)
        symbols = np.atleast_2d(block.symbols)
        return module_batch(k, q, block.observations, prev, symbols[k - 1])

    return build


def module_trainer(net: DeepSicNet, cfg: TrainConfig, iterations: int):
    objective = MlpObjective(net.spec, cfg.batch_size)

    def train(start: np.ndarray, batch: LabeledBatch, rng: np.random.Generator) -> np.ndarray:
        return run_optimizer(start, batch, objective, iterations, cfg, rng)

    return train


def modular_meta_update_counted(
    theta_map: ThetaMap,
    buf: PairBuffer,
    net: DeepSicNet,
    dynamic: Iterable[ModuleId],
    cfg: TrainConfig,
    rng: np.random.Generator,
) -> Tuple[ThetaMap, int]:
    dynamic = set(dynamic)
    objective = MlpObjective(net.spec, cfg.batch_size)
    updated: ThetaMap = {}
    steps = 0
    for module in net.module_ids():
        if module in dynamic:
            updated[module], used = meta_update_counted(
                theta_map[module], buf, module_builder(net, module), objective, cfg, rng
            )
            steps = max(steps, used)
        else:
            updated[module] = net.modules[module].copy()
    return updated, steps


def modular_meta_update(
    theta_map: ThetaMap,
    buf: PairBuffer,
    net: DeepSicNet,
    dynamic: Iterable[ModuleId],
    cfg: TrainConfig,
    rng: np.random.Generator,
) -> ThetaMap:
    return modular_meta_update_counted(theta_map, buf, net, dynamic, cfg, rng)[0]


def modular_online_train(
    net: DeepSicNet,
    theta_map: ThetaMap,
    block: LabeledBlock,
    dynamic: Iterable[ModuleId],
    cfg: TrainConfig,
    rng: np.random.Generator,
) -> DeepSicNet:
    """Dynamic modules restart from theta and follow the sequential schedule."""
    dynamic = set(dynamic)
    if not dynamic:
        return net.copy()
    return deepsic_train_sequential(
        net,
        block.symbols,
        block.observations,
        module_trainer(net, cfg, cfg.sgd_iterations),
        rng,
        init=theta_map,
        modules=dynamic,
    )
