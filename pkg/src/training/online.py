"""
METARX Online and Joint Training
Gradient-based fitting of receiver parameters on one labeled block
(online) or on the pooled pilot set (joint).
"""

from __future__ import annotations

from typing import Any, Callable, List, Optional, Sequence

import numpy as np

from neural.mlp import LabeledBatch
from neural.optim import get_optimizer
from training.buffer import LabeledBlock
from training.config import TrainConfig
from training.objective import Objective

BatchBuilder = Callable[[LabeledBlock], Any]


def run_optimizer(
    params: np.ndarray,
    data: Any,
    objective: Objective,
    iterations: int,
    cfg: TrainConfig,
    rng: np.random.Generator,
    history: Optional[List[float]] = None,
) -> np.ndarray:
    """`iterations` optimizer steps with a fresh optimizer state."""
    current = np.array(params, dtype=np.float64, copy=True)
    if iterations <= 0:
        return current
    optimizer = get_optimizer(cfg.optimizer, current.size)
    for _ in range(iterations):
        loss, grad = objective.loss_and_grad(current, objective.sample(data, rng))
        current = optimizer.step(current, grad, cfg.eta)
        if history is not None:
            history.append(loss)
    return current


def online_train(
    theta_init: np.ndarray,
    block: LabeledBlock,
    builder: BatchBuilder,
    objective: Objective,
    cfg: TrainConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Self-supervised fine-tuning on one gate-validated (or pilot) block."""
    return run_optimizer(theta_init, builder(block), objective, cfg.sgd_iterations, cfg, rng)


def pool_blocks(blocks: Sequence[LabeledBlock], builder: BatchBuilder) -> LabeledBatch:
    """Pooled examples in block-index order, independent of the order given."""
    ordered = sorted(blocks, key=lambda block: block.index)
    return LabeledBatch.concat([builder(block) for block in ordered])


def joint_train(
    pilots: Sequence[LabeledBlock],
    builder: BatchBuilder,
    objective: Objective,
    init: np.ndarray,
    cfg: TrainConfig,
    rng: np.random.Generator,
    history: Optional[List[float]] = None,
) -> np.ndarray:
    """Adam on the union of all pilot examples; never revisited at test time."""
    if not pilots:
        raise ValueError("joint training needs at least one pilot block")
    pooled = pool_blocks(pilots, builder)
    return run_optimizer(init, pooled, objective, cfg.joint_iterations, cfg, rng, history)


def epoch_losses(history: Sequence[float], examples: int, batch_size: int) -> List[float]:
    """Mean step loss per pass over `examples` pooled examples."""
    steps = max(1, examples // max(1, batch_size))
    return [float(np.mean(history[i : i + steps])) for i in range(0, len(history), steps)]
