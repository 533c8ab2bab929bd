"""
METARX Predictive Meta-Learning
MAML-style learning of the training initialization theta, where the
support task is block j' and the query task is block j'+1, so the
initialization anticipates the next channel realization.
"""

from __future__ import annotations

from typing import Any, List, Sequence, Tuple

import numpy as np

from neural.optim import finite_diff_hvp, get_optimizer
from training.buffer import LabeledBlock, NoValidPairError, PairBuffer
from training.config import MetaMode, TrainConfig
from training.objective import Objective
from training.online import BatchBuilder


class InsufficientPilotsError(ValueError):
    """Raised when the pilot set has no consecutive block pair."""


def meta_gradient(
    objective: Objective,
    theta: np.ndarray,
    support: Any,
    query: Any,
    support_lr: float,
    mode: MetaMode,
    hvp_step: float = 1e-5,
) -> np.ndarray:
    """
    Gradient of the query loss after one support step.

    first_order: grad_phi L_query(phi)
    exact_hvp:   (I - lr * H_support(theta)) grad_phi L_query(phi)
    """
    _, support_grad = objective.loss_and_grad(theta, support)
    phi = theta - support_lr * support_grad
    _, query_grad = objective.loss_and_grad(phi, query)
    if mode is MetaMode.FIRST_ORDER or support_lr == 0.0 or not np.any(query_grad):
        return query_grad
    step = hvp_step / max(float(np.linalg.norm(query_grad)), 1e-12)
    hvp = finite_diff_hvp(lambda p: objective.loss_and_grad(p, support)[1], theta, query_grad, step)
    return query_grad - support_lr * hvp


def adapt_on_pair(
    theta: np.ndarray,
    pair: Tuple[LabeledBlock, LabeledBlock],
    builder: BatchBuilder,
    objective: Objective,
    cfg: TrainConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """I_meta meta steps on one (support, query) pair with a fresh optimizer."""
    current = np.array(theta, dtype=np.float64, copy=True)
    if cfg.meta_iterations <= 0:
        return current
    support_data = builder(pair[0])
    query_data = builder(pair[1])
    optimizer = get_optimizer(cfg.optimizer, current.size)
    for _ in range(cfg.meta_iterations):
        support = objective.sample(support_data, rng)
        query = objective.sample(query_data, rng)
        grad = meta_gradient(objective, current, support, query, cfg.support_lr, cfg.meta_mode, cfg.hvp_step)
        current = optimizer.step(current, grad, cfg.outer_lr)
    return current


def meta_update_counted(
    theta: np.ndarray,
    buf: PairBuffer,
    builder: BatchBuilder,
    objective: Objective,
    cfg: TrainConfig,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, int]:
    """Meta update plus the number of meta steps actually taken."""
    current = np.array(theta, dtype=np.float64, copy=True)
    steps = 0
    for _ in range(cfg.meta_pair_draws):
        try:
            pair = buf.sample_consecutive_pair(rng)
        except NoValidPairError:
            break
        current = adapt_on_pair(current, pair, builder, objective, cfg, rng)
        steps += cfg.meta_iterations
    return current, steps


def meta_update(
    theta: np.ndarray,
    buf: PairBuffer,
    builder: BatchBuilder,
    objective: Objective,
    cfg: TrainConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Returns theta unchanged when the buffer holds no consecutive pair."""
    return meta_update_counted(theta, buf, builder, objective, cfg, rng)[0]


def pilot_pairs(pilots: Sequence[LabeledBlock]) -> List[Tuple[LabeledBlock, LabeledBlock]]:
    ordered = sorted(pilots, key=lambda block: block.index)
    return [(a, b) for a, b in zip(ordered, ordered[1:]) if b.index == a.index + 1]


def meta_train_initial(
    pilots: Sequence[LabeledBlock],
    builder: BatchBuilder,
    objective: Objective,
    init: np.ndarray,
    cfg: TrainConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Sweep meta steps over every consecutive pilot pair to obtain theta_0."""
    pairs = pilot_pairs(pilots)
    if len(pilots) < 2 or not pairs:
        raise InsufficientPilotsError(f"need two consecutive pilot blocks, got {len(pilots)} blocks")
    theta = np.array(init, dtype=np.float64, copy=True)
    for _ in range(cfg.initial_meta_sweeps):
        for pair in pairs:
            theta = adapt_on_pair(theta, pair, builder, objective, cfg, rng)
    return theta


def initial_meta_steps(pilots: Sequence[LabeledBlock], cfg: TrainConfig) -> int:
    return len(pilot_pairs(pilots)) * cfg.initial_meta_sweeps * cfg.meta_iterations
