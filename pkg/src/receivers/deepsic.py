"""
METARX DeepSIC Receiver
Learned soft interference cancellation: K users x Q iterations of small
classifiers. Module (k, q) sees the observation column and the iteration
q-1 probabilities of the other users and outputs P(s_k = +1).

Module ids are 1-based (user, iteration) pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Set, Tuple

import numpy as np

from channel.models import DimensionMismatchError
from neural.mlp import LabeledBatch, MlpSpec, classifier_spec, forward_batch, mlp_init

ModuleId = Tuple[int, int]
# (initial params, module batch, rng) -> trained params
ModuleTrainer = Callable[[np.ndarray, LabeledBatch, np.random.Generator], np.ndarray]


@dataclass
class DeepSicNet:
    K: int
    Q: int
    N: int
    hidden: Tuple[int, ...] = (100, 50)
    modules: Dict[ModuleId, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.K < 1 or self.Q < 1 or self.N < 1:
            raise ValueError(f"DeepSIC needs positive K, Q, N, got {self.K}, {self.Q}, {self.N}")

    @property
    def spec(self) -> MlpSpec:
        return classifier_spec(self.N + self.K - 1, 2, self.hidden)

    def module_ids(self) -> List[ModuleId]:
        return [(k, q) for q in range(1, self.Q + 1) for k in range(1, self.K + 1)]

    def copy(self) -> "DeepSicNet":
        return DeepSicNet(self.K, self.Q, self.N, self.hidden, {m: p.copy() for m, p in self.modules.items()})

    def params_map(self) -> Dict[ModuleId, np.ndarray]:
        return {m: p.copy() for m, p in self.modules.items()}

    @classmethod
    def initialize(
        cls,
        K: int,
        Q: int,
        N: int,
        rng: np.random.Generator,
        hidden: Tuple[int, ...] = (100, 50),
        scheme: str = "glorot",
    ) -> "DeepSicNet":
        net = cls(K, Q, N, tuple(hidden))
        for module in net.module_ids():
            net.modules[module] = mlp_init(net.spec, rng, scheme)
        return net


def _module_inputs(k: int, Y: np.ndarray, prev: np.ndarray) -> np.ndarray:
    others = [u for u in range(prev.shape[0]) if u != k - 1]
    return np.concatenate([Y.T, prev[others].T], axis=1)


def module_probability(net: DeepSicNet, module: ModuleId, Y: np.ndarray, prev: np.ndarray) -> np.ndarray:
    probs = forward_batch(net.spec, net.modules[module], _module_inputs(module[0], Y, prev))
    return probs[:, 0]


def _check_observations(net: DeepSicNet, Y: np.ndarray) -> np.ndarray:
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    if Y.shape[0] != net.N:
        raise DimensionMismatchError(f"observation block has {Y.shape[0]} antennas, net expects {net.N}")
    if not np.all(np.isfinite(Y)):
        raise ValueError("observation block has non-finite entries")
    return Y


def deepsic_forward(net: DeepSicNet, Y: np.ndarray) -> Tuple[List[np.ndarray], np.ndarray]:
    """
    Returns the K x B estimates of every iteration (index 0 is the uniform
    start) and the K x B hard decision of the last iteration, ties to +1.
    """
    Y = _check_observations(net, Y)
    estimates = [np.full((net.K, Y.shape[1]), 0.5)]
    for q in range(1, net.Q + 1):
        prev = estimates[-1]
        estimates.append(np.vstack([module_probability(net, (k, q), Y, prev) for k in range(1, net.K + 1)]))
    hard = np.where(estimates[-1] >= 0.5, 1.0, -1.0)
    return estimates, hard


def module_batch(k: int, q: int, Y: np.ndarray, prev_estimates: np.ndarray, labels: np.ndarray) -> LabeledBatch:
    """Examples for module (k, q); class 0 is +1 and class 1 is -1."""
    del q  # the estimates already belong to iteration q - 1
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    prev = np.atleast_2d(np.asarray(prev_estimates, dtype=np.float64))
    symbols = np.asarray(labels, dtype=np.float64).reshape(-1)
    return LabeledBatch(_module_inputs(k, Y, prev), (symbols < 0).astype(np.int64))


def dynamic_module_set(k_prime: int, K: int, Q: int) -> Set[ModuleId]:
    if not 1 <= k_prime <= K:
        raise IndexError(f"mobile user {k_prime} outside [1, {K}]")
    return {(k_prime, q) for q in range(1, Q + 1)}


def all_modules(K: int, Q: int) -> Set[ModuleId]:
    return {(k, q) for k in range(1, K + 1) for q in range(1, Q + 1)}


def deepsic_train_sequential(
    net: DeepSicNet,
    s: np.ndarray,
    Y: np.ndarray,
    trainer: ModuleTrainer,
    rng: np.random.Generator,
    init: Optional[Dict[ModuleId, np.ndarray]] = None,
    modules: Optional[Iterable[ModuleId]] = None,
) -> DeepSicNet:
    """
    Train iteration by iteration: every selected module of iteration q is
    trained on estimates produced by the already-trained iteration q-1.
    Unselected modules keep their current parameters.
    """
    Y = _check_observations(net, Y)
    symbols = np.atleast_2d(np.asarray(s, dtype=np.float64))
    if symbols.shape != (net.K, Y.shape[1]):
        raise DimensionMismatchError(f"symbol block shape {symbols.shape} != {(net.K, Y.shape[1])}")
    selected = set(net.module_ids()) if modules is None else set(modules)
    trained = net.copy()
    prev = np.full((net.K, Y.shape[1]), 0.5)
    for q in range(1, net.Q + 1):
        for k in range(1, net.K + 1):
            if (k, q) not in selected:
                continue
            start = init[(k, q)] if init is not None else trained.modules[(k, q)]
            batch = module_batch(k, q, Y, prev, symbols[k - 1])
            trained.modules[(k, q)] = trainer(start.copy(), batch, rng)
        prev = np.vstack([module_probability(trained, (k, q), Y, prev) for k in range(1, net.K + 1)])
    return trained


def stage_estimates(net: DeepSicNet, Y: np.ndarray, q: int) -> np.ndarray:
    """Estimates of iteration q (0 is the uniform start)."""
    Y = _check_observations(net, Y)
    prev = np.full((net.K, Y.shape[1]), 0.5)
    for stage in range(1, q + 1):
        prev = np.vstack([module_probability(net, (k, stage), Y, prev) for k in range(1, net.K + 1)])
    return prev


def save_deepsic(path: str | Path, net: DeepSicNet) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    arrays = {f"module_{k}_{q}": net.modules[(k, q)] for k, q in net.module_ids()}
    with target.open("wb") as handle:
        np.savez(
            handle,
            header=np.asarray([net.K, net.Q, net.N], dtype=np.int64),
            hidden=np.asarray(net.hidden, dtype=np.int64),
            **arrays,
        )
    return target


def load_deepsic(path: str | Path) -> DeepSicNet:
    with np.load(Path(path)) as archive:
        K, Q, N = (int(v) for v in archive["header"])
        net = DeepSicNet(K, Q, N, tuple(int(h) for h in archive["hidden"]))
        for k, q in net.module_ids():
            net.modules[(k, q)] = archive[f"module_{k}_{q}"].astype(np.float64)
    return net
