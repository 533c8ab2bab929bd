"""
METARX Training Objectives
The loss a training loop minimizes, separated from how its examples are built.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any, Tuple

import numpy as np

from neural.mlp import LabeledBatch, MlpSpec, loss_and_grad


class Objective(ABC):
    """Mini-batch sampling plus loss/gradient over a flat parameter vector."""

    @abstractmethod
    def sample(self, data: Any, rng: np.random.Generator) -> Any:
        """Draw one mini-batch from the examples of a block."""
        pass

    @abstractmethod
    def loss_and_grad(self, params: np.ndarray, batch: Any) -> Tuple[float, np.ndarray]:
        """Loss of a mini-batch and its gradient."""
        pass


class MlpObjective(Objective):
    """Mean cross-entropy of a classifier over uniformly drawn mini-batches."""

    def __init__(self, spec: MlpSpec, batch_size: int = 64):
        self.spec = spec
        self.batch_size = batch_size

    def sample(self, data: LabeledBatch, rng: np.random.Generator) -> LabeledBatch:
        size = len(data)
        if size <= self.batch_size:
            return data
        return data.subset(rng.choice(size, size=self.batch_size, replace=False))

    def loss_and_grad(self, params: np.ndarray, batch: LabeledBatch) -> Tuple[float, np.ndarray]:
        return loss_and_grad(self.spec, params, batch)


class QuadraticObjective(Objective):
    """
    L(p) = 1/2 ||p - c||^2 where the block data is the center c.
    Its Hessian is the identity, which makes meta-gradients computable by hand.
    """

    def sample(self, data: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return np.asarray(data, dtype=np.float64)

    def loss_and_grad(self, params: np.ndarray, batch: np.ndarray) -> Tuple[float, np.ndarray]:
        diff = np.asarray(params, dtype=np.float64) - batch
        return 0.5 * float(diff @ diff), diff
