"""
METARX Optimizers
Plain gradient steps, Adam with bias correction, and a central-difference
Hessian-vector product used by second-order meta-gradients.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from typing import Callable, Tuple

import numpy as np

from neural.mlp import LabeledBatch, MlpSpec, loss_and_grad

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


def sgd_step(params: np.ndarray, grad: np.ndarray, eta: float) -> np.ndarray:
    if params.shape != grad.shape:
        raise ValueError(f"gradient shape {grad.shape} != parameter shape {params.shape}")
    return params - eta * grad


@dataclass(frozen=True)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    eps: float = ADAM_EPS

    @classmethod
    def fresh(cls, size: int) -> "AdamState":
        return cls(np.zeros(size), np.zeros(size))


def adam_step(
    params: np.ndarray,
    grad: np.ndarray,
    state: AdamState,
    eta: float,
) -> Tuple[np.ndarray, AdamState]:
    if not params.shape == grad.shape == state.m.shape:
        raise ValueError("Adam state, gradient and parameters must share a shape")
    step = state.step + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = m / (1.0 - state.beta1**step)
    v_hat = v / (1.0 - state.beta2**step)
    new_params = params - eta * m_hat / (np.sqrt(v_hat) + state.eps)
    return new_params, replace(state, m=m, v=v, step=step)


class Optimizer(ABC):
    """Stateful optimizer over one flat parameter vector."""

    @abstractmethod
    def step(self, params: np.ndarray, grad: np.ndarray, eta: float) -> np.ndarray:
        """Return the updated parameters."""
        pass


class SgdOptimizer(Optimizer):
    def step(self, params: np.ndarray, grad: np.ndarray, eta: float) -> np.ndarray:
        return sgd_step(params, grad, eta)


class AdamOptimizer(Optimizer):
    def __init__(self, size: int):
        self.state = AdamState.fresh(size)

    def step(self, params: np.ndarray, grad: np.ndarray, eta: float) -> np.ndarray:
        new_params, self.state = adam_step(params, grad, self.state, eta)
        return new_params


def get_optimizer(name: str, size: int) -> Optimizer:
    """Factory for the configured optimizer kind."""
    optimizers = {
        "adam": lambda: AdamOptimizer(size),
        "sgd": SgdOptimizer,
    }
    if name not in optimizers:
        raise ValueError(f"Unknown optimizer: {name}. Available: {list(optimizers.keys())}")
    return optimizers[name]()


def finite_diff_hvp(
    grad_fn: Callable[[np.ndarray], np.ndarray],
    params: np.ndarray,
    v: np.ndarray,
    step: float,
) -> np.ndarray:
    """(g(p + step v) - g(p - step v)) / (2 step)."""
    if not np.any(v):
        raise ValueError("HVP direction must be non-zero")
    return (grad_fn(params + step * v) - grad_fn(params - step * v)) / (2.0 * step)


def hvp_finite_diff(
    spec: MlpSpec,
    params: np.ndarray,
    batch: LabeledBatch,
    v: np.ndarray,
    step: float = 1e-5,
) -> np.ndarray:
    return finite_diff_hvp(lambda p: loss_and_grad(spec, p, batch)[1], params, v, step)
