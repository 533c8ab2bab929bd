"""
METARX ViterbiNet Receiver
Viterbi sequence detection over a 2^L-state trellis whose branch metrics
are either learned log-posteriors log p(state | y_i) or, for the
perfect-CSI baseline, Gaussian log-likelihoods.

State encoding: digit l of the state (bit l) is the symbol l steps back,
0 for +1 and 1 for -1, so the newest symbol is the least significant
digit. Symbols before the block start take digit 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from neural.mlp import LabeledBatch, MlpSpec, classifier_spec, forward_log_batch


@dataclass(frozen=True)
class Trellis:
    memory: int
    num_states: int = field(init=False)

    def __post_init__(self) -> None:
        if self.memory < 1:
            raise ValueError(f"trellis memory must be >= 1, got {self.memory}")
        object.__setattr__(self, "num_states", 2**self.memory)

    @property
    def mask(self) -> int:
        return self.num_states - 1

    def next_state(self, state: int, symbol: float) -> int:
        digit = 0 if symbol >= 0 else 1
        return ((state << 1) | digit) & self.mask

    def predecessors(self) -> tuple[np.ndarray, np.ndarray]:
        """The two predecessors of every state, differing in their oldest digit."""
        states = np.arange(self.num_states)
        low = states >> 1
        return low, low | (1 << (self.memory - 1))

    def state_symbols(self) -> np.ndarray:
        """S x L matrix; entry [state, l] is the symbol l steps back."""
        states = np.arange(self.num_states)[:, None]
        digits = (states >> np.arange(self.memory)[None, :]) & 1
        return 1.0 - 2.0 * digits

    def encode(self, history: Sequence[float]) -> int:
        """State of a history listed newest first."""
        if len(history) != self.memory:
            raise ValueError(f"history must have {self.memory} symbols")
        return int(sum((1 << l) for l, sym in enumerate(history) if sym < 0))

    def decode(self, state: int) -> np.ndarray:
        return self.state_symbols()[state]


def viterbi_detect(table: np.ndarray, trellis: Trellis) -> np.ndarray:
    """
    Maximum-metric symbol sequence starting from the zero-history state.

    Accepts a B x S table (returns 1 x B) or an M x B x S stack of
    independent blocks (returns M x B). Equal metrics resolve to the
    lexicographically smallest sequence with +1 ordered before -1; every
    survivor carries its lexicographic rank so the rule holds globally.
    """
    table = np.asarray(table, dtype=np.float64)
    single = table.ndim == 2
    stack = table[None] if single else table
    m, b, s = stack.shape
    if s != trellis.num_states:
        raise ValueError(f"table has {s} states, trellis has {trellis.num_states}")
    if not np.all(np.isfinite(stack)):
        raise ValueError("log-likelihood table must be finite")

    p0, p1 = trellis.predecessors()
    digit = np.arange(s) & 1
    metric = np.full((m, s), -np.inf)
    metric[:, 0] = 0.0
    rank = np.tile(np.arange(s), (m, 1))
    back = np.empty((b, m, s), dtype=np.int64)

    for i in range(b):
        c0, c1 = metric[:, p0], metric[:, p1]
        r0, r1 = rank[:, p0], rank[:, p1]
        take1 = (c1 > c0) | ((c1 == c0) & (r1 < r0))
        pred = np.where(take1, p1[None, :], p0[None, :])
        metric = np.where(take1, c1, c0) + stack[:, i, :]
        key = np.take_along_axis(rank, pred, axis=1) * 2 + digit[None, :]
        rank = np.argsort(np.argsort(key, axis=1), axis=1)
        back[i] = pred

    best = metric.max(axis=1, keepdims=True)
    final = np.where(metric == best, rank, np.iinfo(np.int64).max).argmin(axis=1)

    states = np.empty((m, b), dtype=np.int64)
    rows = np.arange(m)
    current = final
    for i in range(b - 1, -1, -1):
        states[:, i] = current
        current = back[i, rows, current]

    symbols = 1.0 - 2.0 * (states & 1)
    return symbols if not single else symbols.reshape(1, b)


def nn_loglik_table(spec: MlpSpec, params: np.ndarray, y: np.ndarray) -> np.ndarray:
    """table[i, state] = log p(state | y_i) from the classifier."""
    samples = np.asarray(y, dtype=np.float64).reshape(-1, 1)
    return forward_log_batch(spec, params, samples)


def true_loglik_table(taps: np.ndarray, sigma: float, y: np.ndarray, memory: int | None = None) -> np.ndarray:
    """
    Gaussian metric -(y_i - sum_l h_l s_{state,l})^2 / (2 sigma^2); lags
    reaching before the block start contribute nothing (zero guard).
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    h = np.asarray(taps, dtype=np.float64).reshape(-1)
    memory = h.size if memory is None else memory
    if h.size > memory:
        raise ValueError(f"{h.size} taps do not fit a memory-{memory} trellis")
    h = np.pad(h, (0, memory - h.size))
    obs = np.asarray(y, dtype=np.float64).reshape(-1)
    trellis = Trellis(memory)
    inside = np.arange(memory)[None, :] <= np.arange(obs.size)[:, None]
    means = (inside * h[None, :]) @ trellis.state_symbols().T
    return -((obs[:, None] - means) ** 2) / (2.0 * sigma**2)


def state_labels(s: np.ndarray, memory: int) -> np.ndarray:
    """State index of (s_{i-L+1}, ..., s_i) at every time, zero history before the block."""
    digits = (np.asarray(s, dtype=np.float64).reshape(-1) < 0).astype(np.int64)
    labels = np.zeros(digits.size, dtype=np.int64)
    for lag in range(memory):
        shifted = np.zeros_like(digits)
        shifted[lag:] = digits[: digits.size - lag]
        labels |= shifted << lag
    return labels


def viterbinet_training_batch(s: np.ndarray, y: np.ndarray, memory: int) -> LabeledBatch:
    symbols = np.asarray(s, dtype=np.float64).reshape(-1)
    obs = np.asarray(y, dtype=np.float64).reshape(-1)
    if symbols.size != obs.size:
        raise ValueError(f"symbol and observation lengths differ: {symbols.size} / {obs.size}")
    return LabeledBatch(obs[:, None], state_labels(symbols, memory))


@dataclass(frozen=True)
class ViterbiNet:
    """Learned-metric Viterbi detector with a 1 -> hidden -> 2^L classifier."""

    memory: int
    hidden: tuple[int, ...] = (100, 50)

    @property
    def trellis(self) -> Trellis:
        return Trellis(self.memory)

    @property
    def spec(self) -> MlpSpec:
        return classifier_spec(1, 2**self.memory, self.hidden)

    def detect(self, params: np.ndarray, y: np.ndarray) -> np.ndarray:
        return viterbi_detect(nn_loglik_table(self.spec, params, y), self.trellis)

    def training_batch(self, s: np.ndarray, y: np.ndarray) -> LabeledBatch:
        return viterbinet_training_batch(s, y, self.memory)


def viterbi_csi_detect(taps: np.ndarray, sigma: float, y: np.ndarray, memory: int | None = None) -> np.ndarray:
    """Perfect-CSI baseline."""
    table = true_loglik_table(taps, sigma, y, memory)
    return viterbi_detect(table, Trellis(table.shape[1].bit_length() - 1))
