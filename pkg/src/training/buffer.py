"""
METARX Pair Buffer
FIFO store of labeled blocks with consecutive-pair sampling for predictive meta-learning.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Deque, List, Tuple

import numpy as np


class NonMonotonicIndexError(ValueError):
    """Raised when a pushed block index does not exceed the newest stored one."""


class NoValidPairError(LookupError):
    """Raised when no stored block has its predecessor stored as well."""


@dataclass(frozen=True)
class LabeledBlock:
    index: int
    symbols: np.ndarray
    observations: np.ndarray


class PairBuffer:
    def __init__(self, capacity: int = 20):
        if capacity < 1:
            raise ValueError(f"buffer capacity must be positive, got {capacity}")
        self.capacity = capacity
        self._entries: Deque[LabeledBlock] = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    @property
    def indices(self) -> List[int]:
        return [entry.index for entry in self._entries]

    def push(self, index: int, symbols: np.ndarray, observations: np.ndarray) -> "PairBuffer":
        if self._entries and index <= self._entries[-1].index:
            raise NonMonotonicIndexError(
                f"block {index} is not newer than stored block {self._entries[-1].index}"
            )
        self._entries.append(LabeledBlock(int(index), np.array(symbols, copy=True), np.array(observations, copy=True)))
        return self

    def consecutive_pairs(self) -> List[Tuple[LabeledBlock, LabeledBlock]]:
        by_index = {entry.index: entry for entry in self._entries}
        return [(by_index[e.index - 1], e) for e in self._entries if e.index - 1 in by_index]

    def sample_consecutive_pair(self, rng: np.random.Generator) -> Tuple[LabeledBlock, LabeledBlock]:
        """Uniform over stored blocks whose predecessor is stored; consumes no randomness on failure."""
        pairs = self.consecutive_pairs()
        if not pairs:
            raise NoValidPairError(f"no consecutive indices among {self.indices}")
        return pairs[int(rng.integers(len(pairs)))]


def buffer_push(buf: PairBuffer, j: int, s: np.ndarray, y: np.ndarray) -> PairBuffer:
    return buf.push(j, s, y)


def sample_consecutive_pair(buf: PairBuffer, rng: np.random.Generator) -> Tuple[LabeledBlock, LabeledBlock]:
    return buf.sample_consecutive_pair(rng)
