"""
METARX Bit, Symbol and BPSK Mapping
Bit 0 maps to +1 and bit 1 to -1; symbols are packed MSB first.
"""

from __future__ import annotations

from typing import List, Sequence

import numpy as np


def bits_to_bpsk(bits: Sequence[int] | np.ndarray) -> np.ndarray:
    arr = np.asarray(bits, dtype=np.int64)
    return 1.0 - 2.0 * arr.astype(np.float64)


def bpsk_hard(values: Sequence[float] | np.ndarray) -> np.ndarray:
    """Values >= 0 decide bit 0."""
    arr = np.asarray(values, dtype=np.float64)
    return (arr < 0).astype(np.int64)


def symbols_to_bits(symbols: Sequence[int]) -> np.ndarray:
    sym = np.asarray(symbols, dtype=np.uint8)
    return np.unpackbits(sym).astype(np.int64)


def bits_to_symbols(bits: Sequence[int] | np.ndarray) -> List[int]:
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.size % 8:
        raise ValueError(f"bit block length {arr.size} is not a multiple of 8")
    return [int(v) for v in np.packbits(arr)]
