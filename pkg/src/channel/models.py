"""
METARX Channel Models
Finite-memory SISO ISI channel and flat MIMO channel with real AWGN and an
optional tanh acquisition nonlinearity applied after noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

DEFAULT_TANH_SCALE = 0.5


class DimensionMismatchError(ValueError):
    """Raised when block, tap or matrix shapes disagree."""


class Nonlinearity(Enum):
    NONE = "none"
    TANH = "tanh"


def snr_to_sigma(snr_db: float) -> float:
    """SNR = 1 / sigma^2."""
    return float(10.0 ** (-snr_db / 20.0))


@dataclass(frozen=True)
class ChannelConfig:
    sigma: float
    nonlinearity: Nonlinearity = Nonlinearity.NONE
    tanh_scale: float = DEFAULT_TANH_SCALE

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ValueError(f"noise std must be positive, got {self.sigma}")

    @classmethod
    def from_snr(
        cls,
        snr_db: float,
        nonlinearity: Nonlinearity = Nonlinearity.NONE,
        tanh_scale: float = DEFAULT_TANH_SCALE,
    ) -> "ChannelConfig":
        return cls(snr_to_sigma(snr_db), nonlinearity, tanh_scale)

    @property
    def snr_db(self) -> float:
        return float(-20.0 * np.log10(self.sigma))

    def apply_output(self, noiseless: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        y = noiseless + rng.normal(0.0, self.sigma, size=noiseless.shape)
        if self.nonlinearity is Nonlinearity.TANH:
            y = np.tanh(self.tanh_scale * y)
        return y


@dataclass(frozen=True)
class MimoChannelSpec:
    H: np.ndarray

    def __post_init__(self) -> None:
        if self.H.ndim != 2 or min(self.H.shape) < 1:
            raise DimensionMismatchError(f"H must be a non-empty matrix, got shape {self.H.shape}")
        if not np.all(np.isfinite(self.H)):
            raise ValueError("channel matrix has non-finite entries")

    @property
    def N(self) -> int:
        return int(self.H.shape[0])

    @property
    def K(self) -> int:
        return int(self.H.shape[1])


def exp_decay_matrix(N: int, K: int) -> MimoChannelSpec:
    """(H)_{n,k} = exp(-|n - k|)."""
    if N < 1 or K < 1:
        raise ValueError(f"N and K must be positive, got N={N}, K={K}")
    n = np.arange(N)[:, None]
    k = np.arange(K)[None, :]
    return MimoChannelSpec(np.exp(-np.abs(n - k).astype(np.float64)))


def siso_noiseless(s: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Causal convolution with zero guard before the block start."""
    symbols = np.asarray(s, dtype=np.float64).reshape(-1)
    h = np.asarray(taps, dtype=np.float64).reshape(-1)
    if h.size < 1:
        raise DimensionMismatchError("tap vector is empty")
    return np.convolve(symbols, h)[: symbols.size]


def siso_transmit(
    s: np.ndarray,
    taps: np.ndarray,
    cfg: ChannelConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Returns a 1 x B observation block."""
    noiseless = siso_noiseless(s, taps)
    return cfg.apply_output(noiseless, rng).reshape(1, -1)


def mimo_transmit(
    S: np.ndarray,
    spec: MimoChannelSpec,
    cfg: ChannelConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Y = H S + W column by column; returns an N x B observation block."""
    symbols = np.atleast_2d(np.asarray(S, dtype=np.float64))
    if symbols.shape[0] != spec.K:
        raise DimensionMismatchError(f"symbol block has {symbols.shape[0]} users, H expects {spec.K}")
    return cfg.apply_output(spec.H @ symbols, rng)
