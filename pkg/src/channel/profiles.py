"""
METARX Tap Profiles
Synthetic periodic tap profiles, i.i.d. random profiles and per-block MIMO matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from channel.models import MimoChannelSpec, exp_decay_matrix

# Train and test profiles share amplitudes but use different periods.
TRAIN_PERIODS = (51.0, 39.0, 27.0, 63.0)
TEST_PERIODS = (31.0, 23.0, 47.0, 17.0)
TRAIN_PHASES = (0.0, 0.7, 1.9, 3.1)
TEST_PHASES = (0.4, 2.3, 1.1, 5.0)


@dataclass
class TapProfile:
    """taps[l, j] is tap l of block j."""

    taps: np.ndarray

    def __post_init__(self) -> None:
        self.taps = np.atleast_2d(np.asarray(self.taps, dtype=np.float64))
        if self.taps.shape[0] < 1 or self.taps.shape[1] < 1:
            raise ValueError(f"tap profile must be at least 1 x 1, got {self.taps.shape}")
        if not np.all(np.isfinite(self.taps)):
            raise ValueError("tap profile has non-finite entries")

    @property
    def L(self) -> int:
        return int(self.taps.shape[0])

    @property
    def J(self) -> int:
        return int(self.taps.shape[1])

    def block_taps(self, j: int) -> np.ndarray:
        """Taps of block j; profiles shorter than the run are cycled."""
        return self.taps[:, j % self.J].copy()


@dataclass(frozen=True)
class TapSpec:
    amplitudes: Sequence[float]
    periods: Sequence[float]
    phases: Sequence[float]

    def __post_init__(self) -> None:
        if not len(self.amplitudes) == len(self.periods) == len(self.phases):
            raise ValueError("tap spec fields must have equal length")
        if any(p <= 0 for p in self.periods):
            raise ValueError("tap periods must be positive")


def default_amplitudes(L: int) -> list[float]:
    return [0.8**l for l in range(L)]


def _cycled(values: Sequence[float], L: int) -> list[float]:
    return [values[l % len(values)] for l in range(L)]


def default_tap_spec(L: int, phase: str = "train") -> TapSpec:
    if phase == "train":
        periods, phases = TRAIN_PERIODS, TRAIN_PHASES
    elif phase == "test":
        periods, phases = TEST_PERIODS, TEST_PHASES
    else:
        raise ValueError(f"unknown profile phase: {phase}")
    return TapSpec(default_amplitudes(L), _cycled(periods, L), _cycled(phases, L))


def synth_tap_profile(spec: TapSpec, L: int, J: int) -> TapProfile:
    """h[l, j] = a_l * (0.8 + 0.2 cos(2 pi j / P_l + psi_l)); an infinite period gives a constant row."""
    if len(spec.amplitudes) != L:
        raise ValueError(f"tap spec describes {len(spec.amplitudes)} taps, expected L={L}")
    j = np.arange(J, dtype=np.float64)
    rows = []
    for a, period, psi in zip(spec.amplitudes, spec.periods, spec.phases):
        angle = psi + (0.0 if np.isinf(period) else 2.0 * np.pi / period) * j
        rows.append(a * (0.8 + 0.2 * np.cos(angle)))
    return TapProfile(np.vstack(rows))


def random_tap_profile(L: int, J: int, rng: np.random.Generator) -> TapProfile:
    """Same amplitude envelope as the synthetic profile but i.i.d. across blocks."""
    amplitudes = np.asarray(default_amplitudes(L))[:, None]
    u = rng.uniform(-1.0, 1.0, size=(L, J))
    return TapProfile(amplitudes * (0.8 + 0.2 * u))


def user_modulation(K: int, j: int, phase: str = "train", users: Optional[Sequence[int]] = None) -> np.ndarray:
    """
    Per-user gain 0.8 + 0.2 cos(2 pi j / P_k + psi_k); users outside
    `users` (1-based) keep unit gain.
    """
    periods = TRAIN_PERIODS if phase == "train" else TEST_PERIODS
    phases = TRAIN_PHASES if phase == "train" else TEST_PHASES
    gains = np.ones(K)
    for k in range(K):
        if users is not None and (k + 1) not in users:
            continue
        period = periods[k % len(periods)]
        psi = phases[k % len(phases)]
        gains[k] = 0.8 + 0.2 * np.cos(2.0 * np.pi * j / period + psi)
    return gains


def modulated_mimo_channel(
    N: int,
    K: int,
    j: int,
    phase: str = "train",
    users: Optional[Sequence[int]] = None,
) -> MimoChannelSpec:
    """Exponential-decay H with each user column scaled by its block gain."""
    base = exp_decay_matrix(N, K).H
    return MimoChannelSpec(base * user_modulation(K, j, phase, users)[None, :])


def trace_mimo_channel(profile: TapProfile, N: int, K: int, j: int) -> MimoChannelSpec:
    """Row j of an N*K column trace, reshaped row-major into H_j."""
    if profile.L != N * K:
        raise ValueError(f"MIMO trace needs {N * K} columns, got {profile.L}")
    return MimoChannelSpec(profile.block_taps(j).reshape(N, K))
