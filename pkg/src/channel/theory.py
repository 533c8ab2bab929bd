"""Analytic reference error rates."""

from __future__ import annotations

import numpy as np
from scipy.special import erfc


def q_function(x: float | np.ndarray) -> float | np.ndarray:
    return 0.5 * erfc(np.asarray(x) / np.sqrt(2.0))


def bpsk_awgn_ber(snr_db: float | np.ndarray) -> float | np.ndarray:
    """Uncoded BPSK bit error rate Q(sqrt(SNR)) with SNR = 1 / sigma^2."""
    snr = 10.0 ** (np.asarray(snr_db, dtype=np.float64) / 10.0)
    return q_function(np.sqrt(snr))
