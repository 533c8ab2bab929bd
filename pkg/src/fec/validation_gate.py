"""
METARX Self-Supervision Gate
A detected block becomes a training label only when RS decoding succeeds
and the re-encoded word stays close to the hard-decided channel word.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from fec.modulation import bits_to_bpsk, bits_to_symbols, bpsk_hard, symbols_to_bits
from fec.reed_solomon import DecodeFailure, RsParams, rs_decode, rs_encode

DEFAULT_GATE_THRESHOLD = 0.02


@dataclass
class GateResult:
    valid: bool
    normalized_distance: float
    decode_failed: bool
    reencoded_symbols: Optional[np.ndarray] = None
    # decoded message bits, or the systematic hard bits when decoding failed
    message_bits: Optional[np.ndarray] = None
    corrected: int = 0


def self_supervision_gate(
    detected: np.ndarray,
    params: RsParams,
    hard_channel_bits: np.ndarray,
    epsilon: float = DEFAULT_GATE_THRESHOLD,
) -> GateResult:
    """
    Decode one user's detected BPSK word and decide whether it can be used
    as a self-supervised training label.
    """
    detected = np.asarray(detected, dtype=np.float64).reshape(-1)
    hard_channel_bits = np.asarray(hard_channel_bits, dtype=np.int64).reshape(-1)
    if detected.size != params.bits or hard_channel_bits.size != params.bits:
        raise ValueError(
            f"gate expects {params.bits} symbols, got {detected.size} / {hard_channel_bits.size}"
        )

    demodulated = bpsk_hard(detected)
    try:
        message, corrected = rs_decode(bits_to_symbols(demodulated), params)
    except DecodeFailure:
        return GateResult(
            valid=False,
            normalized_distance=1.0,
            decode_failed=True,
            message_bits=demodulated[: params.message_bits].copy(),
        )

    reencoded_bits = symbols_to_bits(rs_encode(message, params))
    distance = float(np.count_nonzero(reencoded_bits != hard_channel_bits)) / params.bits
    valid = distance <= epsilon
    return GateResult(
        valid=valid,
        normalized_distance=distance,
        decode_failed=False,
        reencoded_symbols=bits_to_bpsk(reencoded_bits) if valid else None,
        message_bits=symbols_to_bits(message),
        corrected=corrected,
    )


class SelfSupervisionGate:
    """
    Gate bound to one code and threshold.
    METARX_GATE_THRESHOLD overrides the threshold when no explicit value is given.
    """

    def __init__(self, params: RsParams, epsilon: Optional[float] = None):
        if epsilon is None:
            epsilon = float(os.getenv("METARX_GATE_THRESHOLD", str(DEFAULT_GATE_THRESHOLD)))
        if not 0.0 <= epsilon <= 1.0:
            raise ValueError(f"gate threshold must lie in [0, 1], got {epsilon}")
        self.params = params
        self.epsilon = epsilon

    def evaluate(self, detected: np.ndarray) -> GateResult:
        """Gate a detected word against its own hard decision."""
        hard = bpsk_hard(detected)
        return self_supervision_gate(detected, self.params, hard, self.epsilon)

    def evaluate_block(self, detected: np.ndarray) -> list[GateResult]:
        """Gate every user row of a K x B detected block."""
        block = np.atleast_2d(detected)
        return [self.evaluate(row) for row in block]
