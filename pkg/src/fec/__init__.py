# METARX Forward Error Correction Module
from .galois import ZeroInverseError, gf_add, gf_div, gf_inv, gf_mul, gf_pow
from .modulation import bits_to_bpsk, bits_to_symbols, bpsk_hard, symbols_to_bits
from .reed_solomon import (
    RS_17_15,
    RS_19_15,
    DecodeFailure,
    LengthMismatchError,
    RsParams,
    rs_decode,
    rs_encode,
)
from .validation_gate import GateResult, SelfSupervisionGate, self_supervision_gate

__all__ = [
    "ZeroInverseError",
    "gf_add",
    "gf_div",
    "gf_inv",
    "gf_mul",
    "gf_pow",
    "bits_to_bpsk",
    "bits_to_symbols",
    "bpsk_hard",
    "symbols_to_bits",
    "RS_17_15",
    "RS_19_15",
    "DecodeFailure",
    "LengthMismatchError",
    "RsParams",
    "rs_decode",
    "rs_encode",
    "GateResult",
    "SelfSupervisionGate",
    "self_supervision_gate",
]
