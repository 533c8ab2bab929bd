"""
METARX GF(2^8) Arithmetic
Log/antilog-table field arithmetic over x^8+x^4+x^3+x^2+1 with generator 0x02.
"""

from __future__ import annotations

from typing import List, Sequence

PRIM_POLY = 0x11D
GENERATOR = 0x02
FIELD_SIZE = 256

Gf256 = int


class ZeroInverseError(ArithmeticError):
    """Raised when inverting (or dividing by) the zero element."""


def _build_tables() -> tuple[List[int], List[int]]:
    exp = [0] * 512
    log = [0] * FIELD_SIZE
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & 0x100:
            x ^= PRIM_POLY
    # doubled so exp[log a + log b] needs no modulo
    for i in range(255, 512):
        exp[i] = exp[i - 255]
    return exp, log


GF_EXP, GF_LOG = _build_tables()


def _check(value: int) -> None:
    if not 0 <= value < FIELD_SIZE:
        raise ValueError(f"GF(256) element out of range: {value}")


def gf_add(a: Gf256, b: Gf256) -> Gf256:
    """Addition and subtraction coincide in characteristic 2."""
    _check(a)
    _check(b)
    return a ^ b


def gf_mul(a: Gf256, b: Gf256) -> Gf256:
    _check(a)
    _check(b)
    if a == 0 or b == 0:
        return 0
    return GF_EXP[GF_LOG[a] + GF_LOG[b]]


def gf_div(a: Gf256, b: Gf256) -> Gf256:
    _check(a)
    _check(b)
    if b == 0:
        raise ZeroInverseError("division by zero in GF(256)")
    if a == 0:
        return 0
    return GF_EXP[(GF_LOG[a] - GF_LOG[b]) % 255]


def gf_inv(a: Gf256) -> Gf256:
    _check(a)
    if a == 0:
        raise ZeroInverseError("zero has no multiplicative inverse")
    return GF_EXP[255 - GF_LOG[a]]


def gf_pow(a: Gf256, power: int) -> Gf256:
    _check(a)
    if a == 0:
        if power == 0:
            return 1
        if power < 0:
            raise ZeroInverseError("negative power of zero")
        return 0
    return GF_EXP[(GF_LOG[a] * power) % 255]


# Polynomials are coefficient lists, highest degree first.

def poly_scale(p: Sequence[int], x: int) -> List[int]:
    return [gf_mul(c, x) for c in p]


def poly_add(p: Sequence[int], q: Sequence[int]) -> List[int]:
    size = max(len(p), len(q))
    out = [0] * size
    for i, c in enumerate(p):
        out[i + size - len(p)] = c
    for i, c in enumerate(q):
        out[i + size - len(q)] ^= c
    return out


def poly_mul(p: Sequence[int], q: Sequence[int]) -> List[int]:
    out = [0] * (len(p) + len(q) - 1)
    for j, qc in enumerate(q):
        if qc == 0:
            continue
        for i, pc in enumerate(p):
            if pc:
                out[i + j] ^= gf_mul(pc, qc)
    return out


def poly_eval(p: Sequence[int], x: int) -> int:
    """Horner evaluation."""
    y = p[0]
    for c in p[1:]:
        y = gf_mul(y, x) ^ c
    return y
