"""
METARX Reed-Solomon Codec
Systematic shortened RS codes over GF(256) with Berlekamp-Massey decoding.

Shortened codes are treated as a length-255 mother code whose leading
255 - n symbols are fixed to zero. Those padding symbols never change a
Horner evaluation, so syndromes and encoder remainders are computed on
the n transmitted symbols directly; an error located inside the padding
region is reported as a decode failure.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import List, Sequence, Tuple

from fec.galois import GENERATOR, GF_EXP, GF_LOG, gf_pow, poly_mul

FCR = 1  # first consecutive root alpha^1


class LengthMismatchError(ValueError):
    """Raised when a message or word does not match the code dimensions."""


class DecodeFailure(Exception):
    """Raised when the received word cannot be corrected."""


@dataclass(frozen=True)
class RsParams:
    n: int
    k: int

    def __post_init__(self) -> None:
        if not 0 < self.k < self.n <= 255:
            raise ValueError(f"invalid RS parameters [{self.n},{self.k}]")

    @property
    def nsym(self) -> int:
        return self.n - self.k

    @property
    def t(self) -> int:
        return self.nsym // 2

    @property
    def bits(self) -> int:
        return 8 * self.n

    @property
    def message_bits(self) -> int:
        return 8 * self.k


RS_17_15 = RsParams(17, 15)
RS_19_15 = RsParams(19, 15)


def _mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return GF_EXP[GF_LOG[a] + GF_LOG[b]]


def _div(a: int, b: int) -> int:
    if a == 0:
        return 0
    return GF_EXP[(GF_LOG[a] - GF_LOG[b]) % 255]


def _eval_desc(p: Sequence[int], x: int) -> int:
    y = 0
    for c in p:
        y = _mul(y, x) ^ c
    return y


def _eval_asc(p: Sequence[int], x: int) -> int:
    y = 0
    for c in reversed(p):
        y = _mul(y, x) ^ c
    return y


@lru_cache(maxsize=None)
def rs_generator_poly(nsym: int) -> Tuple[int, ...]:
    """g(x) = prod_{i=0}^{nsym-1} (x - alpha^(i+FCR)), highest degree first."""
    g = [1]
    for i in range(nsym):
        g = poly_mul(g, [1, gf_pow(GENERATOR, i + FCR)])
    return tuple(g)


def _as_symbols(values: Sequence[int], expected: int, what: str) -> List[int]:
    symbols = [int(v) for v in values]
    if len(symbols) != expected:
        raise LengthMismatchError(f"{what} length {len(symbols)} != {expected}")
    for v in symbols:
        if not 0 <= v < 256:
            raise ValueError(f"{what} symbol out of range: {v}")
    return symbols


def rs_encode(msg: Sequence[int], params: RsParams) -> List[int]:
    """Message symbols followed by the remainder of msg(x)*x^nsym / g(x)."""
    message = _as_symbols(msg, params.k, "message")
    gen = rs_generator_poly(params.nsym)
    work = message + [0] * params.nsym
    for i in range(params.k):
        coef = work[i]
        if coef == 0:
            continue
        # g is monic, so the leading term cancels exactly
        for j in range(1, len(gen)):
            work[i + j] ^= _mul(gen[j], coef)
    return message + work[params.k:]


def rs_syndromes(word: Sequence[int], nsym: int) -> List[int]:
    return [_eval_desc(word, gf_pow(GENERATOR, i + FCR)) for i in range(nsym)]


def _berlekamp_massey(synd: Sequence[int]) -> Tuple[List[int], int]:
    """Error locator (ascending coefficients, constant term 1) and its length."""
    locator = [1]
    prev = [1]
    length = 0
    shift = 1
    prev_disc = 1
    for n, s_n in enumerate(synd):
        disc = s_n
        for i in range(1, length + 1):
            if i < len(locator):
                disc ^= _mul(locator[i], synd[n - i])
        if disc == 0:
            shift += 1
            continue
        coef = _div(disc, prev_disc)
        update = [0] * shift + [_mul(coef, c) for c in prev]
        size = max(len(locator), len(update))
        candidate = [
            (locator[i] if i < len(locator) else 0) ^ (update[i] if i < len(update) else 0)
            for i in range(size)
        ]
        if 2 * length <= n:
            prev = locator
            length = n + 1 - length
            prev_disc = disc
            shift = 1
        else:
            shift += 1
        locator = candidate
    while len(locator) > 1 and locator[-1] == 0:
        locator.pop()
    return locator, length


def rs_decode(recv: Sequence[int], params: RsParams) -> Tuple[List[int], int]:
    """
    Correct up to t symbol errors.

    Returns:
        (message symbols, number of corrected symbols)

    Raises:
        DecodeFailure when the locator is inconsistent with the received word.
    """
    word = _as_symbols(recv, params.n, "received word")
    nsym = params.nsym
    synd = rs_syndromes(word, nsym)
    if not any(synd):
        return word[: params.k], 0

    locator, num_errors = _berlekamp_massey(synd)
    if num_errors > params.t or len(locator) - 1 != num_errors:
        raise DecodeFailure(f"locator degree {len(locator) - 1} exceeds capacity t={params.t}")

    # Chien search over the transmitted positions; roots in the padding count as inconsistent
    positions = []
    inverses = []
    for index in range(params.n):
        power = params.n - 1 - index
        x_inv = GF_EXP[(255 - power) % 255]
        if _eval_asc(locator, x_inv) == 0:
            positions.append(index)
            inverses.append(x_inv)
    if len(positions) != num_errors:
        raise DecodeFailure(f"found {len(positions)} locator roots, expected {num_errors}")

    # Forney: e = Omega(X^-1) / Lambda'(X^-1) for FCR = 1
    omega = [0] * nsym
    for i, s in enumerate(synd):
        if s == 0:
            continue
        for j, c in enumerate(locator):
            if i + j < nsym:
                omega[i + j] ^= _mul(s, c)
    derivative = [locator[i] if i % 2 == 1 else 0 for i in range(1, len(locator))]

    corrected = list(word)
    for index, x_inv in zip(positions, inverses):
        denom = _eval_asc(derivative, x_inv)
        if denom == 0:
            raise DecodeFailure("zero locator derivative at error position")
        magnitude = _div(_eval_asc(omega, x_inv), denom)
        if magnitude == 0:
            raise DecodeFailure("zero error magnitude at located position")
        corrected[index] ^= magnitude

    if any(rs_syndromes(corrected, nsym)):
        raise DecodeFailure("residual syndrome after correction")
    return corrected[: params.k], len(positions)
