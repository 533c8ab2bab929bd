"""Shortened systematic Reed-Solomon codes."""

import numpy as np
import pytest

from fec.galois import gf_pow, poly_eval
from fec.reed_solomon import (
    RS_17_15,
    RS_19_15,
    DecodeFailure,
    LengthMismatchError,
    RsParams,
    rs_decode,
    rs_encode,
    rs_generator_poly,
    rs_syndromes,
)

CODES = [RS_17_15, RS_19_15]


def _corrupt(word, rng, errors):
    corrupted = list(word)
    for pos in rng.choice(len(word), size=errors, replace=False):
        corrupted[pos] ^= int(rng.integers(1, 256))
    return corrupted


@pytest.mark.parametrize("nsym", [2, 4, 10])
def test_generator_roots_start_at_alpha(nsym):
    gen = rs_generator_poly(nsym)
    assert len(gen) == nsym + 1
    assert gen[0] == 1
    for i in range(nsym):
        assert poly_eval(gen, gf_pow(2, i + 1)) == 0
    assert poly_eval(gen, 1) != 0


def test_code_dimensions():
    assert (RS_17_15.nsym, RS_17_15.t, RS_17_15.bits, RS_17_15.message_bits) == (2, 1, 136, 120)
    assert (RS_19_15.nsym, RS_19_15.t, RS_19_15.bits) == (4, 2, 152)
    with pytest.raises(ValueError):
        RsParams(15, 15)
    with pytest.raises(ValueError):
        RsParams(300, 10)


@pytest.mark.parametrize("params", CODES)
def test_encoding_is_systematic_with_zero_syndromes(params, rng):
    msg = rng.integers(0, 256, size=params.k).tolist()
    word = rs_encode(msg, params)
    assert len(word) == params.n
    assert word[: params.k] == msg
    assert not any(rs_syndromes(word, params.nsym))
    assert rs_decode(word, params) == (msg, 0)


@pytest.mark.parametrize("params", CODES)
def test_corrects_up_to_t_symbol_errors(params, rng):
    for _ in range(300):
        msg = rng.integers(0, 256, size=params.k).tolist()
        errors = int(rng.integers(1, params.t + 1))
        decoded, corrected = rs_decode(_corrupt(rs_encode(msg, params), rng, errors), params)
        assert decoded == msg
        assert corrected == errors


@pytest.mark.parametrize("params", CODES)
def test_beyond_capacity_never_returns_the_sent_message(params, rng):
    """t+1 errors leave the word closer to another codeword or to none."""
    failures = 0
    for _ in range(200):
        msg = rng.integers(0, 256, size=params.k).tolist()
        received = _corrupt(rs_encode(msg, params), rng, params.t + 1)
        try:
            decoded, _ = rs_decode(received, params)
        except DecodeFailure:
            failures += 1
            continue
        assert decoded != msg
    assert failures > 0


def test_error_in_parity_is_corrected():
    msg = list(range(15))
    word = rs_encode(msg, RS_17_15)
    word[-1] ^= 0x55
    assert rs_decode(word, RS_17_15) == (msg, 1)


def test_length_mismatch():
    with pytest.raises(LengthMismatchError):
        rs_encode([1, 2, 3], RS_17_15)
    with pytest.raises(LengthMismatchError):
        rs_decode([0] * 16, RS_17_15)
    with pytest.raises(ValueError):
        rs_encode([256] + [0] * 14, RS_17_15)


@pytest.mark.parametrize("params", CODES)
def test_parity_matches_reedsolo(params, rng):
    reedsolo = pytest.importorskip("reedsolo")
    codec = reedsolo.RSCodec(params.nsym, nsize=255, fcr=1, prim=0x11D, generator=2, c_exp=8)
    for _ in range(50):
        msg = rng.integers(0, 256, size=params.k).tolist()
        assert list(codec.encode(bytearray(msg))) == rs_encode(msg, params)


def test_all_zero_message_encodes_to_zero_word():
    assert rs_encode([0] * 15, RS_17_15) == [0] * 17
    assert np.count_nonzero(rs_encode([0] * 14 + [1], RS_17_15)) >= 3


@pytest.mark.parametrize("params", CODES)
def test_encoding_is_linear_over_xor(params, rng):
    for _ in range(200):
        a = rng.integers(0, 256, size=params.k)
        b = rng.integers(0, 256, size=params.k)
        combined = rs_encode((a ^ b).tolist(), params)
        assert combined == [x ^ y for x, y in zip(rs_encode(a.tolist(), params), rs_encode(b.tolist(), params))]


@pytest.mark.slow
@pytest.mark.parametrize("params", CODES)
def test_round_trip_over_ten_thousand_trials(params):
    rng = np.random.default_rng(2024)
    for _ in range(10_000):
        msg = rng.integers(0, 256, size=params.k).tolist()
        errors = int(rng.integers(0, params.t + 1))
        decoded, corrected = rs_decode(_corrupt(rs_encode(msg, params), rng, errors), params)
        assert decoded == msg
        assert corrected == errors
