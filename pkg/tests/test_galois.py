"""GF(2^8) arithmetic over x^8+x^4+x^3+x^2+1."""

import pytest

from fec.galois import (
    GF_EXP,
    GF_LOG,
    ZeroInverseError,
    gf_add,
    gf_div,
    gf_inv,
    gf_mul,
    gf_pow,
    poly_add,
    poly_eval,
    poly_mul,
    poly_scale,
)


def test_tables_follow_primitive_polynomial():
    assert GF_EXP[0] == 1
    assert GF_EXP[1] == 2
    assert GF_EXP[8] == 0x1D
    assert GF_EXP[255] == 1
    assert GF_LOG[1] == 0
    assert GF_LOG[2] == 1
    assert sorted(GF_EXP[:255]) == list(range(1, 256))


def test_known_products():
    assert gf_mul(2, 0x80) == 0x1D
    assert gf_mul(3, 7) == 9
    assert gf_mul(0, 123) == 0
    assert gf_add(0x53, 0xCA) == 0x99


def test_every_nonzero_element_has_an_inverse():
    for a in range(1, 256):
        assert gf_mul(a, gf_inv(a)) == 1
        assert gf_div(1, a) == gf_inv(a)


def test_field_axioms_on_random_triples(rng):
    for a, b, c in rng.integers(0, 256, size=(500, 3)).tolist():
        assert gf_mul(a, b) == gf_mul(b, a)
        assert gf_mul(a, gf_mul(b, c)) == gf_mul(gf_mul(a, b), c)
        assert gf_mul(a, gf_add(b, c)) == gf_add(gf_mul(a, b), gf_mul(a, c))
        if b:
            assert gf_mul(gf_div(a, b), b) == a


def test_zero_has_no_inverse():
    with pytest.raises(ZeroInverseError):
        gf_inv(0)
    with pytest.raises(ZeroInverseError):
        gf_div(5, 0)
    assert gf_div(0, 5) == 0


def test_powers():
    assert gf_pow(2, 255) == 1
    assert gf_pow(0, 0) == 1
    assert gf_pow(0, 3) == 0
    assert gf_pow(7, -1) == gf_inv(7)
    with pytest.raises(ZeroInverseError):
        gf_pow(0, -1)


@pytest.mark.parametrize("value", [-1, 256, 1000])
def test_out_of_range_elements_are_rejected(value):
    with pytest.raises(ValueError):
        gf_mul(value, 1)


def test_polynomial_helpers():
    # (x + 2)(x + 3) = x^2 + x + 6
    product = poly_mul([1, 2], [1, 3])
    assert product == [1, 1, 6]
    assert poly_eval(product, 2) == 0
    assert poly_eval(product, 3) == 0
    assert poly_add([1, 2, 3], [4, 5]) == [1, 6, 6]
    assert poly_scale([1, 0, 3], 2) == [2, 0, 6]
