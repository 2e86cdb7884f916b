from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from causal_streams import (
    GF2,
    RAT,
    AlphabetDomain,
    DomainMismatchError,
    NotInvertibleError,
    ProductDomain,
    UnsupportedOperationError,
    coeff_eq,
    field_arith,
)
from causal_streams.coeff import enumerate_words, same_domain


def test_gf2_characteristic_two():
    assert field_arith(GF2, "add", 1, 1) == 0
    assert field_arith(GF2, "add", 1, 0) == 1
    assert field_arith(GF2, "mul", 1, 1) == 1


def test_rational_exact_product():
    assert field_arith(RAT, "mul", Fraction(2, 3), Fraction(3, 4)) == Fraction(1, 2)


def test_inverse_of_zero_rejected():
    with pytest.raises(NotInvertibleError):
        field_arith(GF2, "inv", 0)
    with pytest.raises(NotInvertibleError):
        field_arith(RAT, "inv", Fraction(0))


def test_alphabet_has_no_arithmetic():
    ab = AlphabetDomain(("a", "b"))
    with pytest.raises(UnsupportedOperationError):
        field_arith(ab, "add", "a", "b")


def test_coeff_eq_examples():
    assert coeff_eq(RAT, Fraction(1, 2), Fraction(2, 4))
    assert not coeff_eq(GF2, 0, 1)
    ab = AlphabetDomain(("a", "b"))
    assert not coeff_eq(ab, "a", "b")


def test_rational_canonical_form():
    v = Fraction(-6, -8)
    assert v.numerator == 3 and v.denominator == 4
    v = Fraction(2, -4)
    assert v.denominator > 0


def test_domain_mismatch_detected():
    with pytest.raises(DomainMismatchError):
        same_domain(GF2, RAT)


def test_parse_format_round_trip():
    assert RAT.parse("2/3") == Fraction(2, 3)
    assert RAT.format(Fraction(-5)) == "-5"
    assert GF2.parse("1") == 1
    ab = AlphabetDomain(("x", "y"))
    assert ab.parse(ab.format("y")) == "y"
    pd = ProductDomain((GF2, GF2))
    assert pd.parse(pd.format((0, 1))) == (0, 1)


def test_enumerate_words():
    assert list(enumerate_words(GF2, 0)) == [()]
    assert sorted(enumerate_words(GF2, 2)) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    pd = ProductDomain((GF2, GF2))
    assert len(list(enumerate_words(pd, 2))) == 16


gf2_vals = st.sampled_from([0, 1])
rationals = st.builds(Fraction, st.integers(-50, 50), st.integers(1, 20))


@given(gf2_vals, gf2_vals, gf2_vals)
def test_gf2_field_axioms(a, b, c):
    assert GF2.add(a, b) == GF2.add(b, a)
    assert GF2.mul(a, b) == GF2.mul(b, a)
    assert GF2.add(GF2.add(a, b), c) == GF2.add(a, GF2.add(b, c))
    assert GF2.mul(GF2.mul(a, b), c) == GF2.mul(a, GF2.mul(b, c))
    assert GF2.mul(a, GF2.add(b, c)) == GF2.add(GF2.mul(a, b), GF2.mul(a, c))
    assert GF2.add(a, GF2.neg(a)) == 0
    if a != 0:
        assert GF2.mul(a, GF2.inv(a)) == 1


@given(rationals, rationals, rationals)
def test_rational_field_axioms(a, b, c):
    assert RAT.add(a, b) == RAT.add(b, a)
    assert RAT.mul(RAT.mul(a, b), c) == RAT.mul(a, RAT.mul(b, c))
    assert RAT.mul(a, RAT.add(b, c)) == RAT.add(RAT.mul(a, b), RAT.mul(a, c))
    assert RAT.add(a, RAT.neg(a)) == 0
    if a != 0:
        assert RAT.mul(a, RAT.inv(a)) == 1
