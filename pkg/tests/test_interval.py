from fractions import Fraction

import pytest
from gmpy2 import mpfr, mpq
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from superstable.interval import Interval, RationalExponent, rpow

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=10**6)
precisions = st.sampled_from([24, 53, 128, 300])


def frac(x):
    return Fraction(int(mpq(x).numerator), int(mpq(x).denominator))


@st.composite
def intervals_with_member(draw):
    a, b = sorted((draw(fractions), draw(fractions)))
    t = draw(st.fractions(min_value=0, max_value=1, max_denominator=1000))
    return Interval(a, b, draw(precisions)), a + t * (b - a)


def encloses(iv, exact):
    return frac(iv.lo) <= exact <= frac(iv.hi)


@given(intervals_with_member(), intervals_with_member())
def test_arithmetic_encloses_exact_results(xa, yb):
    (X, x), (Y, y) = xa, yb
    assert encloses(X + Y, x + y)
    assert encloses(X - Y, x - y)
    assert encloses(X * Y, x * y)
    assert encloses(-X, -x)
    assert encloses(abs(X), abs(x))
    if not Y.contains_zero():
        assert encloses(X / Y, x / y)


@given(intervals_with_member(), st.integers(min_value=0, max_value=7))
def test_integer_powers_enclose(xa, n):
    X, x = xa
    assert encloses(X**n, x**n)


@given(intervals_with_member(), st.integers(min_value=2, max_value=5))
def test_roots_enclose(xa, k):
    X, x = xa
    assume(X.lo >= 0)
    R = X.root(k)
    # x is inside [lo^k, hi^k] exactly
    assert frac(R.lo) ** k <= x <= frac(R.hi) ** k


@given(intervals_with_member())
def test_even_power_is_nonnegative(xa):
    X, _ = xa
    assert (X**2).lo >= 0


@given(intervals_with_member())
@settings(max_examples=50)
def test_decimal_round_trip_contains_original(xa):
    X, _ = xa
    lo, hi = X.decimal_strings()
    assert Interval(lo, hi, X.precision).contains(X)
    assert Interval.from_dict(X.to_dict()).contains(X)


def test_construction_rounds_outward():
    third = Interval(Fraction(1, 3), precision=53)
    assert third.lo < third.hi
    assert encloses(third, Fraction(1, 3))
    assert Interval("0.1", precision=64).contains(Fraction(1, 10))


def test_empty_interval_rejected():
    with pytest.raises(ValueError):
        Interval(2, 1)


def test_division_by_interval_containing_zero():
    with pytest.raises(ZeroDivisionError):
        Interval(1) / Interval(-1, 1)


def test_negation_keeps_working_precision():
    # -(1 + 2^-100) must not be rounded to a 53-bit neighbour
    x = Interval(1 + Fraction(1, 2**100), precision=128)
    assert encloses(-x, -(1 + Fraction(1, 2**100)))
    assert (x * x).lo > 1


def test_sign_and_mig_mag():
    assert Interval(1, 2).sign() == 1
    assert Interval(-2, -1).sign() == -1
    assert Interval(-1, 2).sign() == 0
    assert Interval(-3, 2).mag() == 3
    assert Interval(-3, 2).mig() == 0
    assert Interval(2, 5).mig() == 2


def test_abs_pow_matches_rational_power():
    x = Interval(-8, precision=128)
    assert x.abs_pow(2, 3).contains(4)
    assert rpow(Interval(4), RationalExponent(3, 2)).contains(8)


def test_mid_is_inside():
    x = Interval(mpfr(1), mpfr(1) + mpfr(2) ** -100, precision=128)
    assert x.contains(x.mid())


class TestRationalExponent:
    def test_parse_reduces(self):
        r = RationalExponent.parse("6/4")
        assert (r.p, r.q) == (3, 2)
        assert str(r) == "3/2"

    def test_integer_form(self):
        assert RationalExponent.parse("2") == RationalExponent(2, 1)

    @pytest.mark.parametrize("text", ["1/1", "1/2", "0/1", "-3/2", "x"])
    def test_rejects_non_expanding(self, text):
        with pytest.raises(ValueError):
            RationalExponent.parse(text)

    def test_round_trip(self):
        r = RationalExponent(5, 3)
        assert RationalExponent.from_dict(r.to_dict()) == r
        assert float(r) == pytest.approx(5 / 3)
