import sympy
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from superstable.interval import Interval
from superstable.polynomial import IntPoly, binomial_row

GENS = ("S", "T")
S_, T_ = sympy.symbols("S T")

terms = st.dictionaries(
    st.tuples(st.integers(0, 5), st.integers(0, 4)), st.integers(-20, 20), max_size=8
)


def to_sympy(p):
    return sum(v * S_ ** i * T_ ** j for (i, j), v in p.terms.items())


@given(terms, terms)
@settings(max_examples=60)
def test_ring_operations_match_sympy(a, b):
    A, B = IntPoly(a, GENS), IntPoly(b, GENS)
    assert sympy.expand(to_sympy(A * B) - to_sympy(A) * to_sympy(B)) == 0
    assert sympy.expand(to_sympy(A + B) - to_sympy(A) - to_sympy(B)) == 0
    assert sympy.expand(to_sympy(A - B) - to_sympy(A) + to_sympy(B)) == 0


@given(terms, st.integers(0, 3))
@settings(max_examples=30)
def test_power_matches_repeated_product(a, n):
    A = IntPoly(a, GENS)
    expected = IntPoly.constant(1, GENS)
    for _ in range(n):
        expected = expected * A
    assert A**n == expected


@given(terms, st.fractions(-3, 3, max_denominator=50), st.fractions(-3, 3, max_denominator=50))
@settings(max_examples=60)
def test_centered_evaluation_encloses_exact_value(a, s, t):
    P = IntPoly(a, GENS)
    exact = P.exact_value({"S": mpq(s), "T": mpq(t)})
    box = {"S": Interval(s - mpq(1, 1000), s + mpq(1, 1000)), "T": Interval(t)}
    for value in (P.centered_evaluate(box), P.evaluate(box)):
        assert value.contains(exact)


def test_exact_and_derivative():
    S, T = IntPoly.gens_of(GENS)
    P = S**3 * T + 2 * S - 7
    assert P.diff("S") == 3 * S**2 * T + 2
    assert P.exact_value({"S": mpq(2), "T": mpq(1, 2)}) == 1


def test_str_and_coeffs():
    P = IntPoly.from_coeffs([1, 1, 2, 1])
    assert str(P) == "S^3 + 2*S^2 + S + 1"
    assert P.to_coeffs() == [1, 1, 2, 1]
    assert P.degree() == 3
    assert str(IntPoly.from_coeffs([-1, 0, -3])) == "-3*S^2 - 1"


def test_horner_contains_value():
    P = IntPoly.from_coeffs([1, 1, 2, 1])
    assert P.horner(Interval(-2)).contains(-1)


def test_zero_coefficients_are_dropped():
    S, T = IntPoly.gens_of(GENS)
    assert not (S * T - T * S)
    assert len(S + T - S) == 1


def test_binomial_row():
    assert binomial_row(4) == [1, 4, 6, 4, 1]
