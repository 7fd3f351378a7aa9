"""Exact elimination producing monic integer certificates for ``s = -(-c)^(r-1)``.

Writing ``f_c^j(0) = b_j c`` turns the critical orbit into the recursion
``b_{j+1} = |b_j|^r s + 1`` with ``b_1 = 1`` and ``b_n = 0`` for a superstable
parameter of period ``n``.  The radicals ``|b_k|^(1/q)`` are removed one index
at a time:

* a *bivariate* identity ``F(S, b_k) = 0`` with a unique, componentwise
  dominant leading term ``+-b_k^m S^n'``;
* :func:`descend` substitutes ``b_k = B^p S + 1`` where ``B = |b_{k-1}|^(1/q)``,
  aligns the leading ``B``-exponent to ``q - 1 (mod q)`` and folds
  ``B^q -> T``, giving a :class:`Relation` ``sum_j a_j(S, T) B^j = 0``;
* :func:`reduction_step` lowers the ``B``-degree by one while keeping the top
  coefficient monic-dominant, :func:`eliminate` finishes with
  ``a_1^q T - (-a_0)^q``;
* :func:`rewrite` substitutes ``T = |b_{k-1}| = -s_{k-1} b_{k-1}``.

At index 2, ``b_2 = S + 1`` closes the loop with a univariate polynomial
whose leading coefficient is +-1.

Signs ``s_j = sgn(f_c^j(0))`` are the only input besides ``p`` and ``q``; the
numeric witness is used for checks only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

from gmpy2 import mpfr

from .dynamics import PeriodicPair, refine_pair
from .errors import DegreeBlowup, DominanceViolation
from .interval import Interval, RationalExponent
from .polynomial import DEFAULT_TERM_CAP, IntPoly

REL_GENS = ("S", "T")
BIV_GENS = ("S", "b")
UNI_GENS = ("S",)

WITNESS_PRECISION = 256


# --------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class Relation:
    """``sum_j coeffs[j](S, T) * B^j = 0`` with ``B = |b_index|^(1/q)``, ``T = B^q``.

    The top coefficient is the monic-dominant one.
    """

    r: RationalExponent
    index: int
    coeffs: tuple
    sign_context: tuple = ()

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def dominant_index(self):
        return self.degree

    def leading_monomial(self):
        exps = [a.max_exponents() for a in self.coeffs if a]
        return tuple(max(e[i] for e in exps) for i in range(2))

    def check_dominance(self):
        """Raise :class:`DominanceViolation` unless the top coefficient owns the
        componentwise-maximal monomial, with coefficient +-1."""
        top = self.coeffs[-1]
        if not top:
            raise DominanceViolation(f"index {self.index}: dominant coefficient vanished")
        lead = self.leading_monomial()
        if abs(top.coeff(lead)) != 1:
            raise DominanceViolation(
                f"index {self.index}: S^{lead[0]} T^{lead[1]} has coefficient {top.coeff(lead)} in a_{self.degree}"
            )
        for j, a in enumerate(self.coeffs[:-1]):
            if a.coeff(lead):
                raise DominanceViolation(f"index {self.index}: leading monomial also appears in a_{j}")
        return lead

    def nterms(self):
        return sum(len(a) for a in self.coeffs)

    def as_poly(self):
        """The left-hand side as one polynomial in (S, T, B)."""
        out = {}
        for j, a in enumerate(self.coeffs):
            for (i, t), v in a.terms.items():
                out[(i, t, j)] = v
        return IntPoly(out, ("S", "T", "B"))

    def evaluate(self, witness):
        S, T, B = witness.S, witness.T(self.index), witness.B(self.index)
        total = Interval(0, precision=witness.precision)
        for j, a in enumerate(self.coeffs):
            if a:
                total = total + a.evaluate({"S": S, "T": T}) * (B**j)
        return total

    def __str__(self):
        parts = [f"({a})*B^{j}" for j, a in enumerate(self.coeffs) if a]
        return " + ".join(reversed(parts)) + " = 0"


@dataclass(frozen=True)
class BivariateRelation:
    """``poly(S, b_index) = 0`` with a unique dominant term ``+-b^m S^n'``."""

    r: RationalExponent
    index: int
    poly: IntPoly
    sign_context: tuple = ()

    @property
    def leading(self):
        """``(m, n')``: the b- and S-degrees of the leading term."""
        s_deg, b_deg = self.poly.max_exponents()
        return b_deg, s_deg

    def check_dominance(self):
        m, n_ = self.leading
        c = self.poly.coeff((n_, m))
        if abs(c) != 1:
            raise DominanceViolation(
                f"index {self.index}: leading term b^{m} S^{n_} has coefficient {c}"
            )
        return m, n_

    def strictly_dominant(self):
        """True when every other term is strictly lower in both b and S."""
        m, n_ = self.leading
        return all((i < n_ and j < m) or (i, j) == (n_, m) for i, j in self.poly.terms)

    def evaluate(self, witness):
        return self.poly.evaluate({"S": witness.S, "b": witness.b(self.index)})

    def __str__(self):
        return f"{self.poly} = 0   [b = b_{self.index}]"


@dataclass(frozen=True)
class Stage:
    """One intermediate object of the certify pipeline."""

    kind: str
    index: int
    value: object

    def evaluate(self, witness, centered=True):
        """Enclosure of the stage's left-hand side at the witness.

        The centred (mean-value) form is used by default; plain interval
        evaluation loses everything to cancellation for high degrees.
        """
        if not centered:
            if self.kind == "polynomial":
                return self.value.horner(witness.S)
            if self.kind == "eliminated":
                return self.value.evaluate({"S": witness.S, "T": witness.T(self.index)})
            return self.value.evaluate(witness)
        if self.kind == "polynomial":
            return self.value.centered_evaluate({"S": witness.S})
        if self.kind == "eliminated":
            return self.value.centered_evaluate({"S": witness.S, "T": witness.T(self.index)})
        if self.kind == "bivariate":
            return self.value.poly.centered_evaluate({"S": witness.S, "b": witness.b(self.index)})
        k = self.index
        return self.value.as_poly().centered_evaluate(
            {"S": witness.S, "T": witness.T(k), "B": witness.B(k)}
        )


@dataclass
class Certificate:
    """Monic integer polynomial ``P`` with ``P(s) = 0``.

    ``P`` is ascending and normalised to leading coefficient +1;
    ``leading_sign`` records the sign the elimination produced.
    """

    r: RationalExponent
    n: int
    signs: tuple
    P: tuple
    leading_sign: int = 1
    residual: Interval | None = None
    witness: Interval | None = None
    stages: list = field(default_factory=list, repr=False)

    @property
    def monic(self):
        return abs(self.P[-1]) == 1

    @property
    def degree(self):
        return len(self.P) - 1

    @property
    def raw(self):
        """Coefficients exactly as produced by the elimination (unnormalised)."""
        return tuple(c * self.leading_sign for c in self.P)

    def poly(self):
        return IntPoly.from_coeffs(self.P)

    def to_dict(self):
        out = {
            "r": self.r.to_dict(),
            "n": self.n,
            "signs": list(self.signs),
            "P": [str(c) for c in self.P],
            "degree": self.degree,
            "monic": self.monic,
        }
        if self.witness is not None:
            lo, hi = self.witness.decimal_strings()
            out["witness"] = {"c_lo": lo, "c_hi": hi}
        if self.residual is not None:
            out["residual"] = self.residual.to_dict()
        return out


class Witness:
    """Numeric values of ``S``, ``b_k``, ``T_k``, ``B_k`` at a superstable pair."""

    def __init__(self, pair: PeriodicPair, precision=WITNESS_PRECISION):
        if pair.c.precision < precision or pair.c.width() > mpfr(2) ** -(precision - 24):
            pair = refine_pair(pair, precision)
        self.pair = pair
        self.r = pair.r
        self.precision = precision
        self.c = pair.c
        self.S = s_of_c(pair.c, pair.r)
        self._xi = pair.orbit.xi
        self._b = {}

    def b(self, k):
        if k == 1:
            return Interval(1, precision=self.precision)
        if k not in self._b:
            self._b[k] = self._xi[k - 1] / self.c
        return self._b[k]

    def T(self, k):
        return abs(self.b(k))

    def B(self, k):
        return self.T(k).root(self.r.q)


# --------------------------------------------------------------------------
# numeric helpers


def s_of_c(c: Interval, r: RationalExponent) -> Interval:
    """``s = -(-c)^(r-1) = -|c|^((p-q)/q)`` for ``c <= 0``."""
    if c.lo > 0:
        raise ValueError("s is defined for c <= 0")
    return -c.abs_pow(r.p - r.q, r.q)


def evaluate_certificate(P, pair: PeriodicPair, precision=WITNESS_PRECISION) -> Interval:
    """Enclosure of ``|P(s(c))|`` at the pair, refined to ``precision`` bits.

    Uses the centred form; for high degrees Horner's rule in interval
    arithmetic is dominated by cancellation.
    """
    if not isinstance(P, IntPoly):
        P = IntPoly.from_coeffs(P)
    w = Witness(pair, precision)
    return abs(P.centered_evaluate({"S": w.S}))


# --------------------------------------------------------------------------
# integer exponent: plain recursion


def b_recursion_integer(r: RationalExponent, signs) -> list:
    """``b_1..b_n`` as polynomials in S for integer ``r`` (q = 1)."""
    r = RationalExponent.parse(r)
    if r.q != 1:
        raise ValueError("b_recursion_integer needs an integer exponent")
    S = IntPoly.gen("S", UNI_GENS)
    bs = [IntPoly.constant(1, UNI_GENS)]
    for s in signs:
        bs.append((bs[-1] * (-s)) ** r.p * S + 1)
    return bs


# --------------------------------------------------------------------------
# elimination pipeline


def _check_signs(n, signs):
    signs = tuple(int(s) for s in signs)
    if len(signs) != n - 1:
        raise ValueError(f"period {n} needs {n - 1} signs, got {len(signs)}")
    if any(s not in (-1, 1) for s in signs):
        raise ValueError("signs must be +-1")
    return signs


def initial_bivariate(r: RationalExponent, n: int, signs) -> BivariateRelation:
    """``(-s_{n-1} b_{n-1})^p S^q - (-1)^q = 0`` from ``0 = b_n``."""
    signs = _check_signs(n, signs)
    s = signs[n - 2]
    poly = IntPoly({(r.q, r.p): (-s) ** r.p, (0, 0): -((-1) ** r.q)}, BIV_GENS)
    return BivariateRelation(r, n - 1, poly, signs[n - 2 :])


def alignment_exponent(r: RationalExponent, m: int) -> int:
    """The unique ``e`` in ``[0, q-1]`` with ``p m + e = q - 1 (mod q)``."""
    return (r.q - 1 - r.p * m) % r.q


def descend(biv: BivariateRelation, sign_prev: int | None = None) -> Relation:
    """Substitute ``b_k = B^p S + 1`` and regroup by ``B``-residues mod q."""
    r = biv.r
    p, q = r.p, r.q
    k = biv.index
    if k < 2:
        raise ValueError("descend needs index >= 2")
    m, _ = biv.check_dominance()
    e = alignment_exponent(r, m)
    buckets = [dict() for _ in range(q)]
    for (j, i), v in biv.poly.terms.items():
        # v * b^i S^j  ->  v * sum_a C(i,a) B^(p a) S^(a + j), times B^e
        for a in range(i + 1):
            E = p * a + e
            key = (a + j, E // q)
            bucket = buckets[E % q]
            bucket[key] = bucket.get(key, 0) + v * comb(i, a)
    context = biv.sign_context if sign_prev is None else (sign_prev,) + tuple(biv.sign_context)
    rel = Relation(r, k - 1, tuple(IntPoly(b, REL_GENS) for b in buckets), context)
    rel.check_dominance()
    return rel


def initial_relation(r: RationalExponent, n: int, signs) -> Relation:
    """Relation at index ``n-2`` obtained by expanding ``b_{n-1}`` once."""
    r = RationalExponent.parse(r)
    if n < 3:
        raise ValueError("initial_relation needs n >= 3")
    signs = _check_signs(n, signs)
    return descend(initial_bivariate(r, n, signs), signs[n - 3])


def reduction_step(rel: Relation, term_cap=DEFAULT_TERM_CAP) -> Relation:
    """Lower the ``B``-degree of ``rel`` by one.

    With ``A`` the top coefficient, the relation is multiplied by ``A B`` and
    its own top term substituted back, ``q - 1`` times, until the leading
    term reads ``A^q B^(q+d-1) = A^q T B^(d-1)``::

        hat_j <- A * hat_{j-1} - a_j * hat_{d-1}     (hat_{-1} = 0)

    The new top coefficient is ``A^q T + hat_{d-1}``.
    """
    d = rel.degree
    if d < 1:
        raise ValueError("relation already free of B")
    rel.check_dominance()
    q = rel.r.q
    a = rel.coeffs
    A = a[-1]
    hats = list(a[:-1])
    for _ in range(q - 1):
        top = hats[-1]
        new = []
        for j in range(d):
            term = -(a[j] * top)
            if j:
                term = A * hats[j - 1] + term
            new.append(term.check_size(term_cap, "reduction coefficient"))
        hats = new
    T = IntPoly.gen("T", REL_GENS)
    lead = (A**q * T + hats[-1]).check_size(term_cap, "dominant coefficient")
    out = Relation(rel.r, rel.index, tuple(hats[:-1]) + (lead,), rel.sign_context)
    out.check_dominance()
    return out


def eliminate(rel: Relation, term_cap=DEFAULT_TERM_CAP, trace=None) -> IntPoly:
    """Remove ``B``: reduce to degree one, then ``a_1^q T - (-a_0)^q``."""
    while rel.degree > 1:
        rel = reduction_step(rel, term_cap)
        if trace is not None:
            trace.append(Stage("relation", rel.index, rel))
    if rel.degree == 0:
        out = rel.coeffs[0]
    else:
        a0, a1 = rel.coeffs
        q = rel.r.q
        T = IntPoly.gen("T", REL_GENS)
        out = (a1**q * T - (-a0) ** q).check_size(term_cap, "eliminated polynomial")
    Relation(rel.r, rel.index, (out,)).check_dominance()
    return out


def rewrite(poly: IntPoly, r: RationalExponent, index: int, sign: int, context=()) -> BivariateRelation:
    """``T -> -s_k b_k`` (that is ``T = |b_k|``) in an (S, T) polynomial."""
    out = {}
    for (i, j), v in poly.terms.items():
        out[(i, j)] = v * (-sign) ** j
    biv = BivariateRelation(r, index, IntPoly(out, BIV_GENS), tuple(context))
    biv.check_dominance()
    return biv


def close(biv: BivariateRelation) -> IntPoly:
    """Substitute ``b_2 = S + 1``."""
    if biv.index != 2:
        raise ValueError("close expects a relation in b_2")
    out = {}
    for (j, i), v in biv.poly.terms.items():
        for a in range(i + 1):
            key = (a + j,)
            out[key] = out.get(key, 0) + v * comb(i, a)
    return IntPoly(out, UNI_GENS)


def pipeline(r, n, signs, term_cap=DEFAULT_TERM_CAP):
    """Run the elimination, returning every intermediate :class:`Stage`.

    The last stage holds the univariate polynomial.
    """
    r = RationalExponent.parse(r)
    if n < 2:
        raise ValueError("period 1 (c = 0) is trivial and has no certificate")
    signs = _check_signs(n, signs)
    S = IntPoly.gen("S", UNI_GENS)
    if n == 2:
        return [Stage("polynomial", 2, S + 1)]
    stages = []
    biv = initial_bivariate(r, n, signs)
    biv.check_dominance()
    stages.append(Stage("bivariate", biv.index, biv))
    for k in range(n - 1, 2, -1):
        s_prev = signs[k - 2]
        rel = descend(biv, s_prev)
        stages.append(Stage("relation", rel.index, rel))
        E = eliminate(rel, term_cap, trace=stages)
        stages.append(Stage("eliminated", rel.index, E))
        biv = rewrite(E, r, k - 1, s_prev, rel.sign_context)
        stages.append(Stage("bivariate", biv.index, biv))
    stages.append(Stage("polynomial", 2, close(biv)))
    return stages


def certify(r, n, signs, pair: PeriodicPair | None = None, term_cap=DEFAULT_TERM_CAP,
            precision=WITNESS_PRECISION, keep_stages=False) -> Certificate:
    """Monic certificate that ``s`` is an algebraic integer.

    Depends only on ``(p, q, signs)``.  When ``pair`` is given, its
    ``|P(s(c))|`` enclosure is attached as residual evidence.
    """
    r = RationalExponent.parse(r)
    signs = _check_signs(n, signs)
    if pair is not None and (pair.r != r or pair.n != n or tuple(pair.signs) != signs):
        raise ValueError("pair does not match (r, n, signs)")
    stages = pipeline(r, n, signs, term_cap)
    P = stages[-1].value.to_coeffs()
    lead = P[-1]
    if abs(lead) != 1:
        raise DominanceViolation(f"certificate leading coefficient is {lead}")
    P = tuple(c * lead for c in P)
    cert = Certificate(r, n, signs, P, leading_sign=lead, stages=stages if keep_stages else [])
    if pair is not None:
        cert.residual = evaluate_certificate(P, pair, precision)
        cert.witness = pair.c
    return cert


def witness_residuals(stages, pair: PeriodicPair, precision=WITNESS_PRECISION, centered=True):
    """Evaluate each stage at the numeric witness: ``[(stage, Interval)]``."""
    w = Witness(pair, precision)
    return [(st, st.evaluate(w, centered)) for st in stages]


# --------------------------------------------------------------------------
# independent cross-check: classical resultants


def resultant_oracle(r, n, signs, term_cap=DEFAULT_TERM_CAP) -> list:
    """Univariate integer polynomial (ascending) vanishing at ``s``.

    Each radical ``B = |b_k|^(1/q)`` is removed with ``Res_B(F, B^q - T)``
    (sympy), then ``T = -s_k b_k``; no monicity is claimed.
    """
    import sympy

    r = RationalExponent.parse(r)
    signs = _check_signs(n, signs)
    p, q = r.p, r.q
    S, B, T, b = sympy.symbols("S B T b")
    if n == 2:
        return [1, 1]
    F = sympy.Poly((-signs[n - 2]) ** p * b**p * S**q - (-1) ** q, S, b)
    for k in range(n - 1, 2, -1):
        s_prev = signs[k - 2]
        G = sympy.Poly(F.as_expr().subs(b, B**p * S + 1), B, S)
        R = sympy.resultant(G, sympy.Poly(B**q - T, B, S, T), B) if q > 1 else G.as_expr().subs(B, T)
        F = sympy.Poly(sympy.expand(sympy.sympify(R.as_expr() if hasattr(R, "as_expr") else R).subs(T, -s_prev * b)), S, b)
        if len(F.terms()) > term_cap:
            raise DegreeBlowup(f"resultant at index {k - 1} has {len(F.terms())} terms")
    P = sympy.Poly(F.as_expr().subs(b, S + 1), S)
    return [int(c) for c in reversed(P.all_coeffs())]
