"""Sparse multivariate polynomials with arbitrary-precision integer coefficients."""

from __future__ import annotations

from math import comb

from gmpy2 import mpq

from .errors import DegreeBlowup
from .interval import DEFAULT_PRECISION, Interval

DEFAULT_TERM_CAP = 5_000_000


class IntPoly:
    """Polynomial over Z stored as ``{exponent tuple: int}``.

    ``gens`` names the variables in exponent order.  Zero coefficients are
    never stored.  Instances are treated as immutable.

    >>> S, T = IntPoly.gens_of(("S", "T"))
    >>> str((S + 1) ** 2 * T)
    'S^2*T + 2*S*T + T'
    """

    __slots__ = ("gens", "terms")

    def __init__(self, terms=None, gens=("S",)):
        self.gens = tuple(gens)
        if terms is None:
            terms = {}
        self.terms = {k: v for k, v in terms.items() if v}

    # ----------------------------------------------------------- construction

    @classmethod
    def constant(cls, value, gens):
        value = int(value)
        return cls({(0,) * len(gens): value} if value else {}, gens)

    @classmethod
    def gen(cls, name, gens):
        idx = gens.index(name)
        exp = tuple(1 if i == idx else 0 for i in range(len(gens)))
        return cls({exp: 1}, gens)

    @classmethod
    def gens_of(cls, gens):
        return tuple(cls.gen(g, gens) for g in gens)

    @classmethod
    def monomial(cls, coeff, exps, gens):
        return cls({tuple(exps): int(coeff)}, gens)

    @classmethod
    def from_coeffs(cls, coeffs, gen="S"):
        """Univariate polynomial from an ascending coefficient list."""
        return cls({(i,): int(c) for i, c in enumerate(coeffs)}, (gen,))

    # ------------------------------------------------------------ arithmetic

    def _lift(self, other):
        if isinstance(other, IntPoly):
            if other.gens != self.gens:
                raise ValueError(f"generator mismatch: {self.gens} vs {other.gens}")
            return other
        return IntPoly.constant(other, self.gens)

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return IntPoly(out, self.gens)

    __radd__ = __add__

    def __neg__(self):
        return IntPoly({k: -v for k, v in self.terms.items()}, self.gens)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, IntPoly):
            other = int(other)
            return IntPoly({k: v * other for k, v in self.terms.items()}, self.gens)
        other = self._lift(other)
        if len(self.terms) > len(other.terms):
            big, small = self.terms, other.terms
        else:
            big, small = other.terms, self.terms
        out = {}
        get = out.get
        nvars = len(self.gens)
        if nvars == 1:
            for (i,), u in small.items():
                for (j,), v in big.items():
                    k = (i + j,)
                    out[k] = get(k, 0) + u * v
        elif nvars == 2:
            for (i1, i2), u in small.items():
                for (j1, j2), v in big.items():
                    k = (i1 + j1, i2 + j2)
                    out[k] = get(k, 0) + u * v
        else:
            for ka, u in small.items():
                for kb, v in big.items():
                    k = tuple(x + y for x, y in zip(ka, kb))
                    out[k] = get(k, 0) + u * v
        return IntPoly(out, self.gens)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = IntPoly.constant(1, self.gens)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, int):
            other = IntPoly.constant(other, self.gens)
        if not isinstance(other, IntPoly):
            return NotImplemented
        return self.gens == other.gens and self.terms == other.terms

    def __hash__(self):
        return hash((self.gens, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    # -------------------------------------------------------------- queries

    def is_zero(self):
        return not self.terms

    def degree(self, var=None):
        """Degree in ``var`` (a generator name), or total degree."""
        if not self.terms:
            return -1
        if var is None:
            return max(sum(k) for k in self.terms)
        idx = self.gens.index(var)
        return max(k[idx] for k in self.terms)

    def max_exponents(self):
        """Componentwise maximum exponent vector."""
        if not self.terms:
            return None
        return tuple(max(k[i] for k in self.terms) for i in range(len(self.gens)))

    def coeff(self, exps):
        return self.terms.get(tuple(exps), 0)

    def content(self):
        from math import gcd

        g = 0
        for v in self.terms.values():
            g = gcd(g, v)
        return g

    def check_size(self, cap=DEFAULT_TERM_CAP, label="polynomial"):
        if len(self.terms) > cap:
            raise DegreeBlowup(f"{label} has {len(self.terms)} terms (cap {cap})")
        return self

    # ------------------------------------------------------ transformations

    def to_coeffs(self):
        """Ascending dense coefficient list of a univariate polynomial."""
        if len(self.gens) != 1:
            raise ValueError("to_coeffs needs a univariate polynomial")
        if not self.terms:
            return [0]
        out = [0] * (self.degree() + 1)
        for (i,), v in self.terms.items():
            out[i] = v
        return out

    def map_terms(self, fn, gens):
        """Apply ``fn(exps, coeff) -> iterable of (exps, coeff)`` and collect."""
        out = {}
        for k, v in self.terms.items():
            for k2, v2 in fn(k, v):
                out[k2] = out.get(k2, 0) + v2
        return IntPoly(out, gens)

    def evaluate(self, values):
        """Evaluate at Interval (or int) values given as ``{gen: value}``."""
        pts = [values[g] for g in self.gens]
        cache = [dict() for _ in self.gens]

        def power(i, e):
            c = cache[i]
            if e not in c:
                c[e] = pts[i] ** e
            return c[e]

        total = None
        for k, v in self.terms.items():
            term = None
            for i, e in enumerate(k):
                if e:
                    term = power(i, e) if term is None else term * power(i, e)
            if term is None:
                term = v
            else:
                term = term * v
            total = term if total is None else total + term
        if not isinstance(total, Interval):
            precs = [v.precision for v in pts if isinstance(v, Interval)]
            total = Interval(total or 0, precision=max(precs, default=DEFAULT_PRECISION))
        return total

    def diff(self, var):
        idx = self.gens.index(var)
        out = {}
        for k, v in self.terms.items():
            e = k[idx]
            if e:
                k2 = k[:idx] + (e - 1,) + k[idx + 1 :]
                out[k2] = v * e
        return IntPoly(out, self.gens)

    def exact_value(self, point):
        """Exact rational value at ``{gen: mpq}``."""
        pts = [point[g] for g in self.gens]
        total = mpq(0)
        powers = [dict() for _ in self.gens]
        for k, v in self.terms.items():
            term = mpq(v)
            for i, e in enumerate(k):
                if e:
                    cache = powers[i]
                    if e not in cache:
                        cache[e] = pts[i] ** e
                    term *= cache[e]
            total += term
        return total

    def centered_evaluate(self, values) -> Interval:
        """Mean-value enclosure ``P(m) + sum_i dP/dx_i(X) (X_i - m_i)``.

        ``P(m)`` is computed exactly at the box midpoint, so the enclosure is
        centred on the polynomial's true value there even when plain interval
        evaluation suffers from cancellation.
        """
        prec = max(v.precision for v in values.values())
        mids = {g: mpq(values[g].mid()) for g in self.gens}
        total = Interval(self.exact_value(mids), precision=prec)
        for g in self.gens:
            x = values[g]
            if x.is_point:
                continue
            d = self.diff(g)
            if not d:
                continue
            offset = x - Interval(mids[g], precision=prec)
            total = total + d.evaluate(values) * offset
        return total

    def horner(self, x: Interval) -> Interval:
        """Interval Horner evaluation of a univariate polynomial."""
        coeffs = self.to_coeffs()
        acc = Interval(coeffs[-1], precision=x.precision)
        for c in reversed(coeffs[:-1]):
            acc = acc * x + c
        return acc

    # ------------------------------------------------------------- display

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]), reverse=True)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for k, v in self.sorted_terms():
            mono = "*".join(
                g if e == 1 else f"{g}^{e}" for g, e in zip(self.gens, k) if e
            )
            if not mono:
                body = str(abs(v))
            elif abs(v) == 1:
                body = mono
            else:
                body = f"{abs(v)}*{mono}"
            sign = "-" if v < 0 else "+"
            parts.append((sign, body))
        first_sign, first = parts[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self):
        return f"IntPoly({str(self)!r}, gens={self.gens})"


def binomial_row(n):
    return [comb(n, i) for i in range(n + 1)]
