"""Outward-rounded arbitrary-precision interval arithmetic.

Endpoints are MPFR floats (via gmpy2).  Every operation rounds the lower
endpoint toward -inf and the upper endpoint toward +inf, so a result always
encloses the exact value of the operation applied to any points of the
operands.

>>> x = Interval(1) + Interval(2)
>>> x.lo == x.hi == 3
True
>>> Interval(-1, 1) * Interval(-1, 1)
Interval('-1', '1', precision=128)
"""

from __future__ import annotations

import decimal
import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

import gmpy2
from gmpy2 import mpfr, mpq

DEFAULT_PRECISION = 128
MAX_PRECISION = 8192

__all__ = [
    "DEFAULT_PRECISION",
    "MAX_PRECISION",
    "Interval",
    "RationalExponent",
    "rpow",
    "contains_zero",
    "sign_certain",
    "neg_exact",
]


@lru_cache(maxsize=None)
def _down(precision):
    return gmpy2.context(precision=precision, round=gmpy2.RoundDown)


@lru_cache(maxsize=None)
def _up(precision):
    return gmpy2.context(precision=precision, round=gmpy2.RoundUp)


@lru_cache(maxsize=None)
def _near(precision):
    return gmpy2.context(precision=precision, round=gmpy2.RoundToNearest)


def _neg(x):
    # exact: same precision as the operand
    return _down(x.precision).minus(x)


def _abs(x):
    return _down(x.precision).abs(x)


_MPFR, _MPQ, _MPZ = type(mpfr(0)), type(mpq(0)), type(gmpy2.mpz(0))


def _exact(value):
    """Convert a scalar to an exact gmpy2 number (mpfr or mpq)."""
    if isinstance(value, (_MPFR, _MPQ)):
        return value
    if isinstance(value, _MPZ):
        return mpq(value)
    if isinstance(value, bool):
        raise TypeError("booleans are not interval endpoints")
    if isinstance(value, int):
        return mpq(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite endpoint {value!r}")
        return mpq(Fraction(value))
    if isinstance(value, Rational):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        return mpq(Fraction(value.strip()))
    if isinstance(value, decimal.Decimal):
        return mpq(Fraction(value))
    raise TypeError(f"cannot use {type(value).__name__} as an interval endpoint")


class Interval:
    """Closed real interval ``[lo, hi]`` with MPFR endpoints.

    Scalars (int, float, Fraction, decimal strings, mpfr) are accepted for
    either endpoint and rounded outward to ``precision`` bits.  Instances
    are immutable.
    """

    __slots__ = ("lo", "hi", "precision")

    def __init__(self, lo, hi=None, precision=DEFAULT_PRECISION):
        if hi is None:
            hi = lo
        precision = int(precision)
        if precision < 2:
            raise ValueError("precision must be at least 2 bits")
        lo_v = mpfr(_exact(lo), precision, _down(precision))
        hi_v = mpfr(_exact(hi), precision, _up(precision))
        if lo_v > hi_v:
            raise ValueError(f"empty interval [{lo_v}, {hi_v}]")
        object.__setattr__(self, "lo", lo_v)
        object.__setattr__(self, "hi", hi_v)
        object.__setattr__(self, "precision", precision)

    @classmethod
    def _raw(cls, lo, hi, precision):
        # endpoints already rounded outward; skips re-rounding
        self = object.__new__(cls)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "precision", precision)
        return self

    def __setattr__(self, name, value):
        raise AttributeError("Interval is immutable")

    def __reduce__(self):
        return (Interval, (mpq(self.lo), mpq(self.hi), self.precision))

    # ------------------------------------------------------------------ basics

    def at_precision(self, precision):
        """Same interval carried at another working precision (outward)."""
        if precision == self.precision:
            return self
        return Interval(self.lo, self.hi, precision)

    def _coerce(self, other):
        if isinstance(other, Interval):
            return other
        return Interval(other, precision=self.precision)

    def _prec(self, other):
        return max(self.precision, other.precision)

    @property
    def is_point(self):
        return self.lo == self.hi

    def width(self):
        """Upper bound on ``hi - lo``."""
        return _up(self.precision).sub(self.hi, self.lo)

    def mid(self):
        return _near(self.precision + 1).div(_near(self.precision + 1).add(self.lo, self.hi), 2)

    def mag(self):
        """Upper bound on ``max |x|`` over the interval."""
        return max(_abs(self.lo), _abs(self.hi))

    def mig(self):
        """Lower bound on ``min |x|`` over the interval."""
        if self.lo <= 0 <= self.hi:
            return mpfr(0)
        return min(_abs(self.lo), _abs(self.hi))

    def contains(self, value):
        if isinstance(value, Interval):
            return self.lo <= value.lo and value.hi <= self.hi
        v = _exact(value)
        return self.lo <= v <= self.hi

    def contains_zero(self):
        return self.lo <= 0 <= self.hi

    def sign(self):
        """+1 or -1 when the sign is certain, 0 when the interval meets zero."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        return 0

    def overlaps(self, other):
        return self.lo <= other.hi and other.lo <= self.hi

    def hull(self, other):
        p = self._prec(other)
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi), p)

    def intersect(self, other):
        if not self.overlaps(other):
            return None
        p = self._prec(other)
        return Interval(max(self.lo, other.lo), min(self.hi, other.hi), p)

    # -------------------------------------------------------------- arithmetic

    def __neg__(self):
        return Interval._raw(_neg(self.hi), _neg(self.lo), self.precision)

    def __pos__(self):
        return self

    def __add__(self, other):
        other = self._coerce(other)
        p = self._prec(other)
        return Interval._raw(_down(p).add(self.lo, other.lo), _up(p).add(self.hi, other.hi), p)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        p = self._prec(other)
        return Interval._raw(_down(p).sub(self.lo, other.hi), _up(p).sub(self.hi, other.lo), p)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        p = self._prec(other)
        a, b, c, d = self.lo, self.hi, other.lo, other.hi
        if a >= 0 and c >= 0:
            return Interval._raw(_down(p).mul(a, c), _up(p).mul(b, d), p)
        dn, up = _down(p), _up(p)
        pairs = ((a, c), (a, d), (b, c), (b, d))
        lo = min(dn.mul(x, y) for x, y in pairs)
        hi = max(up.mul(x, y) for x, y in pairs)
        return Interval._raw(lo, hi, p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other.contains_zero():
            raise ZeroDivisionError("divisor interval contains zero")
        p = self._prec(other)
        dn, up = _down(p), _up(p)
        pairs = [(x, y) for x in (self.lo, self.hi) for y in (other.lo, other.hi)]
        lo = min(dn.div(x, y) for x, y in pairs)
        hi = max(up.div(x, y) for x, y in pairs)
        return Interval._raw(lo, hi, p)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        p = self.precision
        if n == 0:
            return Interval._raw(mpfr(1), mpfr(1), p)
        if n == 1:
            return self
        if n % 2:
            return Interval._raw(_down(p).pow(self.lo, n), _up(p).pow(self.hi, n), p)
        lo_abs = self.mig()
        hi_abs = self.mag()
        return Interval._raw(_down(p).pow(lo_abs, n), _up(p).pow(hi_abs, n), p)

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Interval._raw(mpfr(0), max(_neg(self.lo), self.hi), self.precision)

    def root(self, k):
        """k-th root of a non-negative interval."""
        if k < 1:
            raise ValueError("root index must be positive")
        if self.lo < 0:
            raise ValueError("root of an interval with negative values")
        if k == 1:
            return self
        p = self.precision
        return Interval._raw(_down(p).rootn(self.lo, k), _up(p).rootn(self.hi, k), p)

    def abs_pow(self, num, den=1):
        """``|x|^(num/den)``: outward den-th root of |x|, then exact num-th power."""
        return abs(self).root(den) ** num

    # ------------------------------------------------------------ presentation

    def decimal_strings(self):
        """Endpoints as decimal strings, rounded outward.

        Enough digits are emitted that parsing the strings back at the same
        precision yields an interval containing this one.
        """
        digits = int(math.ceil(self.precision * math.log10(2))) + 3
        lo = _to_decimal(self.lo, digits, decimal.ROUND_FLOOR)
        hi = _to_decimal(self.hi, digits, decimal.ROUND_CEILING)
        return lo, hi

    def to_dict(self):
        lo, hi = self.decimal_strings()
        return {"lo": lo, "hi": hi, "precision": self.precision}

    @classmethod
    def from_dict(cls, data):
        return cls(data["lo"], data["hi"], int(data.get("precision", DEFAULT_PRECISION)))

    def __float__(self):
        return float(self.mid())

    def __repr__(self):
        lo, hi = self.decimal_strings()
        return f"Interval({_short(lo)!r}, {_short(hi)!r}, precision={self.precision})"

    def __eq__(self, other):
        if not isinstance(other, Interval):
            return NotImplemented
        return self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return hash((mpq(self.lo), mpq(self.hi)))


def _to_decimal(x, digits, rounding):
    if x == 0:
        return "0"
    q = mpq(x)
    ctx = decimal.Context(prec=digits, rounding=rounding, Emax=10**9, Emin=-(10**9))
    d = ctx.divide(decimal.Decimal(int(q.numerator)), decimal.Decimal(int(q.denominator)))
    text = format(d.normalize(ctx), "f") if -30 < d.adjusted() < 30 else format(d.normalize(ctx), "e")
    return text


def _short(text):
    return text if len(text) <= 24 else text[:22] + "..."


class RationalExponent:
    """The exponent ``r = p/q`` of ``|x|^r + c``, with ``p > q >= 1`` coprime."""

    __slots__ = ("p", "q")

    def __init__(self, p, q=1):
        p, q = int(p), int(q)
        if q < 1 or p < 1:
            raise ValueError("p and q must be positive")
        if math.gcd(p, q) != 1:
            raise ValueError(f"{p}/{q} is not in lowest terms")
        if p <= q:
            raise ValueError(f"r = {p}/{q} must exceed 1")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    def __setattr__(self, name, value):
        raise AttributeError("RationalExponent is immutable")

    def __reduce__(self):
        return (RationalExponent, (self.p, self.q))

    @classmethod
    def parse(cls, text):
        """Parse ``"p/q"`` or ``"p"``; non-reduced fractions are reduced."""
        if isinstance(text, RationalExponent):
            return text
        frac = Fraction(str(text).strip())
        return cls(frac.numerator, frac.denominator)

    @property
    def fraction(self):
        return Fraction(self.p, self.q)

    def __float__(self):
        return self.p / self.q

    def __eq__(self, other):
        return isinstance(other, RationalExponent) and (self.p, self.q) == (other.p, other.q)

    def __hash__(self):
        return hash((self.p, self.q))

    def __str__(self):
        return f"{self.p}/{self.q}"

    def __repr__(self):
        return f"RationalExponent({self.p}, {self.q})"

    def to_dict(self):
        return {"p": self.p, "q": self.q}

    @classmethod
    def from_dict(cls, data):
        return cls(data["p"], data["q"])


def rpow(x: Interval, r: RationalExponent) -> Interval:
    """Enclosure of ``|x|^(p/q)``."""
    return x.abs_pow(r.p, r.q)


def contains_zero(x: Interval) -> bool:
    return x.contains_zero()


def sign_certain(x: Interval) -> int:
    """-1 or +1 when certain, 0 for unknown."""
    return x.sign()


def neg_exact(x):
    """Exact negation of an mpfr, immune to the global gmpy2 context."""
    return _neg(x)
