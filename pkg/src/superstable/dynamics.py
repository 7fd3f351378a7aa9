"""Critical orbits, parameter derivatives and superstable parameters of
``f_c(x) = |x|^r + c``.

All statements made here are certified with :class:`Interval` enclosures:
signs are reported only when an enclosure excludes zero, roots are returned
only inside brackets whose endpoint signs are certified, and uniqueness of a
root in a bracket is certified through a derivative enclosure.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .errors import PrecisionExhausted, SignUndecidable, WindowTooCoarse
from .interval import DEFAULT_PRECISION, MAX_PRECISION, Interval, RationalExponent, neg_exact, rpow

logger = logging.getLogger(__name__)

# Grid offset (fractional golden ratio) keeps sample points away from the
# simple rational superstable parameters c = 0 and c = -1.
_GRID_PHASE = 0.3819660112501051
_MAX_GRID = 10**6
_MAX_ISOLATION_DEPTH = 48


@dataclass(frozen=True)
class CriticalOrbit:
    """The orbit ``xi_j = f_c^j(0)``, j = 1..n, and its sign sequence.

    ``signs[j-1]`` is the certified sign of ``xi_j`` for ``j < n``.
    """

    r: RationalExponent
    c: Interval
    n: int
    xi: tuple
    signs: tuple


@dataclass(frozen=True)
class PeriodicPair:
    """A certified superstable parameter of primitive period ``n``.

    ``c`` is an isolating interval: ``f_c^n(0)`` changes sign across it and
    is monotone on it.
    """

    r: RationalExponent
    c: Interval
    n: int
    orbit: CriticalOrbit
    trivial: bool = False

    @property
    def signs(self):
        return self.orbit.signs

    def to_dict(self):
        lo, hi = self.c.decimal_strings()
        return {
            "r": self.r.to_dict(),
            "n": self.n,
            "c_lo": lo,
            "c_hi": hi,
            "precision": self.c.precision,
            "signs": list(self.signs),
            "trivial": self.trivial,
        }

    @classmethod
    def from_dict(cls, data):
        """Rebuild a pair from :meth:`to_dict` output, re-certifying its orbit."""
        r = RationalExponent.from_dict(data["r"])
        n = int(data["n"])
        c = Interval(data["c_lo"], data["c_hi"], int(data.get("precision", DEFAULT_PRECISION)))
        orbit = critical_orbit(c, r, n)
        stored = tuple(int(s) for s in data.get("signs", orbit.signs))
        if stored != orbit.signs:
            raise ValueError(f"stored signs {stored} disagree with recomputed {orbit.signs}")
        return cls(r, c, n, orbit, bool(data.get("trivial", False)))


@dataclass(frozen=True)
class DerivativeTerms:
    """``D = D_c f_c^n(0)``, ``scaled_D = q^(n-1) D`` and ``A = A_{n-1}``."""

    D: Interval
    scaled_D: Interval
    A: Interval
    history: tuple = field(repr=False, default=())


@dataclass(frozen=True)
class TransversalityReport:
    pair: PeriodicPair
    D: Interval
    scaled_D: Interval
    A: Interval
    spatial_derivative: Interval
    ratio_sign: int

    def identity_sides(self):
        """The two enclosures of ``q^(n-1) D`` that must intersect."""
        r, n = self.pair.r, self.pair.n
        return self.scaled_D, self.A * r.p + r.q ** (n - 1)

    def identity_holds(self):
        left, right = self.identity_sides()
        return left.overlaps(right)

    def identity_gap(self):
        """Width of the hull of both sides of the identity."""
        left, right = self.identity_sides()
        return left.hull(right).width()

    def to_dict(self):
        return {
            "pair": self.pair.to_dict(),
            "D": self.D.to_dict(),
            "D_sign": self.D.sign(),
            "scaled_D": self.scaled_D.to_dict(),
            "A": self.A.to_dict(),
            "spatial_derivative": self.spatial_derivative.to_dict(),
            "ratio_sign": self.ratio_sign,
            "identity_holds": self.identity_holds(),
            "transversal": self.D.sign() != 0,
        }


# --------------------------------------------------------------------------
# orbit evaluation


def _iterate(c, r, n):
    xi = [c]
    for _ in range(n - 1):
        xi.append(rpow(xi[-1], r) + c)
    return xi


def critical_value(c, r, n, precision=DEFAULT_PRECISION):
    """Enclosure of ``f_c^n(0)``; ``c`` may be a scalar or an Interval."""
    if not isinstance(c, Interval):
        c = Interval(c, precision=precision)
    return _iterate(c, r, n)[-1]


def critical_orbit(c: Interval, r: RationalExponent, n: int, max_precision=MAX_PRECISION) -> CriticalOrbit:
    """Orbit of the critical point with certified signs s_1..s_{n-1}.

    Precision is doubled while that keeps tightening the offending orbit
    point; a straddling enclosure that precision cannot fix raises
    :class:`SignUndecidable`.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    prec = c.precision
    last_width = None
    while True:
        xi = _iterate(c.at_precision(prec), r, n)
        bad = next((j for j in range(n - 1) if xi[j].sign() == 0), None)
        if bad is None:
            return CriticalOrbit(r, c, n, tuple(xi), tuple(x.sign() for x in xi[:-1]))
        width = xi[bad].width()
        stalled = last_width is not None and width > last_width / 2
        if prec * 2 > max_precision or stalled or width == 0:
            raise SignUndecidable(bad + 1)
        last_width = width
        prec *= 2


def _abs_pow_deriv_factor(x, r):
    """Enclosure of d/dx |x|^r = r |x|^(r-1) sgn(x) over ``x``."""
    mag = x.abs_pow(r.p - r.q, r.q) * Fraction(r.p, r.q)
    s = x.sign()
    if s:
        return mag * s
    return Interval._raw(neg_exact(mag.hi), mag.hi, mag.precision)


def derivative_enclosure(c: Interval, r: RationalExponent, n: int):
    """Enclosures of ``f_c^n(0)`` and ``D_c f_c^n(0)`` over a c-interval.

    Valid without sign certainty: where an orbit point straddles zero the
    chain-rule factor is enclosed by ``[-M, M]``, which is sound because
    ``|x|^r`` is C^1 for r > 1.
    """
    xi = c
    d = Interval(1, precision=c.precision)
    for _ in range(n - 1):
        d = _abs_pow_deriv_factor(xi, r) * d + 1
        xi = rpow(xi, r) + c
    return xi, d


def derivative_recursion(orbit: CriticalOrbit) -> DerivativeTerms:
    """Run ``D_1 = 1, D_{j+1} = r (s_j xi_j)^(r-1) s_j D_j + 1``."""
    r, n = orbit.r, orbit.n
    prec = orbit.c.precision
    ratio = Interval(Fraction(r.p, r.q), precision=prec)
    ds = [Interval(1, precision=prec)]
    for j in range(n - 1):
        s = orbit.signs[j]
        if s == 0:
            raise SignUndecidable(j + 1)
        ds.append(ratio * orbit.xi[j].abs_pow(r.p - r.q, r.q) * ds[-1] * s + 1)
    D = ds[-1]
    scaled = D * r.q ** (n - 1)
    if n == 1:
        A = Interval(0, precision=prec)
    else:
        s = orbit.signs[n - 2]
        A = orbit.xi[n - 2].abs_pow(r.p - r.q, r.q) * (ds[n - 2] * r.q ** (n - 2) * s)
    return DerivativeTerms(D, scaled, A, tuple(ds))


def spatial_derivative(orbit: CriticalOrbit) -> Interval:
    """``(f_c^{n-1})'(c)``: product of ``r |xi_j|^(r-1) s_j`` over j < n."""
    r = orbit.r
    prec = orbit.c.precision
    ratio = Interval(Fraction(r.p, r.q), precision=prec)
    out = Interval(1, precision=prec)
    for j in range(orbit.n - 1):
        s = orbit.signs[j]
        if s == 0:
            raise SignUndecidable(j + 1)
        out = out * ratio * orbit.xi[j].abs_pow(r.p - r.q, r.q) * s
    return out


def scan_window(r: RationalExponent, precision=DEFAULT_PRECISION) -> Interval:
    """``[-2^(q/(p-q)), 0]``: from the full map to the trivial parameter."""
    lo = Interval(2, precision=precision).root(r.p - r.q) ** r.q
    return Interval._raw(neg_exact(lo.hi), mpfr(0), precision)


# --------------------------------------------------------------------------
# root finding


def _point_sign(value, r, n, precision):
    """Certified sign of ``f_c^n(0)`` at a point, with a short precision ladder."""
    for prec in (precision, 2 * precision, 4 * precision):
        s = critical_value(Interval(value, precision=prec), r, n).sign()
        if s:
            return s
    return 0


def _signed_point(value, r, n, precision, nudge):
    s = _point_sign(value, r, n, precision)
    tries = 0
    while s == 0 and tries < 8:
        # the point sits on a root to within the working precision
        value = _near(precision).add(value, nudge)
        nudge *= 3
        s = _point_sign(value, r, n, precision)
        tries += 1
    return value, s


def _near(precision):
    return gmpy2.context(precision=precision, round=gmpy2.RoundToNearest)


def _isolate(a, sa, b, sb, r, n, precision, depth=0):
    """Split ``[a, b]`` until every piece is certified monotone; yield the
    pieces carrying a sign change."""
    _, d = derivative_enclosure(Interval(a, b, precision), r, n)
    if d.sign():
        if sa != sb:
            yield a, sa, b, sb
        return
    if depth >= _MAX_ISOLATION_DEPTH:
        raise WindowTooCoarse(
            f"could not isolate roots of f_c^{n}(0) in [{float(a)!r}, {float(b)!r}] for r={r}"
        )
    m = _near(precision + 2).div(_near(precision + 2).add(a, b), 2)
    m, sm = _signed_point(m, r, n, precision, (b - a) * mpfr(2) ** -30)
    yield from _isolate(a, sa, m, sm, r, n, precision, depth + 1)
    yield from _isolate(m, sm, b, sb, r, n, precision, depth + 1)


def _bisect(a, sa, b, sb, r, n, precision, width):
    ctx = _near(precision)
    while b - a > width:
        m = ctx.div(ctx.add(a, b), 2)
        if m <= a or m >= b:
            break
        sm = _point_sign(m, r, n, precision)
        if sm == 0:
            # m is a root to working precision; shrink around it
            delta = (b - a) / 4
            lo, slo = _signed_point(ctx.sub(m, delta), r, n, precision, delta / 16)
            hi, shi = _signed_point(ctx.add(m, delta), r, n, precision, delta / 16)
            if slo == sa and shi == sb and a < lo < hi < b:
                a, b = lo, hi
                continue
            break
        if sm == sa:
            a = m
        else:
            b = m
    return a, b


def _default_width(precision):
    return mpfr(2) ** -(precision - 24)


def _divisors(n):
    return [d for d in range(1, n) if n % d == 0]


def default_grid_resolution(n):
    return min(10 * 4**n, _MAX_GRID)


@dataclass
class SearchResult:
    """Pairs found for one period plus non-fatal diagnostics."""

    pairs: list
    warnings: list


def find_superstable(
    r: RationalExponent,
    n: int,
    window: Interval | None = None,
    grid_resolution: int | None = None,
    precision: int = DEFAULT_PRECISION,
    width=None,
) -> SearchResult:
    """Locate all superstable parameters of primitive period ``n`` in ``window``.

    A float64 grid proposes sign changes of ``g(c) = f_c^n(0)``; each
    bracketing cell is certified with interval evaluations, split until the
    root is unique (monotone piece), bisected to ``width``, and kept only if
    no proper divisor ``d`` of ``n`` has ``f_c^d(0)`` enclosing zero.
    """
    r = RationalExponent.parse(r)
    if n < 1:
        raise ValueError("n must be at least 1")
    if window is None:
        window = scan_window(r)
    if grid_resolution is None:
        grid_resolution = default_grid_resolution(n)
    width = _default_width(precision) if width is None else mpfr(width)
    lo_f, hi_f = float(window.lo), float(window.hi)
    step = (hi_f - lo_f) / grid_resolution
    # one extra point beyond the right edge so a root at hi (c = 0) is bracketed
    grid = lo_f + (np.arange(grid_resolution + 1) + _GRID_PHASE) * step
    g = np.zeros_like(grid)
    rf = float(r)
    for _ in range(n):
        g = np.abs(g) ** rf + grid
    sg = np.where(g >= 0, 1, -1)
    warnings = []
    cells = np.nonzero(sg[:-1] != sg[1:])[0]

    interior = np.arange(1, len(g) - 1)
    ag = np.abs(g)
    local_min = (ag[interior] < ag[interior - 1]) & (ag[interior] < ag[interior + 1])
    same_sign = (sg[interior] == sg[interior - 1]) & (sg[interior] == sg[interior + 1])
    variation = np.maximum(np.abs(g[interior + 1] - g[interior]), np.abs(g[interior - 1] - g[interior]))
    suspicious = interior[local_min & same_sign & (ag[interior] <= variation)]
    for i in suspicious:
        warnings.append(
            f"n={n}: near-zero minimum |f_c^n(0)|={ag[i]:.3e} without sign change near c={grid[i]:.12g}"
        )

    found = []
    for i in cells:
        a, b = mpfr(float(grid[i])), mpfr(float(grid[i + 1]))
        nudge = (b - a) * mpfr(2) ** -40
        a, sa = _signed_point(a, r, n, precision, -nudge)
        b, sb = _signed_point(b, r, n, precision, nudge)
        if sa == sb or not sa or not sb:
            warnings.append(
                f"n={n}: float sign change near c={grid[i]:.12g} not confirmed by interval evaluation"
            )
            continue
        pieces = list(_isolate(a, sa, b, sb, r, n, precision))
        if len(pieces) > 1:
            warnings.append(f"n={n}: {len(pieces)} roots isolated inside one grid cell near c={grid[i]:.12g}")
        for pa, psa, pb, psb in pieces:
            lo, hi = _bisect(pa, psa, pb, psb, r, n, precision, width)
            pair = _make_pair(r, n, lo, hi, precision)
            if pair is not None:
                found.append(pair)
    return SearchResult(_dedupe(found), warnings)


def _make_pair(r, n, lo, hi, precision):
    c = Interval(lo, hi, precision)
    if n == 1:
        # f_c(0) = c vanishes only at c = 0
        c = Interval(0, precision=precision)
        return PeriodicPair(r, c, 1, critical_orbit(c, r, 1), trivial=True)
    xi = _iterate(c, r, n)
    if any(xi[d - 1].contains_zero() for d in _divisors(n)):
        return None
    orbit = critical_orbit(c, r, n)
    if c.sign() != -1:
        raise AssertionError(f"non-trivial superstable parameter not certified negative: {c!r}")
    return PeriodicPair(r, c, n, orbit)


def _dedupe(pairs):
    pairs = sorted(pairs, key=lambda p: (p.c.lo, p.c.hi))
    out = []
    for p in pairs:
        if out and out[-1].c.overlaps(p.c):
            if p.c.width() < out[-1].c.width():
                out[-1] = p
            continue
        out.append(p)
    return out


def find_all(r, max_period, grid_resolution=None, precision=DEFAULT_PRECISION):
    """:func:`find_superstable` for n = 1..max_period, merged and sorted."""
    r = RationalExponent.parse(r)
    pairs, warnings = [], []
    for n in range(1, max_period + 1):
        res = find_superstable(r, n, grid_resolution=grid_resolution, precision=precision)
        pairs.extend(res.pairs)
        warnings.extend(res.warnings)
    pairs.sort(key=lambda p: (p.n, p.c.lo))
    return SearchResult(pairs, warnings)


# --------------------------------------------------------------------------
# refinement and transversality


def refine_pair(pair: PeriodicPair, precision: int, width=None) -> PeriodicPair:
    """Re-isolate ``pair.c`` at ``precision`` bits down to ``width``."""
    if pair.trivial:
        c = pair.c.at_precision(precision)
        return PeriodicPair(pair.r, c, pair.n, critical_orbit(c, pair.r, pair.n), True)
    r, n = pair.r, pair.n
    width = _default_width(precision) if width is None else mpfr(width)
    a, b = pair.c.lo, pair.c.hi
    sa = _point_sign(a, r, n, precision)
    sb = _point_sign(b, r, n, precision)
    if not sa or not sb or sa == sb:
        raise PrecisionExhausted(f"isolating interval of the period-{n} pair lost its sign change")
    lo, hi = _bisect(a, sa, b, sb, r, n, precision, width)
    c = Interval(lo, hi, precision)
    return PeriodicPair(r, c, n, critical_orbit(c, r, n), pair.trivial)


def transversality_report(pair: PeriodicPair) -> TransversalityReport:
    """Report at the pair's current isolation, without refinement."""
    terms = derivative_recursion(pair.orbit)
    spatial = spatial_derivative(pair.orbit)
    return TransversalityReport(
        pair, terms.D, terms.scaled_D, terms.A, spatial, spatial.sign() * terms.D.sign()
    )


def verify_transversality(pair: PeriodicPair, max_precision=MAX_PRECISION) -> TransversalityReport:
    """Certify ``D_c f_c^n(0) != 0``, refining isolation and precision as needed."""
    prec = pair.c.precision
    while True:
        report = transversality_report(pair)
        if report.D.sign():
            return report
        if prec * 2 > max_precision:
            raise PrecisionExhausted(
                f"D_c f_c^{pair.n}(0) still encloses 0 at {prec} bits for r={pair.r}, c~{float(pair.c)!r}"
            )
        prec *= 2
        logger.debug("raising precision to %d bits for period-%d pair", prec, pair.n)
        pair = refine_pair(pair, prec)
