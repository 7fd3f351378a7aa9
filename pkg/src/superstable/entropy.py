"""Lap numbers and topological-entropy estimates for ``f_c(x) = |x|^r + c``.

The turning points of ``f^n`` on the invariant interval ``[-beta, beta]`` are
the points whose orbit hits 0 within ``n - 1`` steps, so they are built as a
backward tree from 0.  ``l(f^n) = |T_n| + 1``.
"""

from __future__ import annotations

import io
import math
from bisect import bisect_left
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import gmpy2
import numpy as np
from gmpy2 import mpfr, mpq

from .interval import DEFAULT_PRECISION, RationalExponent

DEFAULT_N = 18


def _ctx(precision):
    return gmpy2.context(gmpy2.get_context(), precision=precision, round=gmpy2.RoundToNearest)


def fixed_point(c, r, precision=DEFAULT_PRECISION):
    """The positive fixed point ``beta`` with ``beta^r + c = beta`` (c <= 0)."""
    r = RationalExponent.parse(r)
    with _ctx(precision):
        c = mpfr(c)
        g = lambda x: gmpy2.rootn(x, r.q) ** r.p + c - x
        lo, hi = mpfr(1), mpfr(2)
        while g(hi) < 0:
            hi *= 2
        if c == 0:
            return mpfr(1)
        for _ in range(precision + 8):
            mid = (lo + hi) / 2
            if mid == lo or mid == hi:
                break
            if g(mid) < 0:
                lo = mid
            else:
                hi = mid
        return hi


def _preimages(ys, c, r):
    """Both preimages of each ``y >= c`` (only ``0`` when ``y == c``)."""
    out = []
    p, q = r.p, r.q
    for y in ys:
        d = y - c
        if d < 0:
            continue
        if d == 0:
            out.append(mpfr(0))
            continue
        if q == 1:
            x = gmpy2.sqrt(d) if p == 2 else gmpy2.rootn(d, p)
        else:
            x = gmpy2.rootn(d, p) ** q
        out.append(x)
        out.append(-x)
    return out


def turning_points(c, r, N, precision=DEFAULT_PRECISION):
    """Sorted turning-point sets ``T_1 .. T_N`` of ``f, f^2, .., f^N``.

    ``T_1 = {0}`` and ``T_{j+1} = {0} + f^{-1}(T_j)``.  Since ``T_j`` is
    contained in ``T_{j+1}``, only preimages of newly added points are
    computed.  Points closer than ``2^(-precision/2)`` are identified.
    """
    r = RationalExponent.parse(r)
    if N < 1:
        raise ValueError("N must be positive")
    tol = mpfr(2) ** (-(precision // 2))
    with _ctx(precision):
        c = mpfr(c)
        current = [mpfr(0)]
        fresh = [mpfr(0)]
        sets = [tuple(current)]
        for _ in range(N - 1):
            added = []
            for x in sorted(_preimages(fresh, c, r)):
                i = bisect_left(current, x)
                if i < len(current) and abs(current[i] - x) <= tol:
                    continue
                if i > 0 and abs(x - current[i - 1]) <= tol:
                    continue
                if added and abs(x - added[-1]) <= tol:
                    continue
                added.append(x)
            if added:
                current = sorted(current + added)
            fresh = added
            sets.append(tuple(current))
    return sets


def lap_counts(c, r, N, precision=DEFAULT_PRECISION):
    """``[l(f^1), .., l(f^N)]`` without keeping every intermediate set."""
    return [len(t) + 1 for t in turning_points(c, r, N, precision)]


@dataclass
class LapSeries:
    """Lap numbers of the first ``N`` iterates at one parameter."""

    r: RationalExponent
    c: mpfr
    N: int
    laps: list
    entropy: float = field(default=float("nan"))

    def check(self):
        """Assert the structural invariants of a lap sequence."""
        assert self.laps[0] == 2
        for a, b in zip(self.laps, self.laps[1:]):
            assert a <= b <= 2 * a, (a, b)


def lap_series(c, r, N=DEFAULT_N, precision=DEFAULT_PRECISION) -> LapSeries:
    r = RationalExponent.parse(r)
    c = mpfr(c, precision)
    series = LapSeries(r, c, N, lap_counts(c, r, N, precision))
    if N >= 2:
        series.entropy = entropy_estimate(series)
    return series


def entropy_estimate(series: LapSeries) -> float:
    """Least-squares slope of ``log l(f^n)`` over ``n`` in ``[ceil(N/2), N]``.

    Negative slopes are clamped to zero.
    """
    N = series.N
    if N < 2:
        raise ValueError("need at least two iterates")
    start = math.ceil(N / 2)
    n = np.arange(start, N + 1, dtype=float)
    laps = np.asarray(series.laps[start - 1 : N], dtype=float)
    # shifting by the first value makes constant runs exactly zero
    y = np.log(laps) - np.log(laps[0])
    dn = n - n.mean()
    slope = float(np.dot(dn, y) / np.dot(dn, dn))
    return max(slope, 0.0)


@dataclass
class ScanResult:
    r: RationalExponent
    N: int
    step: float
    rows: list
    precision: int = DEFAULT_PRECISION

    @property
    def max_violation(self) -> float:
        """Largest increase of the estimate between consecutive ``c`` (>= 0)."""
        e = [row.entropy for row in self.rows]
        return max([0.0] + [b - a for a, b in zip(e, e[1:])])

    def to_csv(self) -> str:
        buf = io.StringIO()
        header = ["c", "entropy"] + [f"laps_{i}" for i in range(1, self.N + 1)]
        buf.write(",".join(header) + "\n")
        for row in self.rows:
            c = format(row.c, ".20g")
            fields = [c, repr(round(row.entropy, 12))] + [str(v) for v in row.laps]
            buf.write(",".join(fields) + "\n")
        return buf.getvalue()


def scan_grid(r, step, precision=DEFAULT_PRECISION):
    """Parameters ``lo, lo + step, ..`` over the scan window, ending at 0."""
    r = RationalExponent.parse(r)
    if not step > 0:
        raise ValueError("grid step must be positive")
    step = mpq(str(step))
    with _ctx(precision):
        left = mpq(-gmpy2.exp2(mpfr(r.q) / (r.p - r.q)))
    grid = []
    i = 0
    while left + i * step < -step / 2**20:
        grid.append(mpfr(left + i * step, precision))
        i += 1
    grid.append(mpfr(0, precision))
    return grid


def _scan_cell(args):
    c, r, N, precision = args
    return lap_series(c, r, N, precision)


def monotonicity_scan(r, step, N=DEFAULT_N, precision=DEFAULT_PRECISION, workers=None) -> ScanResult:
    """Entropy estimates on a grid of ``c`` over the scan window.

    Cells are independent; ``workers > 1`` spreads them over processes.
    The rows are always in increasing ``c``.
    """
    r = RationalExponent.parse(r)
    grid = scan_grid(r, step, precision)
    tasks = [(c, r, N, precision) for c in grid]
    if workers and workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_scan_cell, tasks, chunksize=1))
    else:
        rows = [_scan_cell(t) for t in tasks]
    return ScanResult(r, N, float(step), rows, precision)
