"""Superstable parameters of ``f_c(x) = |x|^r + c``: certified location,
transversality, monic integer certificates and lap-number entropy."""

from .dynamics import (
    CriticalOrbit,
    PeriodicPair,
    TransversalityReport,
    critical_orbit,
    derivative_recursion,
    find_all,
    find_superstable,
    refine_pair,
    scan_window,
    spatial_derivative,
    verify_transversality,
)
from .entropy import LapSeries, entropy_estimate, lap_series, monotonicity_scan, turning_points
from .errors import (
    DegreeBlowup,
    DominanceViolation,
    PrecisionExhausted,
    SignUndecidable,
    SuperstableError,
    WindowTooCoarse,
)
from .interval import Interval, RationalExponent
from .polynomial import IntPoly
from .symbolic import Certificate, b_recursion_integer, certify, resultant_oracle

__version__ = "0.1.0"
