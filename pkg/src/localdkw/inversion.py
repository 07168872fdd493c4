"""Confidence radii from exact exceedance probabilities, tables and bands.

``invert_radius`` returns the smallest ``eps`` (to within ``tol``) whose
exceedance probability is at most ``delta``. The probability is monotone in
``eps`` but has plateaus and jumps, so the search is plain bisection.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _accel
from ._errors import EmptySample, InvalidQuery
from .exact_dkw import FULL, TailSide, UnitInterval, _evaluate, as_interval

EPS_MIN = 1e-12
DEFAULT_TOL = 1e-7


@dataclass(frozen=True)
class RadiusQuery:
    n: int
    delta: float
    interval: UnitInterval = FULL
    tail: TailSide = TailSide.ABOVE
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise InvalidQuery(f"n must be a positive integer, got {self.n!r}")
        if not 0.0 < self.delta < 1.0:
            raise InvalidQuery(f"delta must lie in (0, 1), got {self.delta!r}")
        if not 0.0 < self.tol <= 1e-3:
            raise InvalidQuery(f"tol must lie in (0, 1e-3], got {self.tol!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "interval", as_interval(self.interval))
        object.__setattr__(self, "tail", TailSide.parse(self.tail))


@dataclass(frozen=True)
class RadiusSolution:
    epsilon: float
    saturated: bool
    iterations: int


@lru_cache(maxsize=65536)
def _solve(n, delta, lo, hi, tail, tol):
    interval = UnitInterval(lo, hi)

    def prob(eps):
        return _evaluate(n, eps, interval, tail).probability

    upper = (1.0 - lo) if tail is TailSide.ABOVE else hi
    if upper <= EPS_MIN or prob(EPS_MIN) <= delta:
        return RadiusSolution(EPS_MIN, True, 0)
    # invariant: prob(a) > delta >= prob(b)
    a, b = EPS_MIN, upper
    cap = math.ceil(math.log2(1.0 / tol)) + 4
    it = 0
    while b - a > tol and it < cap:
        mid = 0.5 * (a + b)
        if prob(mid) <= delta:
            b = mid
        else:
            a = mid
        it += 1
    return RadiusSolution(b, False, it)


def solve_radius(query):
    q = query
    return _solve(q.n, float(q.delta), q.interval.lo, q.interval.hi, q.tail, float(q.tol))


def invert_radius(query):
    """Smallest eps with exceedance(n, eps) <= delta, up to ``tol``."""
    return solve_radius(query).epsilon


def radius(n, delta, interval=FULL, tail=TailSide.ABOVE, tol=DEFAULT_TOL):
    """Keyword-friendly wrapper around :func:`invert_radius`."""
    return invert_radius(RadiusQuery(n, delta, interval, tail, tol))


def massart_radius(n, delta):
    """min(sqrt(ln(1/delta) / (2n)), 1); the curve labelled DKW in plots."""
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InvalidQuery(f"n must be a positive integer, got {n!r}")
    if not 0.0 < delta < 1.0:
        raise InvalidQuery(f"delta must lie in (0, 1), got {delta!r}")
    return min(math.sqrt(math.log(1.0 / delta) / (2.0 * n)), 1.0)


@dataclass(frozen=True)
class RadiusTable:
    interval: UnitInterval
    tail: TailSide
    n_values: tuple
    delta_values: tuple
    radii: np.ndarray
    tol: float

    def rows(self):
        for i, n in enumerate(self.n_values):
            for j, d in enumerate(self.delta_values):
                yield n, d, float(self.radii[i, j])

    def meta_line(self):
        return (f"# interval={self.interval.lo:.12g},{self.interval.hi:.12g} "
                f"tail={self.tail.value} tol={self.tol:.12g}")


def _strictly_increasing(values, name):
    vals = list(values)
    if not vals:
        raise InvalidQuery(f"{name} must not be empty")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise InvalidQuery(f"{name} must be strictly increasing")
    return tuple(vals)


def tabulate(n_values, delta_values, interval=FULL, tail=TailSide.ABOVE, tol=DEFAULT_TOL):
    ns = _strictly_increasing(n_values, "n_values")
    ds = _strictly_increasing(delta_values, "delta_values")
    interval, tail = as_interval(interval), TailSide.parse(tail)
    queries = [RadiusQuery(n, d, interval, tail, tol) for n in ns for d in ds]
    workers = min(_accel.thread_count(), len(queries))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            flat = list(pool.map(invert_radius, queries))
    else:
        flat = [invert_radius(q) for q in queries]
    radii = np.array(flat, dtype=float).reshape(len(ns), len(ds))
    return RadiusTable(interval, tail, ns, ds, radii, tol)


@dataclass(frozen=True)
class ConfidenceBand:
    x: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    delta: float
    radius_lower: float
    radius_upper: float
    interval: UnitInterval

    @property
    def knots(self):
        return list(zip(self.x.tolist(), self.lower.tolist(), self.upper.tolist()))


def confidence_band(ecdf, delta, interval=FULL, split=0.5, tol=DEFAULT_TOL):
    """Two-sided band for the true CDF at the levels covered by ``interval``.

    ``split`` is the share of ``delta`` spent on the upper side; the upper
    curve uses the ``BELOW`` radius (controls F - F_n), the lower curve the
    ``ABOVE`` radius. Knots sit at the support endpoints and at each
    distinct sample value; the band is a step function between knots.
    """
    if ecdf.n == 0:
        raise EmptySample("cannot build a band from an empty sample")
    if not 0.0 < delta < 1.0:
        raise InvalidQuery(f"delta must lie in (0, 1), got {delta!r}")
    if not 0.0 < split < 1.0:
        raise InvalidQuery("split must lie in (0, 1)")
    interval = as_interval(interval)
    r_up = invert_radius(RadiusQuery(ecdf.n, delta * split, interval, TailSide.BELOW, tol))
    r_lo = invert_radius(RadiusQuery(ecdf.n, delta * (1.0 - split), interval, TailSide.ABOVE, tol))
    xs = np.unique(np.concatenate(([ecdf.support_lo], ecdf.samples, [ecdf.support_hi])))
    xs = xs[np.isfinite(xs)]
    f = ecdf(xs)
    upper = np.minimum(f + r_up, 1.0)
    lower = np.maximum(f - r_lo, 0.0)
    return ConfidenceBand(xs, lower, upper, float(delta), r_lo, r_up, interval)
