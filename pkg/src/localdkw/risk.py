"""Empirical CDFs, CVaR estimates and confidence bounds for CDF functionals.

Conventions
-----------
Reward side, level ``alpha``: CVaR is the mean of the lower ``alpha`` tail,
``sup_x { x + E[min(X - x, 0)] / alpha }``.
Loss side, level ``kappa``: CVaR is the mean of the upper ``1 - kappa``
tail, ``inf_x { x + E[max(X - x, 0)] / (1 - kappa) }``.

On a support ``[a, b]`` both have integrated forms that only involve the
CDF::

    reward:  a + (1/alpha)     * int_a^b (alpha - F(x))_+ dx
    loss:    b - (1/(1-kappa)) * int_a^b (F(x) - kappa)_+ dx

They hold for any distribution on ``[a, b]``, atoms included. All integrals
below are exact sums over the steps of the empirical CDF.
"""
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ._errors import (
    EmptySample,
    InvalidLedger,
    InvalidQuery,
    NegativeSupport,
    PartitionIncompatible,
    SupportViolation,
    UnboundedSupport,
)
from .exact_dkw import TailSide, UnitInterval
from .inversion import DEFAULT_TOL, RadiusQuery, invert_radius

_BREAK_TOL = 1e-12


@dataclass(frozen=True)
class EmpiricalCdf:
    samples: np.ndarray
    support_lo: float = -math.inf
    support_hi: float = math.inf

    @property
    def n(self):
        return int(self.samples.size)

    def __call__(self, x):
        """F_n(x) = #{X_i <= x} / n; accepts scalars or arrays."""
        counts = np.searchsorted(self.samples, x, side="right")
        if np.ndim(counts) == 0:
            return int(counts) / self.n
        return counts / self.n

    def left_limit(self, x):
        return int(np.searchsorted(self.samples, x, side="left")) / self.n

    def atom(self, x):
        return self(x) - self.left_limit(x)

    def bounded(self):
        return math.isfinite(self.support_lo) and math.isfinite(self.support_hi)


def make_ecdf(samples, support=(-math.inf, math.inf)):
    xs = np.sort(np.asarray(samples, dtype=float).ravel())
    if xs.size == 0:
        raise EmptySample("need at least one observation")
    if not np.all(np.isfinite(xs)):
        raise InvalidQuery("observations must be finite")
    a, b = (float(v) for v in support)
    if not a <= b:
        raise SupportViolation(f"support ({a}, {b}) is empty")
    if xs[0] < a or xs[-1] > b:
        raise SupportViolation(f"observations outside the declared support ({a}, {b})")
    xs.setflags(write=False)
    return EmpiricalCdf(xs, a, b)


def read_samples(path):
    """Read one real per line; an optional first line ``# support=a,b``.

    Blank lines and other ``#`` comments are ignored. Returns
    ``(values, support_or_None)``.
    """
    support = None
    values = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            text = line.strip()
            if not text:
                continue
            if text.startswith("#"):
                body = text[1:].strip()
                if i == 0 and body.startswith("support="):
                    try:
                        a, b = body[len("support="):].split(",")
                        support = (float(a), float(b))
                    except ValueError:
                        raise InvalidQuery(f"bad support directive: {text!r}") from None
                continue
            try:
                values.append(float(text))
            except ValueError:
                raise InvalidQuery(f"line {i + 1}: not a number: {text!r}") from None
    return values, support


# -- step-function integration ---------------------------------------------


def _step_integral(ecdf, h, lo=None, hi=None):
    """Exact int_lo^hi h(F_n(x)) dx for a vectorised ``h``."""
    lo = ecdf.support_lo if lo is None else lo
    hi = ecdf.support_hi if hi is None else hi
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise UnboundedSupport("integrals need a finite support")
    if hi <= lo:
        return 0.0
    s = ecdf.samples
    inner = np.unique(s[(s > lo) & (s < hi)])
    knots = np.concatenate(([lo], inner, [hi]))
    widths = np.diff(knots)
    values = np.asarray(h(ecdf(knots[:-1])), dtype=float)
    return math.fsum((widths * values).tolist())


def _require_bounded(ecdf):
    if not ecdf.bounded():
        raise UnboundedSupport("this form needs a finite support (a, b)")
    if ecdf.support_lo < 0:
        raise NegativeSupport("this form needs a nonnegative support (a >= 0)")


def _check_level(level, name="level"):
    if not 0.0 < level < 1.0:
        raise InvalidQuery(f"{name} must lie in (0, 1), got {level!r}")


# -- value at risk ---------------------------------------------------------


def value_at_risk(ecdf, level, which="lower"):
    """Generalised inverse of the step CDF.

    ``which='upper'``: inf{x : F_n(x) > level}; ``'lower'``: inf{x : F_n(x) >= level}.
    """
    _check_level(level)
    s = ecdf.samples
    f = np.searchsorted(s, s, side="right") / ecdf.n
    if which == "upper":
        idx = int(np.argmax(f > level))
    elif which == "lower":
        idx = int(np.argmax(f >= level))
    else:
        raise InvalidQuery("which must be 'upper' or 'lower'")
    return float(s[idx])


# -- CVaR point estimates --------------------------------------------------


def cvar_reward_point(ecdf, alpha):
    """Lower-tail CVaR of the empirical law via the optimisation form.

    The optimiser x* is the lower VaR at ``alpha`` and satisfies
    F(x*) - P(X = x*) <= alpha <= F(x*).
    """
    _check_level(alpha, "alpha")
    x_star = value_at_risk(ecdf, alpha, "lower")
    s = ecdf.samples
    below = math.fsum(s[s < x_star].tolist()) / ecdf.n
    f_left = ecdf.left_limit(x_star)
    return (below + x_star * (alpha - f_left)) / alpha


def cvar_loss_point(ecdf, kappa):
    """Upper-tail CVaR of the empirical law via the optimisation form."""
    _check_level(kappa, "kappa")
    tail = 1.0 - kappa
    x_star = value_at_risk(ecdf, kappa, "lower")
    s = ecdf.samples
    above = math.fsum(s[s > x_star].tolist()) / ecdf.n
    return (above + x_star * (ecdf(x_star) - kappa)) / tail


def cvar_integrated_point(ecdf, level, side="reward"):
    """Integrated form anchored at the optimiser x*, with atoms handled exactly.

    reward: [a F(x*-) + int_a^b (F(x*-) - F)_+ + x*(alpha - F(x*-))] / alpha
    loss:   [b (1 - F(x*)) - int_a^b (F - F(x*))_+ + x*(F(x*) - kappa)] / (1 - kappa)
    """
    _check_level(level)
    _require_bounded(ecdf)
    a, b = ecdf.support_lo, ecdf.support_hi
    x_star = value_at_risk(ecdf, level, "lower")
    if side == "reward":
        f_left = ecdf.left_limit(x_star)
        body = _step_integral(ecdf, lambda f: np.maximum(f_left - f, 0.0))
        return (a * f_left + body + x_star * (level - f_left)) / level
    if side == "loss":
        f_star = ecdf(x_star)
        body = _step_integral(ecdf, lambda f: np.maximum(f - f_star, 0.0))
        return (b * (1.0 - f_star) - body + x_star * (f_star - level)) / (1.0 - level)
    raise InvalidQuery("side must be 'reward' or 'loss'")


def _reward_from_cdf(ecdf, alpha, shift):
    a = ecdf.support_lo
    body = _step_integral(ecdf, lambda f: np.maximum(alpha - np.clip(f + shift, 0.0, 1.0), 0.0))
    return a + body / alpha


def _loss_from_cdf(ecdf, kappa, shift):
    b = ecdf.support_hi
    body = _step_integral(ecdf, lambda f: np.maximum(np.clip(f + shift, 0.0, 1.0) - kappa, 0.0))
    return b - body / (1.0 - kappa)


def cvar_quantile_form(ecdf, level, side="reward"):
    """CVaR from the plain integrated form (no optimiser needed)."""
    _check_level(level)
    _require_bounded(ecdf)
    if side == "reward":
        return _reward_from_cdf(ecdf, level, 0.0)
    if side == "loss":
        return _loss_from_cdf(ecdf, level, 0.0)
    raise InvalidQuery("side must be 'reward' or 'loss'")


# -- CVaR confidence bounds ------------------------------------------------


@dataclass(frozen=True)
class Bounds:
    lower: float
    upper: float
    point: float
    radius_below: float  # radius added to F_n (controls F - F_n)
    radius_above: float  # radius subtracted from F_n (controls F_n - F)
    delta: float


def _radii(n, delta, interval, split, tol):
    _check_level(delta, "delta")
    if not 0.0 < split < 1.0:
        raise InvalidQuery("split must lie in (0, 1)")
    below = invert_radius(RadiusQuery(n, delta * split, interval, TailSide.BELOW, tol))
    above = invert_radius(RadiusQuery(n, delta * (1.0 - split), interval, TailSide.ABOVE, tol))
    return below, above


def cvar_reward_bounds(ecdf, alpha, delta, split=0.5, tol=DEFAULT_TOL, radii=None):
    """Confidence bounds on the lower-tail CVaR at total level ``delta``.

    Radii are local to the CDF levels [0, alpha]; ``radii=(below, above)``
    overrides the inversion (used for limit checks).
    """
    _check_level(alpha, "alpha")
    _require_bounded(ecdf)
    if radii is None:
        below, above = _radii(ecdf.n, delta, UnitInterval(0.0, alpha), split, tol)
    else:
        below, above = radii
    lower = _reward_from_cdf(ecdf, alpha, below)
    upper = _reward_from_cdf(ecdf, alpha, -above)
    point = _reward_from_cdf(ecdf, alpha, 0.0)
    return Bounds(lower, upper, point, below, above, delta)


def cvar_loss_bounds(ecdf, kappa, delta, split=0.5, tol=DEFAULT_TOL, radii=None):
    """Confidence bounds on the upper-tail CVaR; radii local to [kappa, 1]."""
    _check_level(kappa, "kappa")
    _require_bounded(ecdf)
    if radii is None:
        below, above = _radii(ecdf.n, delta, UnitInterval(kappa, 1.0), split, tol)
    else:
        below, above = radii
    lower = _loss_from_cdf(ecdf, kappa, below)
    upper = _loss_from_cdf(ecdf, kappa, -above)
    point = _loss_from_cdf(ecdf, kappa, 0.0)
    return Bounds(lower, upper, point, below, above, delta)


# -- generic functionals ---------------------------------------------------


@dataclass(frozen=True)
class LipschitzLedger:
    """Segments [breakpoints[j-1], breakpoints[j]] with one-sided constants."""

    breakpoints: tuple
    constants: tuple

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        ls = tuple(float(c) for c in self.constants)
        if len(ls) < 1 or len(bp) != len(ls) + 1:
            raise InvalidLedger("need J >= 1 constants and J + 1 breakpoints")
        if bp[0] != 0.0 or bp[-1] != 1.0 or any(b <= a for a, b in zip(bp, bp[1:])):
            raise InvalidLedger("breakpoints must increase strictly from 0 to 1")
        if any(not math.isfinite(c) or c < 0 for c in ls):
            raise InvalidLedger("Lipschitz constants must be finite and >= 0")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "constants", ls)

    @property
    def J(self):
        return len(self.constants)


@dataclass(frozen=True)
class PhiSpec:
    """A non-increasing kernel phi on [0, 1] with its local Lipschitz ledgers.

    ``lower_right`` bounds (phi(y) - phi(y + e)) / e on each segment and
    powers the lower bound; ``upper_left`` bounds (phi(y - e) - phi(y)) / e
    and powers the upper bound.
    """

    evaluator: Callable
    lower_right: Optional[LipschitzLedger] = None
    upper_left: Optional[LipschitzLedger] = None


def ledger_violation(phi, ledger, side, eps_values=(1e-3, 1e-2, 0.1), points=201):
    """Largest finite-difference excess over the ledger constants (<= 0 is fine)."""
    worst = -math.inf
    for j in range(ledger.J):
        y = np.linspace(ledger.breakpoints[j], ledger.breakpoints[j + 1], points)
        for e in eps_values:
            if side == "lower_right":
                ok = y + e <= 1.0
                ratio = (phi(y[ok]) - phi(y[ok] + e)) / e
            else:
                ok = y - e >= 0.0
                ratio = (phi(y[ok] - e) - phi(y[ok])) / e
            if ratio.size:
                worst = max(worst, float(np.max(ratio)) - ledger.constants[j])
    return worst


@dataclass(frozen=True)
class Partition:
    points: tuple
    deltas: tuple

    def __post_init__(self):
        pts = tuple(float(p) for p in self.points)
        ds = tuple(float(d) for d in self.deltas)
        if len(pts) < 2 or pts[0] != 0.0 or pts[-1] != 1.0 or any(b <= a for a, b in zip(pts, pts[1:])):
            raise InvalidQuery("partition points must increase strictly from 0 to 1")
        if len(ds) != len(pts) - 1 or any(not 0.0 < d < 1.0 for d in ds):
            raise InvalidQuery("need one delta in (0, 1) per partition segment")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "deltas", ds)

    @property
    def K(self):
        return len(self.deltas)

    @classmethod
    def uniform(cls, K, delta_total):
        pts = tuple(np.linspace(0.0, 1.0, K + 1).tolist())
        return cls(pts, (delta_total / K,) * K)

    def segment_index(self, ledger):
        """k_j with points[k_j] == breakpoints[j]; raises if not refined."""
        idx = []
        pts = np.asarray(self.points)
        for b in ledger.breakpoints:
            hit = np.flatnonzero(np.abs(pts - b) <= _BREAK_TOL)
            if hit.size == 0:
                raise PartitionIncompatible(f"partition does not contain breakpoint {b}")
            idx.append(int(hit[0]))
        return idx


@dataclass(frozen=True)
class FunctionalBounds:
    lower: Optional[float]
    upper: Optional[float]
    point: float
    delta_total: float


def _segment_radii(n, partition, tail, tol):
    return [
        invert_radius(RadiusQuery(n, d, UnitInterval(a, b), tail, tol))
        for a, b, d in zip(partition.points, partition.points[1:], partition.deltas)
    ]


def _lipschitz_correction(ledger, partition, gamma, radii):
    k_idx = partition.segment_index(ledger)
    pts = partition.points
    total = []
    for j in range(ledger.J):
        for k in range(k_idx[j], k_idx[j + 1]):
            total.append(ledger.constants[j] * gamma * (pts[k + 1] - pts[k]) * radii[k])
    return math.fsum(total)


def functional_bounds(ecdf, phi, partition, gamma, tol=DEFAULT_TOL):
    """Bounds on mu = int phi(F(x)) dx from per-segment local radii.

    ``gamma`` is the caller's assumed Lipschitz constant of the quantile
    function; it is never estimated here. A side whose ledger is missing
    comes back as ``None``. Total failure probability is sum(deltas) per side.
    """
    if not (math.isfinite(gamma) and gamma > 0):
        raise InvalidQuery("gamma must be a finite positive constant")
    if phi.lower_right is None and phi.upper_left is None:
        raise InvalidLedger("phi carries no Lipschitz ledger")
    point = _step_integral(ecdf, phi.evaluator)
    lower = upper = None
    if phi.lower_right is not None:
        radii = _segment_radii(ecdf.n, partition, TailSide.BELOW, tol)
        lower = point - _lipschitz_correction(phi.lower_right, partition, gamma, radii)
    if phi.upper_left is not None:
        radii = _segment_radii(ecdf.n, partition, TailSide.ABOVE, tol)
        upper = point + _lipschitz_correction(phi.upper_left, partition, gamma, radii)
    return FunctionalBounds(lower, upper, point, math.fsum(partition.deltas))


def functional_bounds_from_quantiles(ecdf, phi, partition, quantiles, tol=DEFAULT_TOL):
    """Synthetic-truth hook: bounds that need the *true* quantiles at the partition levels.

    ``quantiles[k]`` must be the true lower quantile at ``partition.points[k]``
    (clipped to the support at the ends). Real data never provides these.
    """
    q = [float(v) for v in quantiles]
    if len(q) != len(partition.points) or any(b < a for a, b in zip(q, q[1:])):
        raise InvalidQuery("need one non-decreasing quantile per partition point")
    up_r = _segment_radii(ecdf.n, partition, TailSide.BELOW, tol)
    dn_r = _segment_radii(ecdf.n, partition, TailSide.ABOVE, tol)
    lower, upper = [], []
    for k in range(partition.K):
        lo, hi = q[k], q[k + 1]
        r1, r2 = up_r[k], dn_r[k]
        lower.append(_step_integral(ecdf, lambda f: phi.evaluator(np.minimum(f + r1, 1.0)), lo, hi))
        upper.append(_step_integral(ecdf, lambda f: phi.evaluator(np.maximum(f - r2, 0.0)), lo, hi))
    point = _step_integral(ecdf, phi.evaluator)
    return FunctionalBounds(math.fsum(lower), math.fsum(upper), point, math.fsum(partition.deltas))


def reward_cvar_phi(alpha):
    """phi(y) = ((alpha - y)/alpha)_+ with its lower-right ledger."""
    return PhiSpec(
        lambda y: np.maximum(alpha - np.asarray(y, dtype=float), 0.0) / alpha,
        lower_right=LipschitzLedger((0.0, alpha, 1.0), (1.0 / alpha, 0.0)),
    )


def loss_cvar_phi(kappa):
    """phi(y) = 1 - ((y - kappa)/(1 - kappa))_+ with its upper-left ledger."""
    return PhiSpec(
        lambda y: 1.0 - np.maximum(np.asarray(y, dtype=float) - kappa, 0.0) / (1.0 - kappa),
        upper_left=LipschitzLedger((0.0, kappa, 1.0), (0.0, 1.0 / (1.0 - kappa))),
    )
