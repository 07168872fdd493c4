"""Exact local exceedance probabilities for the uniform empirical CDF.

For ``n`` i.i.d. uniform samples with empirical CDF ``U_n`` the module
evaluates, in closed form,

* ``P(sup_{u in [lo, hi]} U_n(u) - u > eps)``  (:func:`left_exceedance`,
  tail ``ABOVE``), and
* ``P(sup_{u in [lo, hi]} u - U_n(u) > eps)``  (:func:`right_exceedance`,
  tail ``BELOW``).

Any continuous CDF reduces to this case through ``u = F(x)``, so an interval
of CDF *levels* is what callers pass in.
"""
import enum
import math
from dataclasses import dataclass

from . import _kernels
from ._errors import InvalidQuery

# Quantities like n*(1 - lo - eps) that land within this distance of an
# integer are snapped onto it before ceil/floor; the probability jumps at
# such points and float noise must not pick the side.
SNAP_TOL = 1e-9


class TailSide(str, enum.Enum):
    ABOVE = "above"  # sup U_n - U
    BELOW = "below"  # sup U - U_n

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise InvalidQuery(f"tail must be 'above' or 'below', got {value!r}") from None


class Branch(str, enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class UnitInterval:
    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = self.lo, self.hi
        if not (math.isfinite(lo) and math.isfinite(hi)) or not 0.0 <= lo <= hi <= 1.0:
            raise InvalidQuery(f"need 0 <= lo <= hi <= 1, got [{lo}, {hi}]")

    def mirrored(self):
        return UnitInterval(1.0 - self.hi, 1.0 - self.lo)

    def contains(self, other):
        return self.lo <= other.lo and other.hi <= self.hi

    def __str__(self):
        return f"[{self.lo:g},{self.hi:g}]"


FULL = UnitInterval(0.0, 1.0)


def as_interval(value):
    if isinstance(value, UnitInterval):
        return value
    try:
        lo, hi = value
    except (TypeError, ValueError):
        raise InvalidQuery(f"cannot read an interval from {value!r}") from None
    return UnitInterval(float(lo), float(hi))


@dataclass(frozen=True)
class ExceedanceQuery:
    n: int
    eps: float
    interval: UnitInterval = FULL
    tail: TailSide = TailSide.ABOVE


@dataclass(frozen=True)
class BranchParams:
    n_bar: int
    n_signed: float
    m: int


@dataclass(frozen=True)
class ExceedanceResult:
    probability: float
    branch: Branch
    clamped_excursion: float
    params: BranchParams

    def __float__(self):
        return self.probability


def _snap(x):
    r = round(x)
    return float(r) if abs(x - r) <= SNAP_TOL else x


def _check_n_eps(n, eps):
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InvalidQuery(f"n must be a positive integer, got {n!r}")
    if not (isinstance(eps, (int, float)) and math.isfinite(eps)) or eps <= 0:
        raise InvalidQuery(f"eps must be a finite real > 0, got {eps!r}")
    return int(n), float(eps)


def branch_params(n, eps, lo, hi, tail):
    """Return (params, cap, weight) feeding the shared kernel for one tail.

    The right-tail parameters are those of the left tail on the mirrored
    interval [1-hi, 1-lo], but built from lo/hi directly.
    """
    if tail is TailSide.ABOVE:
        n_bar = math.ceil(_snap(n * (1.0 - lo - eps)))
        n_signed = _snap(n * (1.0 - hi - eps))
        cap, weight = hi, 1.0 - hi
    else:
        n_bar = math.ceil(_snap(n * (hi - eps)))
        n_signed = _snap(n * (lo - eps))
        cap, weight = 1.0 - lo, lo
    m = min(math.floor(n_signed) + 1, n_bar - 1)
    return BranchParams(n_bar, n_signed, m), cap, weight


def _evaluate(n, eps, interval, tail):
    params, cap, weight = branch_params(n, eps, interval.lo, interval.hi, tail)
    if params.n_signed > 0:
        branch = Branch.POSITIVE
    elif params.n_signed < 0:
        branch = Branch.NEGATIVE
    else:
        branch = Branch.BOUNDARY
    if params.n_bar <= 0:
        # eps beyond the range of the supremum: 1-lo (above) or hi (below)
        return ExceedanceResult(0.0, branch, 0.0, params)
    m_kernel = params.m if branch is not Branch.NEGATIVE else -1
    raw = _kernels.exceedance_sum(n, eps, params.n_bar, params.n_signed, m_kernel, cap, weight)
    prob = min(max(raw, 0.0), 1.0)
    return ExceedanceResult(prob, branch, abs(raw - prob), params)


def left_exceedance(n, eps, interval=FULL):
    """P(sup over ``interval`` of U_n(u) - u > eps); zero once eps > 1 - lo."""
    n, eps = _check_n_eps(n, eps)
    return _evaluate(n, eps, as_interval(interval), TailSide.ABOVE)


def right_exceedance(n, eps, interval=FULL):
    """P(sup over ``interval`` of u - U_n(u) > eps); zero once eps > hi."""
    n, eps = _check_n_eps(n, eps)
    return _evaluate(n, eps, as_interval(interval), TailSide.BELOW)


def exceedance(query):
    n, eps = _check_n_eps(query.n, query.eps)
    return _evaluate(n, eps, as_interval(query.interval), TailSide.parse(query.tail))


def exceedance_probability(n, eps, interval=FULL, tail=TailSide.ABOVE):
    """Float-returning shorthand for :func:`exceedance`."""
    n, eps = _check_n_eps(n, eps)
    return _evaluate(n, eps, as_interval(interval), TailSide.parse(tail)).probability


def smirnov_full(n, eps):
    """Full-interval exceedance from the classical one-sided Smirnov sum.

    Evaluated independently of the kernel (``math.lgamma`` + ``math.fsum``)
    so that it can serve as a cross-check for ``[0, 1]``.
    """
    n, eps = _check_n_eps(n, eps)
    if not eps < 1.0:
        raise InvalidQuery(f"smirnov_full needs 0 < eps < 1, got {eps}")
    top = n - math.floor(_snap(n * eps)) - 1
    terms = []
    lg_n = math.lgamma(n + 1)
    for l in range(0, top + 1):
        rest = 1.0 - l / n - eps
        if rest <= 0.0:
            continue
        log_t = (lg_n - math.lgamma(l + 1) - math.lgamma(n - l + 1)
                 + math.log(eps) + (n - l) * math.log(rest) + (l - 1) * math.log(l / n + eps))
        terms.append(math.exp(log_t))
    return min(max(math.fsum(terms), 0.0), 1.0)


def massart_bound(n, eps):
    """exp(-2 n eps^2). Only a valid bound where the value is <= 1/2."""
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InvalidQuery(f"n must be a positive integer, got {n!r}")
    if eps < 0:
        raise InvalidQuery("eps must be >= 0")
    return math.exp(-2.0 * n * eps * eps)
