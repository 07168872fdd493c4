"""Time-uniform (anytime-valid) radii by geometric peeling, schedules and g functions.

Time is cut into blocks [eta^(k-1), eta^k); a per-block maximal inequality
plus a union bound over the K = ceil(ln n / ln eta) blocks gives a radius
that holds at any stopping time bounded by the horizon n.
"""
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _accel, _kernels
from ._errors import DeltaOverflow, EpsTooSmall, InvalidParams, InvalidQuery, TooEarly
from .exact_dkw import FULL, TailSide, UnitInterval, as_interval, exceedance_probability
from .inversion import DEFAULT_TOL, RadiusQuery, invert_radius
from .mc_oracle import chunk_generator


class MonotonicityWarning(UserWarning):
    """Exact radii increased in N somewhere on the peeling grid."""


@dataclass(frozen=True)
class TimeUniformConfig:
    horizon: int
    delta: float
    eta: float = 1.1
    C: float = 2.0
    interval: UnitInterval = FULL
    tail: TailSide = TailSide.ABOVE
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if isinstance(self.horizon, bool) or int(self.horizon) != self.horizon or self.horizon < 1:
            raise InvalidQuery(f"horizon must be a positive integer, got {self.horizon!r}")
        if not 0.0 < self.delta < 1.0:
            raise InvalidQuery(f"delta must lie in (0, 1), got {self.delta!r}")
        if not (math.isfinite(self.eta) and self.eta > 1.0):
            raise InvalidQuery(f"eta must be > 1, got {self.eta!r}")
        if not (math.isfinite(self.C) and self.C > 1.0):
            raise InvalidQuery(f"C must be > 1, got {self.C!r}")
        object.__setattr__(self, "horizon", int(self.horizon))
        object.__setattr__(self, "interval", as_interval(self.interval))
        object.__setattr__(self, "tail", TailSide.parse(self.tail))

    @property
    def K(self):
        return peel_count(self.horizon, self.eta)

    @property
    def q(self):
        return q_sup(self.interval)

    @property
    def block_delta(self):
        return self.delta / self.C / self.K


def peel_count(horizon, eta):
    """ceil(ln n / ln eta), with a single block when that is 0 (n = 1)."""
    return max(1, math.ceil(math.log(horizon) / math.log(eta)))


def q_sup(interval):
    """sup of x(1-x) over the interval."""
    iv = as_interval(interval)
    if iv.lo <= 0.5 <= iv.hi:
        return 0.25
    return max(iv.lo * (1.0 - iv.lo), iv.hi * (1.0 - iv.hi))


def _drift_threshold(n1, cfg):
    return math.sqrt(cfg.C * cfg.q * (cfg.eta - 1.0) / ((cfg.C - 1.0) * n1))


def peeling_rhs(n1, n2, eps, cfg):
    """Maximal-inequality right-hand side for one block [n1, n2].

    C * P(sup U_{n2} - U > sqrt(n1 / (n2 eta)) * (eps - drift)), where the
    drift term is sqrt(C q (eta - 1) / ((C - 1) n1)).
    """
    for name, v in (("n1", n1), ("n2", n2)):
        if isinstance(v, bool) or int(v) != v or v < 1:
            raise InvalidQuery(f"{name} must be a positive integer, got {v!r}")
    if not n1 <= n2 <= cfg.eta * n1:
        raise InvalidQuery("need n1 <= n2 <= eta * n1")
    thr = _drift_threshold(n1, cfg)
    if not eps > thr:
        raise EpsTooSmall(f"eps={eps} does not exceed the drift term {thr:.6g}")
    shrunk = math.sqrt(n1 / (n2 * cfg.eta)) * (eps - thr)
    return cfg.C * exceedance_probability(int(n2), shrunk, cfg.interval, cfg.tail)


def _check_N(N, cfg):
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise InvalidQuery(f"N must be a positive integer, got {N!r}")
    if N > cfg.horizon:
        raise InvalidQuery(f"N={N} exceeds the horizon {cfg.horizon}")
    if not N > cfg.eta - 1.0:
        raise TooEarly(f"N={N} must exceed eta - 1 = {cfg.eta - 1.0:g}")
    return int(N)


def tu_radius(N, cfg, radius_fn=None):
    """Radius valid at any stopping time N <= horizon.

    (eta sqrt(N) eps(N, delta / C / K) + sqrt(C/(C-1) q eta (eta-1))) / sqrt(N - (eta-1))

    ``radius_fn(N, level)`` replaces the exact inversion (e.g. by a Massart
    radius); by default the exact local radius on ``cfg.interval`` is used.
    """
    N = _check_N(N, cfg)
    level = cfg.block_delta
    if radius_fn is None:
        eps = invert_radius(RadiusQuery(N, level, cfg.interval, cfg.tail, cfg.tol))
    else:
        eps = radius_fn(N, level)
    eta, C = cfg.eta, cfg.C
    drift = math.sqrt(C / (C - 1.0) * cfg.q * eta * (eta - 1.0))
    return (eta * math.sqrt(N) * eps + drift) / math.sqrt(N - (eta - 1.0))


def raw_massart(N, level):
    """sqrt(ln(1/level) / (2N)) without the cap at 1."""
    return math.sqrt(math.log(1.0 / level) / (2.0 * N))


def tu_radius_global(N, horizon, delta, eta):
    """Closed-form global radius (C = 2, q = 1/4, Massart in place of the exact radius)."""
    if isinstance(horizon, bool) or int(horizon) != horizon or horizon < 1:
        raise InvalidQuery(f"horizon must be a positive integer, got {horizon!r}")
    if not 0.0 < delta < 0.5:
        raise InvalidQuery(f"delta must lie in (0, 0.5), got {delta!r}")
    if not (math.isfinite(eta) and eta > 1.0):
        raise InvalidQuery(f"eta must be > 1, got {eta!r}")
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise InvalidQuery(f"N must be a positive integer, got {N!r}")
    if not N > eta - 1.0:
        raise TooEarly(f"N={N} must exceed eta - 1 = {eta - 1.0:g}")
    K = peel_count(int(horizon), eta)
    head = eta * math.sqrt(math.log(K * 2.0 / delta)) + math.sqrt(eta * (eta - 1.0))
    return head / math.sqrt(2.0 * (N - (eta - 1.0)))


def block_edges(cfg):
    """Integer block end points ceil(eta^k) clipped to the horizon."""
    edges = {1, cfg.horizon}
    for k in range(cfg.K + 1):
        edges.add(min(cfg.horizon, max(1, math.ceil(cfg.eta ** k))))
    return sorted(edges)


def check_monotone(cfg, Ns=None):
    """Warn if the exact radius eps(N, delta/C/K) increases along ``Ns``.

    The peeling argument assumes a non-increasing radius. Exact radii are
    only empirically monotone, so any violation is flagged, not repaired.
    Returns the list of offending (N_prev, N) pairs.
    """
    Ns = block_edges(cfg) if Ns is None else sorted(set(int(v) for v in Ns))
    level = cfg.block_delta
    radii = [invert_radius(RadiusQuery(N, level, cfg.interval, cfg.tail, cfg.tol)) for N in Ns]
    bad = [(a, b) for (a, ra), (b, rb) in zip(zip(Ns, radii), zip(Ns[1:], radii[1:]))
           if rb > ra + cfg.tol]
    if bad:
        warnings.warn(f"exact radius increases in N at {bad[:5]}", MonotonicityWarning, stacklevel=2)
    return bad


def tu_band(cfg, Ns=None, check=True):
    """Rows (N, radius) for every admissible N in ``Ns`` (default 1..horizon)."""
    Ns = range(1, cfg.horizon + 1) if Ns is None else Ns
    Ns = [int(N) for N in Ns if N > cfg.eta - 1.0]
    if check:
        check_monotone(cfg)
    workers = min(_accel.thread_count(), max(1, len(Ns)))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            radii = list(pool.map(lambda N: tu_radius(N, cfg), Ns))
    else:
        radii = [tu_radius(N, cfg) for N in Ns]
    return list(zip(Ns, radii))


# -- anytime coverage ------------------------------------------------------


def _stream_violates(args):
    seed, idx, n, lo, hi, above, thresholds = args
    stream = chunk_generator(seed, idx).random(n)
    sups = _kernels.running_sup(stream, lo, hi, above)
    return bool(np.any(sups > thresholds))


def simulate_anytime_coverage(cfg, reps=2000, seed=0):
    """Fraction of uniform streams whose deviation ever crosses tu_radius(t), t <= horizon.

    Stream ``i`` draws from ``Philox(SeedSequence([seed, i]))``.
    """
    if int(reps) != reps or reps < 1:
        raise InvalidQuery("reps must be a positive integer")
    thresholds = np.full(cfg.horizon, np.inf)
    for N, r in tu_band(cfg, check=False):
        thresholds[N - 1] = r
    above = cfg.tail is TailSide.ABOVE
    jobs = [(seed, i, cfg.horizon, cfg.interval.lo, cfg.interval.hi, above, thresholds)
            for i in range(int(reps))]
    workers = min(_accel.thread_count(), len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            flags = list(pool.map(_stream_violates, jobs, chunksize=32))
    else:
        flags = [_stream_violates(j) for j in jobs]
    return sum(flags) / len(flags)


# -- g functions -----------------------------------------------------------


def _lnbar(x):
    return np.maximum(np.log(x), 1.0)


def _tower(m):
    """exp iterated m times at 1: 1 -> e -> e^e -> ..."""
    v = 1.0
    for _ in range(m):
        v = math.exp(v)
    return v


def generalized_constant(m):
    if m == 1:
        return 2.0 + math.log(2.0) + 1.0 / math.e
    if m == 2:
        return 2.03 + math.log(math.e ** math.e - 1.0)
    return 2.0 + math.log(_tower(m))


@dataclass(frozen=True)
class GFunction:
    """One member of the g catalog. ``name`` is ThreeT32, TT1, LogSq, LogLogSq or G<m>."""

    name: str
    m: int = field(default=0)

    @classmethod
    def parse(cls, ident):
        if isinstance(ident, cls):
            return ident
        text = str(ident).strip()
        key = text.lower()
        aliases = {"threet32": "ThreeT32", "3t32": "ThreeT32", "tt1": "TT1",
                   "logsq": "LogSq", "loglogsq": "LogLogSq"}
        if key in aliases:
            return cls(aliases[key])
        for prefix in ("generalized", "g"):
            if key.startswith(prefix):
                body = key[len(prefix):].strip("()")
                if body.isdigit() and int(body) >= 1:
                    return cls("Generalized", int(body))
        raise InvalidQuery(f"unknown g function {ident!r}")

    def __str__(self):
        return f"Generalized({self.m})" if self.name == "Generalized" else self.name

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 1):
            raise InvalidQuery("g is defined for t >= 1")
        if self.name == "ThreeT32":
            return 3.0 * t ** 1.5
        if self.name == "TT1":
            return t * (t + 1.0)
        if self.name == "LogSq":
            return (t + 1.0) * np.log(t + 1.0) ** 2 / math.log(2.0)
        if self.name == "LogLogSq":
            return ((t + 2.0) * np.log(t + 2.0) * np.log(np.log(t + 2.0)) ** 2
                    / math.log(math.log(3.0)))
        levels = [t]
        for _ in range(self.m):
            levels.append(_lnbar(levels[-1]))
        prod = np.ones_like(t)
        for lv in levels[:-1]:
            prod = prod * lv
        return generalized_constant(self.m) * levels[-1] ** 2 * prod

    def tail_bound(self, T):
        """Upper bound on sum_{t > T} 1/g(t) by integral comparison."""
        if self.name == "ThreeT32":
            return 2.0 / (3.0 * math.sqrt(T))
        if self.name == "TT1":
            return 1.0 / (T + 1.0)
        if self.name == "LogSq":
            return math.log(2.0) / math.log(T + 1.0)
        if self.name == "LogLogSq":
            return math.log(math.log(3.0)) / math.log(math.log(T + 2.0))
        if T < _tower(self.m):
            raise InvalidQuery(f"tail bound for g_{self.m} needs T >= exp^{self.m}(1)")
        v = float(T)
        for _ in range(self.m):
            v = math.log(v)
        return 1.0 / (generalized_constant(self.m) * v)

    def default_horizon(self):
        """Partial-sum horizon: 10^6, or past exp^m(1) where the tail bound starts."""
        if self.name == "Generalized":
            return max(10 ** 6, math.ceil(_tower(self.m)))
        return 10 ** 6


def g_value(ident, t):
    if isinstance(t, bool) or int(t) != t or t < 1:
        raise InvalidQuery(f"t must be a positive integer, got {t!r}")
    return float(GFunction.parse(ident)(float(t)))


def g_partial_sum(ident, T, block=1 << 20):
    g = GFunction.parse(ident)
    parts = []
    for start in range(1, int(T) + 1, block):
        t = np.arange(start, min(start + block, int(T) + 1), dtype=float)
        parts.append(np.sort(1.0 / g(t)))
    return math.fsum(np.concatenate(parts).tolist())


def g_summability(ident, T=None):
    """(partial sum to T, tail bound past T, total). Admissible g need total <= 1."""
    g = GFunction.parse(ident)
    T = g.default_horizon() if T is None else int(T)
    head = g_partial_sum(g, T)
    tail = g.tail_bound(T)
    return head, tail, head + tail


def tt1_telescoping(T):
    """sum_{t<=T} 1/(t(t+1)) as exact fractions: 1 - 1/(T+1)."""
    from fractions import Fraction

    total = sum((Fraction(1, t * (t + 1)) for t in range(1, int(T) + 1)), Fraction(0))
    return total, Fraction(1) - Fraction(1, int(T) + 1)


# -- schedules -------------------------------------------------------------

SCHEMES = ("PolyLogA", "KlUcbB", "SummableC", "UnionBound")
_CERTIFIED = ("ThreeT32", "TT1", "Generalized")


@dataclass(frozen=True)
class Schedule:
    scheme: str
    params: dict
    t: np.ndarray
    eta_t: np.ndarray
    delta_t: np.ndarray
    K_t: np.ndarray

    @property
    def entries(self):
        return list(zip(self.t.tolist(), self.eta_t.tolist(), self.delta_t.tolist()))

    def rows(self):
        return zip(self.t.tolist(), self.eta_t.tolist(), self.delta_t.tolist(), self.K_t.tolist())

    def cumulative_error(self):
        """Running sum of K_t * delta_t."""
        return np.cumsum(self.K_t * self.delta_t)


def _klucb_f(t, xi):
    # truncated logs keep f >= 1 from t = 1 on
    lt = _lnbar(t)
    return lt + xi * _lnbar(lt)


def _k_of(t, eta):
    with np.errstate(divide="ignore"):
        k = np.ceil(np.log(t) / np.log(eta))
    return np.maximum(k, 1.0).astype(np.int64)


def build_schedule(scheme, T, **params):
    """Materialise (eta_t, delta_t, K_t) for t = 1..T.

    PolyLogA:   eta_t = 1 + ln(t + e)^(-a), delta_t = scale / (t lnbar(t)^2); params a < 1, scale.
    KlUcbB:     f = lnbar(t) + xi lnbar(lnbar(t)), eta_t = (f + 1) / f, delta_t = exp(-f); xi > 2.
    SummableC:  delta_t = 1 / (K_t 2 g(t)); eta_t from KlUcbB (xi = 3) or a constant ``eta``.
    UnionBound: delta_t = 1 / (t g(t)); eta_t is undefined (nan), K_t = t.
    """
    if isinstance(T, bool) or int(T) != T or T < 1:
        raise InvalidParams(f"T must be a positive integer, got {T!r}")
    t = np.arange(1, int(T) + 1, dtype=float)
    if scheme == "PolyLogA":
        a = float(params.get("a", 0.5))
        scale = float(params.get("scale", 0.5))
        if not 0.0 < a < 1.0:
            raise InvalidParams("scheme PolyLogA needs 0 < a < 1")
        if not 0.0 < scale <= 0.5:
            raise InvalidParams("scheme PolyLogA needs 0 < scale <= 0.5")
        eta = 1.0 + np.log(t + math.e) ** (-a)
        delta = scale / (t * _lnbar(t) ** 2)
        used = {"a": a, "scale": scale}
    elif scheme == "KlUcbB":
        xi = float(params.get("xi", 3.0))
        if not xi > 2.0:
            raise InvalidParams("scheme KlUcbB needs xi > 2")
        f = _klucb_f(t, xi)
        eta = (f + 1.0) / f
        delta = np.exp(-f)
        used = {"xi": xi}
    elif scheme in ("SummableC", "UnionBound"):
        g = GFunction.parse(params.get("g", "TT1"))
        if g.name not in _CERTIFIED and not params.get("allow_uncertified", False):
            raise InvalidParams(f"{g} is not certified summable; pass allow_uncertified=True")
        gt = g(t)
        used = {"g": str(g)}
        if scheme == "UnionBound":
            eta = np.full_like(t, np.nan)
            delta = 1.0 / (t * gt)
            K = t.astype(np.int64)
            return Schedule(scheme, used, t.astype(np.int64), eta, delta, K)
        if params.get("eta") is not None:
            eta_c = float(params["eta"])
            if not eta_c > 1.0:
                raise InvalidParams("eta must be > 1")
            eta = np.full_like(t, eta_c)
            used["eta"] = eta_c
        else:
            f = _klucb_f(t, 3.0)
            eta = (f + 1.0) / f
        K = _k_of(t, eta)
        delta = 1.0 / (K * 2.0 * gt)
        if np.any(delta > 1.0):
            bad = int(t[np.argmax(delta > 1.0)])
            raise DeltaOverflow(f"delta_t > 1 at t={bad}; choose a different eta_t or g")
    else:
        raise InvalidParams(f"scheme must be one of {SCHEMES}, got {scheme!r}")
    return Schedule(scheme, used, t.astype(np.int64), eta, delta, _k_of(t, eta))
