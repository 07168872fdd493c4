"""Monte-Carlo oracle for the exact exceedance formulas.

Supremum deviations are evaluated exactly on each simulated sample: the
supremum of ``U_n - u`` is attained at ``lo`` or at a sample point, and the
supremum of ``u - U_n`` is a left limit at ``hi`` or at a sample point.

Random numbers come from numpy's ``Philox`` (Philox4x64-10, counter based).
Replications are cut into fixed-size chunks and chunk ``c`` draws from
``Philox(SeedSequence([seed, c]))``, so results do not depend on how many
threads process the chunks.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _accel, _kernels
from ._errors import InvalidQuery, UnsortedInput
from .exact_dkw import FULL, TailSide, UnitInterval, as_interval, exceedance_probability

RNG_NAME = "numpy.random.Philox (Philox4x64-10) keyed by SeedSequence([seed, chunk])"
CHUNK = 2048
# sup values within this distance above eps do not count as exceedances;
# this puts atoms (e.g. U_n(lo) - lo = k/n - lo) on the same side as the
# right-continuous closed form.
COUNT_TOL = 1e-12


@dataclass(frozen=True)
class McConfig:
    n: int
    eps_grid: tuple
    interval: UnitInterval = FULL
    tail: TailSide = TailSide.ABOVE
    reps: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise InvalidQuery(f"n must be a positive integer, got {self.n!r}")
        if int(self.reps) != self.reps or self.reps < 1:
            raise InvalidQuery(f"reps must be >= 1, got {self.reps!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidQuery("seed must fit in 64 unsigned bits")
        grid = np.asarray(self.eps_grid, dtype=float)
        if grid.ndim != 1 or grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
            raise InvalidQuery("eps_grid must be non-empty, positive and strictly increasing")
        object.__setattr__(self, "eps_grid", tuple(grid.tolist()))
        object.__setattr__(self, "interval", as_interval(self.interval))
        object.__setattr__(self, "tail", TailSide.parse(self.tail))


@dataclass(frozen=True)
class McEstimate:
    eps: float
    frequency: float
    stderr: float
    count: int = field(default=0, compare=False)


def _check_sorted(values):
    u = np.asarray(values, dtype=float)
    if u.ndim != 1:
        raise InvalidQuery("expected a one-dimensional sample")
    if u.size and (np.any(np.diff(u) < 0)):
        raise UnsortedInput("samples must be sorted ascending")
    if u.size and (u[0] < 0 or u[-1] > 1):
        raise InvalidQuery("uniform samples must lie in [0, 1]")
    if u.size == 0:
        raise InvalidQuery("need at least one sample")
    return u


def sup_dev_left(sorted_uniforms, interval=FULL):
    """Exact sup of U_n(v) - v over the interval."""
    u = _check_sorted(sorted_uniforms)
    iv = as_interval(interval)
    return float(_kernels.sup_left_batch(u[None, :], iv.lo, iv.hi)[0])


def sup_dev_right(sorted_uniforms, interval=FULL):
    """Exact sup of v - U_n(v) over the interval (a left limit, never attained)."""
    u = _check_sorted(sorted_uniforms)
    iv = as_interval(interval)
    return float(_kernels.sup_right_batch(u[None, :], iv.lo, iv.hi)[0])


def chunk_generator(seed, chunk):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(chunk)])))


def _chunk_sups(args):
    seed, chunk, size, n, lo, hi, above = args
    u = np.sort(chunk_generator(seed, chunk).random((size, n)), axis=1)
    if above:
        return _kernels.sup_left_batch(u, lo, hi)
    return _kernels.sup_right_batch(u, lo, hi)


def simulate_sups(n, interval, tail, reps, seed):
    """Supremum deviation of ``reps`` independent samples of size ``n``."""
    iv = as_interval(interval)
    above = TailSide.parse(tail) is TailSide.ABOVE
    jobs = []
    for c, start in enumerate(range(0, reps, CHUNK)):
        jobs.append((seed, c, min(CHUNK, reps - start), n, iv.lo, iv.hi, above))
    workers = min(_accel.thread_count(), len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk_sups, jobs))
    else:
        parts = [_chunk_sups(j) for j in jobs]
    return np.concatenate(parts)


def count_exceedances(sups, eps_grid):
    """Number of sup values strictly above each grid point (atom-consistent)."""
    s = np.sort(np.asarray(sups, dtype=float))
    eps = np.asarray(eps_grid, dtype=float)
    return s.size - np.searchsorted(s, eps + COUNT_TOL, side="right")


def mc_exceedance(cfg):
    """Exceedance frequencies for every eps in the grid from one set of samples."""
    sups = simulate_sups(cfg.n, cfg.interval, cfg.tail, cfg.reps, cfg.seed)
    counts = count_exceedances(sups, cfg.eps_grid)
    out = []
    for eps, k in zip(cfg.eps_grid, counts.tolist()):
        p = k / cfg.reps
        out.append(McEstimate(eps, p, math.sqrt(p * (1.0 - p) / cfg.reps), int(k)))
    return out


def mc_report_rows(cfg, estimates=None):
    """Rows (eps, frequency, stderr, exact, abs_diff) for the MC report CSV."""
    if estimates is None:
        estimates = mc_exceedance(cfg)
    rows = []
    for est in estimates:
        exact = exceedance_probability(cfg.n, est.eps, cfg.interval, cfg.tail)
        rows.append((est.eps, est.frequency, est.stderr, exact, abs(est.frequency - exact)))
    return rows


def binomial_tail(n, p, mode, threshold):
    """P(Bin(n, p) > threshold) for mode 'gt', P(Bin(n, p) < threshold) for 'lt'."""
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InvalidQuery(f"n must be a positive integer, got {n!r}")
    if not 0.0 <= p <= 1.0:
        raise InvalidQuery(f"p must lie in [0, 1], got {p}")
    if mode not in ("gt", "lt"):
        raise InvalidQuery("mode must be 'gt' or 'lt'")
    n = int(n)
    if mode == "gt":
        ks = [k for k in range(n + 1) if k > threshold]
    else:
        ks = [k for k in range(n + 1) if k < threshold]
    terms = []
    for k in ks:
        if p == 0.0 or p == 1.0:
            terms.append(1.0 if k == round(n * p) else 0.0)
            continue
        log_pmf = (math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
                   + k * math.log(p) + (n - k) * math.log1p(-p))
        terms.append(math.exp(log_pmf))
    return min(math.fsum(terms), 1.0)
