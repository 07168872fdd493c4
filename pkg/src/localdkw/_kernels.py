"""Hot numeric kernels, each in a numba flavour and a numpy flavour.

The public dispatchers at the bottom route to whichever backend
:mod:`localdkw._accel` selected. Both flavours compute the same sums; the
numba one loops with Neumaier compensation, the numpy one vectorises and
finishes with ``math.fsum``.
"""
import math

import numpy as np
from scipy.special import gammaln

from . import _accel
from ._accel import njit

# --------------------------------------------------------------------------
# exceedance sum
#
# One kernel serves both tails. With cap/weight/n_bar/n_signed chosen per
# tail (see exact_dkw._branch_params) the closed form reads
#
#   sum_{l=0}^{m} C(n,l) min(1-l/n-eps, cap)^(n-l) weight^l
# + sum_{l=m+1}^{n_bar-1} C(n,l) (1-l/n-eps)^(n-l) [ eps (l/n+eps)^(l-1)
#       + sum_{j=0}^{m-1} (n_signed-j)/n C(l,j) ((l-n_signed)/n)^(l-j-1) weight^j ]
#
# with m = -1 standing for the single-sum branch. Every term is
# nonnegative, so each is built in log space and exponentiated.
# --------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _log_factorials_nb(n):
    out = np.empty(n + 1)
    for k in range(n + 1):
        out[k] = math.lgamma(k + 1.0)
    return out


@njit(cache=True, nogil=True)
def _exceedance_sum_nb(n, eps, n_bar, n_signed, m, cap, weight):
    lf = _log_factorials_nb(n)
    log_eps = math.log(eps)
    log_w = math.log(weight) if weight > 0.0 else -math.inf
    total = 0.0
    comp = 0.0

    for l in range(0, m + 1):
        base = min(1.0 - l / n - eps, cap)
        if base <= 0.0:
            continue
        if l > 0 and weight <= 0.0:
            continue
        lt = lf[n] - lf[l] - lf[n - l] + (n - l) * math.log(base)
        if l > 0:
            lt += l * log_w
        v = math.exp(lt)
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t

    for l in range(m + 1, n_bar):
        outer = lf[n] - lf[l] - lf[n - l] + (n - l) * math.log(1.0 - l / n - eps)
        v = math.exp(outer + log_eps + (l - 1) * math.log(l / n + eps))
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
        if m > 0:
            log_gap = math.log((l - n_signed) / n)
            for j in range(0, m):
                if j > 0 and weight <= 0.0:
                    break
                lt = (outer + math.log((n_signed - j) / n) + lf[l] - lf[j] - lf[l - j]
                      + (l - j - 1) * log_gap)
                if j > 0:
                    lt += j * log_w
                v = math.exp(lt)
                t = total + v
                if abs(total) >= abs(v):
                    comp += (total - t) + v
                else:
                    comp += (v - t) + total
                total = t
    return total + comp


_INNER_BLOCK = 1 << 20


def _exceedance_sum_np(n, eps, n_bar, n_signed, m, cap, weight):
    lf = gammaln(np.arange(1, n + 2, dtype=float))  # lf[k] = ln(k!)
    log_w = math.log(weight) if weight > 0.0 else -math.inf
    parts = []

    if m >= 0:
        l1 = np.arange(0, m + 1)
        base = np.minimum(1.0 - l1 / n - eps, cap)
        keep = base > 0.0
        if weight <= 0.0:
            keep &= l1 == 0
        l1, base = l1[keep], base[keep]
        with np.errstate(invalid="ignore"):
            wl = np.where(l1 > 0, l1 * log_w, 0.0)
        lt = lf[n] - lf[l1] - lf[n - l1] + (n - l1) * np.log(base) + wl
        parts.append(np.exp(lt))

    if n_bar > m + 1:
        l2 = np.arange(m + 1, n_bar)
        outer = lf[n] - lf[l2] - lf[n - l2] + (n - l2) * np.log(1.0 - l2 / n - eps)
        parts.append(np.exp(outer + math.log(eps) + (l2 - 1) * np.log(l2 / n + eps)))
        if m > 0:
            jmax = m if weight > 0.0 else 1
            j = np.arange(0, jmax)
            with np.errstate(divide="ignore"):
                # n_signed - j hits 0 when n_signed is an integer; that term is 0
                log_a = np.log((n_signed - j) / n)
            with np.errstate(invalid="ignore"):
                wj = np.where(j > 0, j * log_w, 0.0)
            rows = max(1, _INNER_BLOCK // max(jmax, 1))
            for start in range(0, l2.size, rows):
                lb = l2[start:start + rows, None]
                ob = outer[start:start + rows, None]
                lt = (ob + log_a[None, :] + lf[lb] - lf[j][None, :] - lf[lb - j[None, :]]
                      + (lb - j[None, :] - 1) * np.log((lb - n_signed) / n) + wj[None, :])
                parts.append(np.exp(lt).ravel())

    if not parts:
        return 0.0
    return math.fsum(np.concatenate(parts).tolist())


def exceedance_sum(n, eps, n_bar, n_signed, m, cap, weight):
    if _accel.get_backend() == "numba":
        return _exceedance_sum_nb(n, eps, n_bar, n_signed, m, cap, weight)
    return _exceedance_sum_np(n, eps, n_bar, n_signed, m, cap, weight)


# --------------------------------------------------------------------------
# supremum deviations of sorted uniform samples over [lo, hi]
# --------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _sup_left_batch_nb(u, lo, hi):
    reps, n = u.shape
    out = np.empty(reps)
    for r in range(reps):
        below = 0
        best = -math.inf
        for k in range(n):
            x = u[r, k]
            if x <= lo:
                below = k + 1
            if lo <= x <= hi:
                d = (k + 1) / n - x
                if d > best:
                    best = d
        d0 = below / n - lo
        out[r] = d0 if d0 > best else best
    return out


def _sup_left_batch_np(u, lo, hi):
    reps, n = u.shape
    ranks = np.arange(1, n + 1) / n
    inside = (u >= lo) & (u <= hi)
    cand = np.where(inside, ranks[None, :] - u, -np.inf).max(axis=1)
    at_lo = (u <= lo).sum(axis=1) / n - lo
    return np.maximum(cand, at_lo)


@njit(cache=True, nogil=True)
def _sup_right_batch_nb(u, lo, hi):
    reps, n = u.shape
    out = np.empty(reps)
    for r in range(reps):
        strictly_below = 0
        best = -math.inf
        for k in range(n):
            x = u[r, k]
            if x < hi:
                strictly_below = k + 1
            if lo < x <= hi:
                d = x - k / n
                if d > best:
                    best = d
        d0 = hi - strictly_below / n
        out[r] = d0 if d0 > best else best
    return out


def _sup_right_batch_np(u, lo, hi):
    reps, n = u.shape
    ranks = np.arange(0, n) / n
    inside = (u > lo) & (u <= hi)
    cand = np.where(inside, u - ranks[None, :], -np.inf).max(axis=1)
    at_hi = hi - (u < hi).sum(axis=1) / n
    return np.maximum(cand, at_hi)


def sup_left_batch(u, lo, hi):
    """Row-wise sup of U_n(v) - v over [lo, hi]; rows of ``u`` sorted ascending."""
    u = np.ascontiguousarray(u, dtype=float)
    if _accel.get_backend() == "numba":
        return _sup_left_batch_nb(u, float(lo), float(hi))
    return _sup_left_batch_np(u, lo, hi)


def sup_right_batch(u, lo, hi):
    """Row-wise sup of v - U_n(v) over [lo, hi] (attained as left limits)."""
    u = np.ascontiguousarray(u, dtype=float)
    if _accel.get_backend() == "numba":
        return _sup_right_batch_nb(u, float(lo), float(hi))
    return _sup_right_batch_np(u, lo, hi)


# --------------------------------------------------------------------------
# running supremum along a stream: value at every prefix length t = 1..n
# --------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _running_sup_nb(stream, lo, hi, above):
    n = stream.shape[0]
    buf = np.empty(n)
    out = np.empty(n)
    for t in range(1, n + 1):
        # insertion keeps buf[:t] sorted
        x = stream[t - 1]
        i = t - 1
        while i > 0 and buf[i - 1] > x:
            buf[i] = buf[i - 1]
            i -= 1
        buf[i] = x
        best = -math.inf
        if above:
            below = 0
            for k in range(t):
                y = buf[k]
                if y <= lo:
                    below = k + 1
                if lo <= y <= hi:
                    d = (k + 1) / t - y
                    if d > best:
                        best = d
            d0 = below / t - lo
        else:
            below = 0
            for k in range(t):
                y = buf[k]
                if y < hi:
                    below = k + 1
                if lo < y <= hi:
                    d = y - k / t
                    if d > best:
                        best = d
            d0 = hi - below / t
        out[t - 1] = d0 if d0 > best else best
    return out


def _running_sup_np(stream, lo, hi, above):
    n = stream.shape[0]
    out = np.empty(n)
    for t in range(1, n + 1):
        prefix = np.sort(stream[:t])[None, :]
        if above:
            out[t - 1] = _sup_left_batch_np(prefix, lo, hi)[0]
        else:
            out[t - 1] = _sup_right_batch_np(prefix, lo, hi)[0]
    return out


def running_sup(stream, lo, hi, above):
    stream = np.ascontiguousarray(stream, dtype=float)
    if _accel.get_backend() == "numba":
        return _running_sup_nb(stream, float(lo), float(hi), bool(above))
    return _running_sup_np(stream, lo, hi, above)
