import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import binom

import oracle
from localdkw import (
    FULL,
    ExceedanceQuery,
    InvalidQuery,
    TailSide,
    UnitInterval,
    exceedance,
    exceedance_probability,
    left_exceedance,
    massart_bound,
    right_exceedance,
    smirnov_full,
)
from localdkw.exact_dkw import Branch, branch_params

# (n, eps, lo, hi, P(above), P(below)) from the rational Steck oracle
ORACLE_TABLE = [
    (1, 0.3, 0.0, 1.0, 0.7, 0.7),
    (2, 0.25, 0.0, 0.5, 0.5, 0.5625),
    (5, 0.1, 0.0, 1.0, 0.85359, 0.85359),
    (5, 0.2, 0.1, 0.6, 0.50336, 0.45728),
    (10, 0.1, 0.3, 0.5, 0.457593125, 0.4734820504),
    (10, 0.15, 0.0, 0.05, 0.08613835589931641, 0.0),
    (12, 0.125, 0.5, 1.0, 0.4931811429806292, 0.4839576477867095),
    (7, 0.2857142857142857, 0.2, 0.8, 0.24806597833992883, 0.24806597833992883),
    (13, 0.05, 0.9, 0.95, 0.5133420832795051, 0.3786550197418),
    (8, 0.3, 0.5, 0.5, 0.03515625, 0.03515625),
]


@pytest.mark.parametrize("n,eps,lo,hi,p_above,p_below", ORACLE_TABLE)
def test_frozen_oracle_values(backend, n, eps, lo, hi, p_above, p_below):
    assert left_exceedance(n, eps, (lo, hi)).probability == pytest.approx(p_above, abs=1e-12)
    assert right_exceedance(n, eps, (lo, hi)).probability == pytest.approx(p_below, abs=1e-12)


def test_n1_closed_forms():
    # n = 1: U_1 - u exceeds eps on [0, 1] iff X < 1 - eps
    assert exceedance_probability(1, 0.3) == pytest.approx(0.7, abs=1e-15)
    # on [0.5, 1], above: still iff X < 1 - eps
    assert exceedance_probability(1, 0.2, (0.5, 1.0)) == pytest.approx(0.8, abs=1e-15)
    # below on [0.5, 1]: u - 0 > eps just under X iff X > 0.5
    assert exceedance_probability(1, 0.2, (0.5, 1.0), "below") == pytest.approx(0.5, abs=1e-15)


small_rational = st.integers(min_value=0, max_value=20).map(lambda k: Fraction(k, 20))


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(1, 9),
    ends=st.tuples(small_rational, small_rational).map(sorted),
    k=st.integers(1, 996),
    tail=st.sampled_from(["above", "below"]),
)
def test_matches_rational_oracle(n, ends, k, tail):
    lo, hi = ends
    eps = Fraction(k, 1000) + Fraction(1, 7919)  # never on an atom k/n - lo
    exact = (oracle.above if tail == "above" else oracle.below)(n, eps, lo, hi)
    got = exceedance_probability(n, float(eps), (float(lo), float(hi)), tail)
    assert got == pytest.approx(float(exact), abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 5, 17, 60, 200])
def test_full_interval_is_smirnov(backend, n):
    for eps in np.linspace(0.013, 0.987, 37):
        s = smirnov_full(n, eps)
        assert left_exceedance(n, eps).probability == pytest.approx(s, abs=1e-12)
        assert right_exceedance(n, eps).probability == pytest.approx(s, abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(
    n=st.integers(1, 120),
    ends=st.tuples(st.floats(0, 1), st.floats(0, 1)).map(sorted),
    eps=st.floats(1e-4, 1.0),
)
def test_reflection(n, ends, eps):
    lo, hi = ends
    right = right_exceedance(n, eps, (lo, hi)).probability
    left = left_exceedance(n, eps, (1.0 - hi, 1.0 - lo)).probability
    assert right == pytest.approx(left, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(1, 80),
    ends=st.tuples(st.floats(0, 1), st.floats(0, 1)).map(sorted),
    tail=st.sampled_from(list(TailSide)),
)
def test_non_increasing_in_eps(n, ends, tail):
    grid = np.linspace(1e-3, 1.0, 120)
    values = [exceedance_probability(n, e, tuple(ends), tail) for e in grid]
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
    assert all(0.0 <= v <= 1.0 for v in values)


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(1, 80),
    pts=st.lists(st.floats(0, 1), min_size=4, max_size=4).map(sorted),
    eps=st.floats(1e-3, 0.999),
    tail=st.sampled_from(list(TailSide)),
)
def test_monotone_in_interval(n, pts, eps, tail):
    outer = (pts[0], pts[3])
    inner = (pts[1], pts[2])
    assert (exceedance_probability(n, eps, inner, tail)
            <= exceedance_probability(n, eps, outer, tail) + 1e-12)


@pytest.mark.parametrize("tail", ["above", "below"])
def test_degenerate_interval_is_binomial(tail):
    for n in (1, 7, 30):
        for a in (0.1, 0.45, 0.9):
            for eps in (0.01123, 0.10123, 0.25123):
                got = exceedance_probability(n, eps, (a, a), tail)
                if tail == "above":
                    # P(Bin(n, a) > n (a + eps))
                    want = binom.sf(math.floor(n * (a + eps)), n, a)
                else:
                    want = binom.cdf(math.ceil(n * (a - eps)) - 1, n, a)
                assert got == pytest.approx(want, abs=1e-10)


def test_zero_beyond_range():
    assert exceedance_probability(10, 0.7, (0.3, 0.9)) == 0.0  # eps >= 1 - lo
    assert exceedance_probability(10, 0.5, (0.1, 0.4), "below") == 0.0  # eps >= hi
    assert exceedance_probability(10, 2.0) == 0.0


def test_massart_domination_spot():
    for n in (1, 10, 100):
        for eps in np.linspace(0.01, 0.99, 99):
            bound = massart_bound(n, eps)
            if bound <= 0.5:
                assert left_exceedance(n, eps).probability <= bound


def test_query_object_and_result():
    res = exceedance(ExceedanceQuery(10, 0.1, UnitInterval(0.3, 0.5), TailSide.ABOVE))
    assert res.probability == pytest.approx(0.457593125, abs=1e-12)
    assert res.branch is Branch.POSITIVE
    assert res.clamped_excursion == 0.0
    assert float(res) == res.probability


def test_branch_selection():
    p, _, _ = branch_params(10, 0.2, 0.0, 0.9, TailSide.ABOVE)
    assert p.n_signed < 0
    assert left_exceedance(10, 0.2, (0.0, 0.9)).branch is Branch.NEGATIVE
    assert left_exceedance(10, 0.1, (0.0, 0.9)).branch is Branch.BOUNDARY
    assert left_exceedance(10, 0.1, (0.0, 0.5)).branch is Branch.POSITIVE


def test_atom_snapping_right_continuous():
    # eps = 4/10 - 0.3 sits on a jump; the value must be the limit from the right
    n, lo, hi = 10, 0.3, 0.5
    at = exceedance_probability(n, 0.1, (lo, hi))
    right_of = exceedance_probability(n, 0.1 + 1e-11, (lo, hi))
    assert at == pytest.approx(right_of, abs=1e-8)


@pytest.mark.parametrize("bad", [
    dict(n=0, eps=0.1), dict(n=-3, eps=0.1), dict(n=2.5, eps=0.1), dict(n=True, eps=0.1),
    dict(n=5, eps=0.0), dict(n=5, eps=-0.1), dict(n=5, eps=float("nan")),
])
def test_invalid_n_eps(bad):
    with pytest.raises(InvalidQuery):
        exceedance_probability(bad["n"], bad["eps"])


@pytest.mark.parametrize("ends", [(0.6, 0.4), (-0.1, 0.5), (0.2, 1.2), (float("nan"), 1.0)])
def test_invalid_interval(ends):
    with pytest.raises(InvalidQuery):
        exceedance_probability(5, 0.1, ends)


def test_invalid_tail():
    with pytest.raises(InvalidQuery):
        exceedance_probability(5, 0.1, FULL, "sideways")


def test_unit_interval_helpers():
    iv = UnitInterval(0.2, 0.7)
    assert iv.mirrored() == UnitInterval(0.30000000000000004, 0.8)
    assert FULL.contains(iv) and not iv.contains(FULL)
    assert str(iv) == "[0.2,0.7]"


def test_smirnov_rejects_eps_one():
    with pytest.raises(InvalidQuery):
        smirnov_full(5, 1.0)


def test_large_n_is_finite(backend):
    p = left_exceedance(2000, 0.02, (0.1, 0.4)).probability
    assert 0.0 < p < 1.0
    assert math.isfinite(p)


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(1, 400),
    ends=st.tuples(st.floats(0, 1), st.floats(0, 1)).map(sorted),
    eps=st.floats(1e-4, 1.0),
    tail=st.sampled_from(list(TailSide)),
)
def test_clamping_is_negligible(n, ends, eps, tail):
    res = exceedance(ExceedanceQuery(n, eps, tuple(ends), tail))
    assert res.clamped_excursion <= 1e-9


@pytest.mark.parametrize("n,lo,hi", [(10, Fraction(23, 100), Fraction(1, 2)), (7, Fraction(0), Fraction(3, 5))])
def test_boundary_branch_continuity(n, lo, hi):
    # n (1 - hi - eps) = 0 exactly at eps = 1 - hi; both sides must match the oracle
    for shift in (Fraction(0), Fraction(1, 10 ** 6), -Fraction(1, 10 ** 6)):
        eps = 1 - hi + shift
        got = left_exceedance(n, float(eps), (float(lo), float(hi)))
        assert got.probability == pytest.approx(float(oracle.above(n, eps, lo, hi)), abs=1e-12)
        got = right_exceedance(n, float(eps), (float(1 - hi), float(1 - lo)))
        assert got.probability == pytest.approx(float(oracle.below(n, eps, 1 - hi, 1 - lo)), abs=1e-12)
