from fractions import Fraction as F
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from journe_lab.carleson import carleson_family, cm_norm
from journe_lab.corpus import random_step, rng_for
from journe_lab.geometry import DyadicInterval, DyadicRect, Region, StepFunction, box, rect
from journe_lab.grids import CapExceeded
from journe_lab.haar import (
    bmo_norms,
    bmo_projection_check,
    carleson_function,
    coefficient_function,
    haar_coeff,
    haar_function,
    normalized_rec_sum,
    rect_oscillation,
    spectrum,
)

UNIT = rect((0, 0), (0, 0))


def h_step(R, c=1):
    return StepFunction.from_pieces(haar_function(R, c), R.dim)


def small_rects(dim):
    ivs = [DyadicInterval(k, j) for k in (-1, 0, 1) for j in range(-1, 2)]
    return [DyadicRect(s) for s in product(ivs, repeat=dim)]


# --------------------------------------------------------- coefficients


def test_haar_coeff_examples():
    I = rect((0, 0))
    b = h_step(I)
    assert haar_coeff(b, I) == 1
    assert haar_coeff(b, rect((0, 3))) == 0
    const = StepFunction.from_pieces([(box((0, 4)), 7)], 1)
    assert all(haar_coeff(const, J) == 0 for J in (rect((0, 1)), rect((1, 0)), rect((-1, 3))))


@pytest.mark.parametrize("dim", [1, 2])
def test_orthogonality(dim):
    rs = small_rects(dim)
    for R in rs:
        hR = h_step(R)
        for S in rs:
            want = R.measure if R == S else 0
            assert haar_coeff(hR, S) == want


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6))
def test_parseval_and_recovery(seed):
    rng = rng_for(seed, 0)
    rs = small_rects(2)
    picks = {rs[int(i)]: F(int(rng.integers(-4, 5)), int(rng.integers(1, 4)))
             for i in rng.choice(len(rs), size=4, replace=False)}
    picks = {R: c for R, c in picks.items() if c}
    b = coefficient_function(picks, 2)
    # b = sum c_R h_R / |R| has L^2-normalized coefficients c_R / sqrt|R|
    assert b.lp_power(2) == sum(c * c / R.measure for R, c in picks.items())
    got = spectrum(b, extra=1).as_dict()
    assert got == picks


def test_spectrum_of_zero_and_cap():
    assert spectrum(StepFunction(2)).coeffs == ()
    rep = bmo_norms(StepFunction(2))
    assert rep.bmo_sq.value == rep.rec_sq.value == 0
    b = random_step(rng_for(1, 0), 2, 6, 4, -2)
    with pytest.raises(CapExceeded):
        spectrum(b, cap=10)


# ------------------------------------------------------------- BMO norms


def test_bmo_single_haar():
    rep = bmo_norms(h_step(UNIT))
    assert rep.bmo_sq.value == 1 and rep.rec_sq.value == 1


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_carleson_function_spectrum(n):
    b = carleson_function(n)
    sp = spectrum(b, extra=1)
    assert sp.as_dict() == {R: 1 for R in carleson_family(n).support}
    rep = bmo_norms(b, spec=sp)
    assert rep.bmo_sq.value == F(n + 1, 2 ** (n - 1) * (n + 2))
    assert rep.rec_sq.value == F(1, 2**n)


def test_carleson_function_ratio_decreasing():
    ratios = [bmo_norms(carleson_function(n)).ratio for n in range(1, 6)]
    assert ratios[1] == F(2, 3)
    assert all(b < a for a, b in zip(ratios, ratios[1:]))


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6))
def test_rec_below_bmo(seed):
    rng = rng_for(seed, 0)
    rs = small_rects(2)
    picks = {rs[int(i)]: F(int(rng.integers(1, 5)), int(rng.integers(1, 3)))
             for i in rng.choice(len(rs), size=int(rng.integers(1, 8)), replace=False)}
    rep = bmo_norms(coefficient_function(picks, 2), extra=1)
    assert rep.rec_sq.value <= rep.bmo_sq.value


# ---------------------------------------------------- oscillation form


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_oscillation_matches_coefficient_form(seed):
    rng = rng_for(seed, 1)
    rs = [R for R in small_rects(2) if R.box.lo[0] >= 0 and R.box.lo[1] >= 0]
    picks = {rs[int(i)]: F(int(rng.integers(1, 5))) for i in rng.choice(len(rs), size=3, replace=False)}
    b = coefficient_function(picks, 2)
    sp = spectrum(b, extra=1)
    R0 = rect((1, 0), (1, 0))
    assert rect_oscillation(b, R0) == normalized_rec_sum(sp, R0)


def test_oscillation_single_haar():
    b = h_step(UNIT)
    sp = spectrum(b)
    assert rect_oscillation(b, UNIT) == normalized_rec_sum(sp, UNIT) == 1


# ---------------------------------------------------- projection check


def test_projection_singleton():
    sp = spectrum(h_step(UNIT))
    V = Region.from_boxes([UNIT], 2)
    r = bmo_projection_check(sp, V, lambda R: F(1), 1, F(1, 2))
    assert r.lower <= r.upper <= 1
    empty = bmo_projection_check(sp, V, lambda R: F(1), 2, F(1, 2))
    assert empty.upper == 0


def test_projection_carleson_function():
    sp = spectrum(carleson_function(2), extra=1)
    V = Region.from_boxes(carleson_family(2).support, 2)
    r = bmo_projection_check(sp, V, lambda R: F(1), 1, F(1, 2))
    # full projection: BMO^2 / BMO(rec)^2 = (3/8) / (1/4)
    assert r.lower <= F(3, 2) <= r.upper
    assert r.cm_restricted == cm_norm(sp.weight()).value
