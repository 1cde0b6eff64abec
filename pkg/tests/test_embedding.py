from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from journe_lab.corpus import random_rect, rng_for, uniform_collection
from journe_lab.embedding import (
    EmbSpec,
    EnlargementSpec,
    NotEmbedded,
    breakpoints,
    contains_dilate,
    emb,
    emb_directional,
    emb_pair,
    emb_uniform,
    enlarged_set,
    four_translate_check,
    four_translates,
    small_enlargement,
    small_enlargement_1d,
)
from journe_lab.geometry import Box, RectCollection, Region, box, dilate, rect
from journe_lab.grids import GridFamily, delta

UNIT = rect((0, 0), (0, 0))


def staircase_region(top):
    return Region.from_boxes([box((0, 2**a), (0, 2 ** (top - a))) for a in range(top + 1)], 2)


def test_enlarged_set_unit_square_lambda_1_16():
    U = RectCollection([UNIT])
    V = enlarged_set(U, EnlargementSpec(GridFamily.dyadic(2), F(1, 16), 1))
    assert V == staircase_region(3)


def test_enlarged_set_iterations_monotone():
    U = RectCollection([UNIT, rect((0, 2), (1, 0))])
    prev = U.shadow
    assert enlarged_set(U, EnlargementSpec(GridFamily.dyadic(2), F(1, 2), 0)) == prev
    for j in (1, 2, 3):
        cur = enlarged_set(U, EnlargementSpec(GridFamily.dyadic(2), F(1, 2), j))
        assert cur.contains_region(prev)
        prev = cur


def test_enlargement_spec_validation():
    with pytest.raises(ValueError):
        EnlargementSpec(GridFamily.dyadic(2), F(1), 1)
    with pytest.raises(ValueError):
        EnlargementSpec(GridFamily.dyadic(2), F(1, 2), -1)
    with pytest.raises(ValueError):
        EmbSpec("directional", ())


def test_emb_on_the_staircase_enlargement():
    V = staircase_region(3)
    # dilations keep the centre, so any mu > 1 leaves the first quadrant: emb = 1
    assert emb_uniform(UNIT, V).value == 1
    assert emb_directional(UNIT, V, [0]).value == 1
    # the right-hand faces meet x = 2 (diagonal corner) and x = 8 at mu = 3 and 15
    assert F(3) in breakpoints(UNIT, V, [0, 1])
    assert F(15) in breakpoints(UNIT, V, [0])


def test_emb_symmetric_enlargement_gives_centered_values():
    V = Region.from_boxes([box((-1, 2), (-1, 2)), box((-7, 8), (0, 1))], 2)
    assert emb_uniform(UNIT, V).value == 3
    assert emb_directional(UNIT, V, [0]).value == 15
    assert emb_directional(UNIT, V, [1]).value == 3
    r = emb_pair(UNIT, V)
    assert r.value == 15 and r.mu == (15, 1)


def test_emb_of_the_rectangle_itself_is_one():
    R = rect((1, 2), (0, 5))
    V = Region.from_boxes([R], 2)
    for spec in (EmbSpec("uniform"), EmbSpec("directional", (1,)), EmbSpec("pair", (0, 1))):
        assert emb(R, spec, V).value == 1


def test_not_embedded():
    with pytest.raises(NotEmbedded):
        emb_uniform(UNIT, Region.from_boxes([box((0, 1), (0, F(1, 2)))], 2))


def _random_v(rng, R):
    boxes = [R.box]
    for _ in range(int(rng.integers(1, 5))):
        lo = [F(int(rng.integers(-8, 24)), 4) for _ in range(2)]
        hi = [x + F(int(rng.integers(1, 16)), 4) for x in lo]
        boxes.append(Box(tuple(lo), tuple(hi)))
    return Region.from_boxes(boxes, 2)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_solver_against_scan(seed):
    rng = rng_for(seed, 0)
    R = random_rect(rng, 2, -1, 1, 2)
    V = _random_v(rng, R)
    for axes in ([0], [1], [0, 1]):
        got = emb_directional(R, V, axes).value
        lam = lambda mu: [mu if a in axes else F(1) for a in range(2)]
        assert V.contains_box(dilate(R, lam(got)))
        # scan on a grid containing every breakpoint
        bps = breakpoints(R, V, axes)
        step = F(1, 16 * max(b.denominator for b in bps))
        mu = F(1)
        while mu <= bps[-1] + 1:
            assert V.contains_box(dilate(R, lam(mu))) == (mu <= got)
            mu += step


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_emb_invariants(seed):
    rng = rng_for(seed, 1)
    R = random_rect(rng, 2, -1, 1, 2)
    V = _random_v(rng, R)
    W = V.union(_random_v(rng, R))
    u = emb_uniform(R, V).value
    for j in (0, 1):
        d = emb_directional(R, V, [j]).value
        assert u <= d  # uniform <= each single direction
        assert emb_pair(R, V).value >= d  # pair >= each single direction
        assert emb_directional(R, W, [j]).value >= d  # monotone in V
    assert emb_uniform(R, W).value >= u


def test_small_enlargement_unit_square():
    se = small_enlargement(RectCollection([UNIT]), 4)
    assert se.V.contains_region(se.shadow) and se.V.contains_box(UNIT.box)
    assert se.excess == se.V.measure - 1 and se.excess >= 0
    assert four_translate_check(UNIT, se)
    d = delta(4)
    assert Box((d, d), (1 + d, 1 + d)) in four_translates(UNIT, 4)


def test_small_enlargement_excess_decreases():
    U = RectCollection([UNIT, rect((1, 0), (-1, 2))])
    ex = [small_enlargement(U, d).excess for d in range(2, 9)]
    assert all(b <= a for a, b in zip(ex, ex[1:]))
    assert ex[-1] < ex[0]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_four_translates_random(seed):
    rng = rng_for(seed, 2)
    U = uniform_collection(rng, int(rng.integers(1, 5)), 2, -1, 2, 3)
    se = small_enlargement(U, int(rng.integers(2, 5)))
    for R in U:
        assert four_translate_check(R, se)


def test_small_enlargement_1d():
    R = rect((0, 0), (0, 0), (0, 0))
    V = small_enlargement_1d(RectCollection([R]), 3, 0)
    assert V.contains_box(R.box)
    # two stacked rectangles with the same first side: their extensions merge
    U = RectCollection([rect((0, 0), (0, 0)), rect((0, 0), (0, 1))])
    V2 = small_enlargement_1d(U, 2, 1)
    assert V2.contains_box(box((0, 1), (0, 2)))
