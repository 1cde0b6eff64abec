from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from journe_lab.corpus import incomparable_collection, rng_for
from journe_lab.embedding import EmbSpec, EnlargementSpec, emb_directional, enlarged_set
from journe_lab.exact import power_bracket
from journe_lab.geometry import DyadicInterval, RectCollection, Region, box, dilate, rect
from journe_lab.grids import GridFamily
from journe_lab.journe import (
    IncomparabilityError,
    bb_empty_check,
    default_window,
    emb_bucket,
    enlargement_for,
    essential_disjointness,
    f_sets,
    good_bad_decompose,
    insertion_private_fractions,
    journe_sum,
    packing_check,
    packing_sweep,
    pipher_sum,
    replay,
    scale_separate,
    standard_reduction,
)

UNIT = rect((0, 0), (0, 0))


# ------------------------------------------------------------ separation


def _within_class_gaps_ok(cls, mu):
    for a in range(cls.dim):
        lens = sorted({r.sides[a].length for r in cls})
        if any(y / x <= mu for x, y in zip(lens, lens[1:])):
            return False
    return True


def test_scale_separate_examples():
    U = RectCollection([rect((k, 0), (0, 0)) for k in (0, 1, 2)])
    assert len(scale_separate(U, 4)) == 3
    same = RectCollection([rect((0, j), (0, 0)) for j in range(4)])
    assert len(scale_separate(same, 4)) == 1
    two = RectCollection([rect((0, 0), (0, 0)), rect((2, 1), (0, 0))])
    classes = scale_separate(two, 2)
    assert len(classes) == 1 and _within_class_gaps_ok(classes[0], 2)
    with pytest.raises(ValueError):
        scale_separate(U, 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([2, 3, 4, 8]))
def test_scale_separate_partition(seed, mu):
    rng = rng_for(seed, 0)
    U = incomparable_collection(rng, 8, 2, -3, 3, 4)
    classes = scale_separate(U, mu)
    assert sorted(r for c in classes for r in c) == sorted(U)
    assert all(_within_class_gaps_ok(c, mu) for c in classes)


def test_standard_reduction_examples():
    R = rect((0, 1), (0, 1))
    V = Region.from_boxes([dilate(R, [3, 3])], 2)
    spec = EmbSpec("uniform")
    out = standard_reduction(RectCollection([R]), V, spec, 3)
    assert [list(c) for c in out] == [[R]]
    assert standard_reduction(RectCollection([R]), V, spec, 8) == []


def test_standard_reduction_buckets_recover_members():
    rng = rng_for(3, 0)
    U = incomparable_collection(rng, 10, 2, 0, 1, 3)
    V = enlargement_for("uniform", U)
    spec = EmbSpec("uniform")
    got = set()
    for mu in (1, 2, 4, 8, 16, 32, 64):
        for c in standard_reduction(U, V, spec, mu):
            got |= set(c)
    assert got == set(U)


# ------------------------------------------------------------ Journe sums


def test_journe_sum_trivial():
    U = RectCollection([UNIT])
    V = U.shadow
    for variant in ("classic", "uniform", "redux", "pipher-rect"):
        rep = journe_sum(U, V, variant, F(1, 2))
        assert rep.lhs_lower == rep.lhs_upper == 1 and rep.shadow == 1 and rep.ratio_upper == 1


def test_journe_sum_staircase_against_per_rect_oracle():
    U = RectCollection([rect((k, 0), (2 - k, 0)) for k in range(3)])
    V = enlarged_set(U, EnlargementSpec(GridFamily.dyadic(2), F(1, 2), 1))
    rep = journe_sum(U, V, "classic", F(1, 2))
    lo = hi = F(0)
    for R in U:
        a, b = power_bracket(emb_directional(R, V, [0]).value, F(-1, 2))
        lo, hi = lo + a * R.measure, hi + b * R.measure
    assert (rep.lhs_lower, rep.lhs_upper) == (lo, hi)
    assert rep.lhs_lower <= rep.lhs_upper


def test_journe_sum_requires_incomparable():
    U = RectCollection([UNIT, rect((1, 0), (1, 0))])
    with pytest.raises(IncomparabilityError):
        journe_sum(U, U.shadow, "classic", F(1, 2))
    journe_sum(U, U.shadow, "uniform", F(1, 2))  # allowed


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_journe_lhs_monotone_under_subsets(seed):
    rng = rng_for(seed, 0)
    U = incomparable_collection(rng, 8, 2, 0, 2, 3)
    V = enlargement_for("classic", U)
    full = journe_sum(U, V, "classic", F(1, 2))
    keep = [r for r in U if rng.random() < 0.5] or [U[0]]
    part = journe_sum(RectCollection(keep, 2), V, "classic", F(1, 2))
    assert part.lhs_upper <= full.lhs_upper


# ------------------------------------------------------------ packing


def test_packing_examples():
    I = DyadicInterval(0, 0)
    U = RectCollection([rect((0, 0), (0, j)) for j in range(3)])
    res = packing_check(U, I, 0, U.shadow)
    assert res.total == 3 and res.bound == 6 and res.passed
    empty = packing_check(U, DyadicInterval(0, 5), 0, U.shadow)
    assert empty.total == 0 and empty.passed


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_packing_holds_on_incomparable_families(seed):
    rng = rng_for(seed, 0)
    U = incomparable_collection(rng, 30, 2, 0, 4, 6)
    assert all(r.passed for r in packing_sweep(U, U.shadow))


def test_packing_requires_incomparable():
    U = RectCollection([UNIT, rect((1, 0), (1, 0))])
    with pytest.raises(IncomparabilityError):
        packing_sweep(U, U.shadow)


# ------------------------------------------------------------ good / bad


def slab_fixture():
    R = UNIT
    slabs = [rect((1, 0), (-4, i)) for i in range(15)]  # [0,2) x [i/16, (i+1)/16)
    return R, slabs


def test_good_bad_singleton_and_disjoint():
    res = good_bad_decompose(RectCollection([UNIT]))
    assert list(res.good) == [UNIT] and all(len(b) == 0 for b in res.bad)
    two = RectCollection([UNIT, rect((0, 3), (0, 3))])
    assert len(good_bad_decompose(two).good) == 2


def test_slab_fixture_with_slabs_first():
    R, slabs = slab_fixture()
    U = RectCollection([R] + slabs)
    res = good_bad_decompose(U, F(8, 9), order=slabs + [R])
    # slabs are longer in the first coordinate and cover 15/16 > 8/9 of R
    assert list(res.bad[0]) == [R]
    step = [s for s in res.trace if s["op"] == "bad"][0]
    assert step["cover"] == "15/16"
    again = replay(U, res.trace)
    assert list(again.bad[0]) == [R] and again.trace == res.trace


def test_slab_fixture_default_order_keeps_all_good():
    R, slabs = slab_fixture()
    res = good_bad_decompose(RectCollection([R] + slabs))
    assert len(res.good) == 16


def test_good_bad_partition_and_private_fraction():
    rng = rng_for(11, 0)
    U = incomparable_collection(rng, 12, 2, -2, 1, 2)
    res = good_bad_decompose(U)
    members = list(res.good) + [r for b in res.bad for r in b]
    assert sorted(members) == sorted(U) and len(members) == len(U)
    assert all(x >= F(1, 9) for x in insertion_private_fractions(U, res))


def test_replay_rejects_mismatch():
    R, slabs = slab_fixture()
    U = RectCollection([R] + slabs)
    res = good_bad_decompose(U, F(8, 9), order=slabs + [R])
    bad = [dict(s) for s in res.trace]
    for s in bad:
        if s["op"] == "bad":
            s["cover"] = "1/2"
    with pytest.raises(ValueError):
        replay(U, bad)


def test_bb_empty_non_separated_fixture_fails():
    # nested scales 4, 2, 1 in the first coordinate are not separated: the
    # second pass over B_1 again produces a bad rectangle
    U = RectCollection([rect((2, 0), (0, 0)), rect((1, 0), (0, 0)), rect((0, 0), (0, 0))])
    r = bb_empty_check(U)
    assert not r.passed and r.counterexample["axis"] == 0


def test_bb_empty_single_rectangle():
    assert bb_empty_check(RectCollection([UNIT])).passed


def test_essential_disjointness_examples():
    assert essential_disjointness(RectCollection([UNIT, rect((0, 3), (0, 0))])) == 1
    assert essential_disjointness(RectCollection([UNIT, rect((1, 0), (0, 0))])) == 0


# ------------------------------------------------------------ F(I, j) sets


def test_f_sets_single_cube():
    R = rect((0, 0), (0, 0), (0, 0))
    U = RectCollection([R])
    fs = f_sets(U, U.shadow, 0)
    assert list(fs) == [(DyadicInterval(0, 0), 1)]
    assert fs[(DyadicInterval(0, 0), 1)] == U.shadow
    rep = pipher_sum(fs, F(1, 2), U.shadow.measure)
    lo, hi = power_bracket(F(2), F(-1, 2))
    assert (rep.sum_lower, rep.sum_upper) == (lo, hi)
    assert pipher_sum({}, F(1, 2), F(1)).sum_upper == 0


def test_f_sets_union_of_same_bucket():
    A, B = rect((0, 0), (0, 0), (0, 0)), rect((0, 0), (0, 1), (0, 0))
    U = RectCollection([A, B])
    fs = f_sets(U, U.shadow, 0)
    assert fs == {(DyadicInterval(0, 0), 1): U.shadow}


def test_emb_bucket():
    assert [emb_bucket(F(x)) for x in (1, F(3, 2), 2, 3, 4)] == [1, 1, 2, 2, 3]


def test_few_sets_lp_functional_is_finite_and_positive():
    U = RectCollection([rect((0, 0), (0, 0), (0, 0)), rect((0, 1), (-1, 0), (0, 0))])
    V = enlargement_for("few", U)
    rep = pipher_sum(f_sets(U, V, 0), F(1, 2), U.shadow.measure, 2, 2, F(1, 2), default_window(U, F(1, 2)))
    assert rep.lp_power_upper > 0 and rep.lp_ratio_power_upper is not None
