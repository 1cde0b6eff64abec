from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from journe_lab.geometry import Box, DyadicInterval, box
from journe_lab.grids import (
    CapExceeded,
    DyadicGrid,
    GridFamily,
    ShiftedGridId,
    delta,
    enumerate_family,
    find_grid_violations,
    shifted_cover,
    shifted_subgrids,
    verify_grid_property,
)


def test_delta_values():
    assert [delta(d) for d in (1, 2, 3)] == [F(1, 3), F(1, 5), F(1, 9)]


def test_shifted_subgrid_count():
    for d in (1, 2, 3):
        gs = shifted_subgrids(d)
        assert len(gs) == 2 * d
        assert {(g.phase, g.sign) for g in gs} == {(b, s) for b in range(d) for s in (1, -1)}


def test_shifted_member_formula():
    # depth 1, phase 0, sign +: scale 0 members are (0,1) + j + 1/3
    g = ShiftedGridId(1, 0, 1)
    assert g.interval(0, 0) == (F(1, 3), F(4, 3))
    # odd scales flip the shift: 2 * ((0,1) + j - 1/3)
    assert g.interval(1, 0) == (F(-2, 3), F(4, 3))


@pytest.mark.parametrize("depth", [1, 2, 3])
def test_grid_property_small_window(depth):
    for g in shifted_subgrids(depth):
        assert verify_grid_property(g, range(-3, 4), range(-16, 17)) == []


def test_grid_property_detects_overlap():
    bad = find_grid_violations([(0, 2), (1, 3)])
    assert len(bad) == 1 and bad[0].kind == "overlap"
    assert find_grid_violations([(0, 4), (1, 2), (2, 4)]) == []


def test_union_of_shifted_grids_is_not_a_grid():
    # different subgrids overlap without nesting; only each subgrid is a grid
    a, b = shifted_subgrids(1)
    ivs = [a.interval(0, j) for j in range(-2, 3)] + [b.interval(0, j) for j in range(-2, 3)]
    assert find_grid_violations(ivs)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 3), st.integers(-6, 6), st.integers(-64, 64))
def test_shifted_cover_witness(depth, k, j):
    I = DyadicInterval(k, j)
    d = delta(depth)
    left, right = shifted_cover(I, depth)
    assert left.reconstruct() == left.interval == (I.lo + d * I.length, I.hi + d * I.length)
    assert right.reconstruct() == right.interval == (I.lo - d * I.length, I.hi - d * I.length)


def test_enumerate_dyadic_family():
    fam = GridFamily.dyadic(1)
    got = enumerate_family(fam, box((0, 2)), scales=[0, 1])
    assert sorted(r.box.lo[0] for r in got if r.measure == 1) == [0, 1]
    assert len(got) == 3


def test_enumerate_lattice_and_cap():
    fam = GridFamily.lattice(F(1, 2), 1)
    assert len(enumerate_family(fam, box((0, 1)))) == 3  # [0,1/2), [1/2,1), [0,1)
    with pytest.raises(CapExceeded):
        enumerate_family(GridFamily.lattice(F(1, 64), 2), box((0, 4), (0, 4)), cap=1000)
