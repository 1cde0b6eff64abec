import json
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from journe_lab import serialize as ser
from journe_lab.carleson import CarlesonWeight, carleson_family
from journe_lab.corpus import (
    GenConfig,
    InfeasibleConfig,
    gen_collection,
    incomparable_collection,
    random_step,
    rng_for,
)
from journe_lab.geometry import Box, RectCollection, Region, box


def test_seed_42_singleton_is_reproducible():
    cfg = GenConfig("uniform", n=1, seed=42)
    a = ser.dumps(ser.collection_to_json(gen_collection(cfg)))
    b = ser.dumps(ser.collection_to_json(gen_collection(GenConfig.from_json(cfg.to_json()))))
    assert a == b
    assert len(gen_collection(cfg)) == 1


def test_streams_split_per_index():
    a = gen_collection(GenConfig("uniform", n=6, seed=3, index=0))
    b = gen_collection(GenConfig("uniform", n=6, seed=3, index=1))
    assert list(a) != list(b)
    assert list(a) == list(gen_collection(GenConfig("uniform", n=6, seed=3, index=0)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**63), st.integers(1, 20))
def test_incomparable_mode_post_check(seed, n):
    U = gen_collection(GenConfig("incomparable", n=n, seed=seed))
    assert U.is_pairwise_incomparable()


def test_staircase_mode_matches_family():
    U = gen_collection(GenConfig("staircase", n=2))
    assert set(U) == set(carleson_family(2).support) and len(U) == 3


def test_carleson_mode_gives_weight():
    w = gen_collection(GenConfig("carleson", n=5, seed=1))
    assert isinstance(w, CarlesonWeight) and all(v > 0 for _, v in w.entries)


@pytest.mark.parametrize("kw", [
    {"mode": "nope"},
    {"n": -1},
    {"dim": 0},
    {"kmin": 3, "kmax": 1},
    {"kmax": 9, "extent": 4},
])
def test_infeasible_configs(kw):
    with pytest.raises(InfeasibleConfig):
        GenConfig(**kw)


def test_staircase_mode_requires_2d():
    with pytest.raises(InfeasibleConfig):
        gen_collection(GenConfig("staircase", n=2, dim=3))


# ------------------------------------------------------------- JSON


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([1, 2, 3]))
def test_collection_round_trip(seed, dim):
    U = incomparable_collection(rng_for(seed, 0), 6, dim, -2, 2, 3)
    text = ser.dumps(ser.collection_to_json(U))
    back = ser.collection_from_json(json.loads(text))
    assert back == U and ser.dumps(ser.collection_to_json(back)) == text


def test_region_and_step_round_trip():
    W = Region.from_boxes([box((0, F(1, 3)), (0, 1)), box((F(1, 3), 2), (F(-1, 4), F(1, 2)))], 2)
    assert ser.region_from_json(ser.region_to_json(W)) == W
    f = random_step(rng_for(7, 0), 2, 5, 3, -1, signed=True)
    assert ser.step_from_json(ser.step_to_json(f)) == f


def test_coordinate_encoding():
    assert ser.coord_from_json(ser.coord_to_json(F(3, 8))) == F(3, 8)
    assert ser.coord_to_json(F(1, 3)) == "1/3"
    assert ser.coord_from_json(5) == 5
    with pytest.raises(Exception):
        ser.coord_from_json(1.5)


def test_non_dyadic_rect_stays_a_box():
    obj = {"lo": ["1/3", 0], "hi": [1, 1]}
    assert isinstance(ser.rect_from_json(obj), Box)


def test_save_and_load(tmp_path):
    p = tmp_path / "u.json"
    U = gen_collection(GenConfig("uniform", n=4, seed=1))
    ser.save_file(str(p), ser.collection_to_json(U))
    assert ser.collection_from_json(ser.load_file(str(p))) == U
    assert p.read_text().endswith("\n")
