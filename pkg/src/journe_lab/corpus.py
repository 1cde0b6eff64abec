"""Seeded instance generators.

Every instance draws from ``numpy.random.default_rng([seed, index])`` (PCG64),
so instance streams are independent of each other and of the order in which
they are generated.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .carleson import CarlesonWeight, carleson_family
from .geometry import Box, DyadicInterval, DyadicRect, Region, RectCollection, StepFunction


class InfeasibleConfig(ValueError):
    pass


MODES = ("uniform", "incomparable", "staircase", "carleson")


@dataclass(frozen=True)
class GenConfig:
    mode: str = "uniform"
    n: int = 8
    dim: int = 2
    kmin: int = 0  # smallest side scale
    kmax: int = 3  # largest side scale
    extent: int = 4  # rectangles live in [0, 2**extent)^dim
    seed: int = 0
    index: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise InfeasibleConfig(f"unknown mode {self.mode!r}")
        if self.n < 0 or self.dim < 1:
            raise InfeasibleConfig("n must be >= 0 and dim >= 1")
        if self.mode in ("uniform", "incomparable", "carleson"):
            if not self.kmin <= self.kmax <= self.extent:
                raise InfeasibleConfig("need kmin <= kmax <= extent")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "GenConfig":
        return cls(**obj)


def rng_for(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & (2**64 - 1), int(index)])


def random_rect(rng: np.random.Generator, dim: int, kmin: int, kmax: int, extent: int) -> DyadicRect:
    sides = []
    for _ in range(dim):
        k = int(rng.integers(kmin, kmax + 1))
        j = int(rng.integers(0, 2 ** (extent - k)))
        sides.append(DyadicInterval(k, j))
    return DyadicRect(sides)


def uniform_collection(rng, n, dim, kmin, kmax, extent) -> RectCollection:
    return RectCollection([random_rect(rng, dim, kmin, kmax, extent) for _ in range(n)], dim)


def incomparable_collection(rng, n, dim, kmin, kmax, extent, tries: int = 50) -> RectCollection:
    """Rejection sampling: keep a draw only if it is incomparable with all kept members."""
    kept: list = []
    budget = tries * max(n, 1)
    while len(kept) < n and budget > 0:
        budget -= 1
        r = random_rect(rng, dim, kmin, kmax, extent)
        if all(not (r.contains(s) or s.contains(r)) for s in kept):
            kept.append(r)
    if not kept and n:
        raise InfeasibleConfig("could not draw any rectangle")
    return RectCollection(kept, dim)


def staircase(n: int) -> RectCollection:
    return RectCollection(carleson_family(n).support, 2)


def random_weight(rng, n, dim, kmin, kmax, extent, denominators=(1, 2, 3, 4)) -> CarlesonWeight:
    U = uniform_collection(rng, n, dim, kmin, kmax, extent)
    vals = {r: Fraction(int(rng.integers(1, 5)), int(rng.choice(denominators))) for r in U}
    return CarlesonWeight.from_map(vals, dim)


def gen_collection(cfg: GenConfig):
    rng = rng_for(cfg.seed, cfg.index)
    if cfg.mode == "uniform":
        return uniform_collection(rng, cfg.n, cfg.dim, cfg.kmin, cfg.kmax, cfg.extent)
    if cfg.mode == "incomparable":
        return incomparable_collection(rng, cfg.n, cfg.dim, cfg.kmin, cfg.kmax, cfg.extent)
    if cfg.mode == "staircase":
        if cfg.dim != 2:
            raise InfeasibleConfig("staircases are two-dimensional")
        return staircase(cfg.n)
    return random_weight(rng, cfg.n, cfg.dim, cfg.kmin, cfg.kmax, cfg.extent)


def random_step(rng, dim: int, pieces: int, extent: int, finest: int, max_value: int = 4,
                signed: bool = False) -> StepFunction:
    """Disjoint random dyadic pieces with small rational values."""
    cells = {}
    for _ in range(pieces):
        r = random_rect(rng, dim, finest, max(finest, extent - 1), extent)
        if any(r.intersects(s) for s in cells):
            continue
        lo = -max_value if signed else 0
        v = Fraction(int(rng.integers(lo, max_value + 1)), int(rng.integers(1, 4)))
        cells[r] = v
    if not cells:
        return StepFunction(dim)
    return StepFunction.from_pieces(list(cells.items()), dim)


def random_union_1d(rng, pieces: int, extent: int = 6) -> Region:
    """Union of random intervals with integer endpoints in [0, 2**extent)."""
    boxes = []
    for _ in range(pieces):
        a = int(rng.integers(0, 2**extent - 1))
        b = int(rng.integers(a + 1, min(2**extent, a + 2 ** (extent - 2)) + 1))
        boxes.append(Box((Fraction(a),), (Fraction(b),)))
    return Region.from_boxes(boxes, 1)
