"""Enlarged sets, embeddedness solvers and small enlargements."""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .exact import as_fraction
from .geometry import Box, DyadicRect, GeometryError, Region, StepFunction, dilate
from .grids import DyadicGrid, GridFamily, delta, shifted_cover
from .maximal import (
    MaximalQuery,
    coordinate_superlevel,
    lattice_superlevel,
    superlevel,
)


class NotEmbedded(GeometryError):
    """The rectangle itself is not contained in V."""


@dataclass(frozen=True)
class EnlargementSpec:
    """Iterated superlevel enlargement of a shadow.

    ``iterations`` counts applications of the maximal operator; 0 means the
    shadow itself.
    """

    family: GridFamily = field(default_factory=lambda: GridFamily.dyadic(2))
    lam: Fraction = Fraction(1, 2)
    iterations: int = 1

    def __post_init__(self):
        lam = as_fraction(self.lam)
        if not 0 < lam < 1:
            raise ValueError("enlargement threshold must lie in (0, 1)")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        object.__setattr__(self, "lam", lam)


@dataclass(frozen=True)
class EmbSpec:
    """variant: 'directional' (axes in S), 'uniform' or 'pair' (first two axes)."""

    variant: str = "uniform"
    axes: tuple = ()

    def __post_init__(self):
        if self.variant not in ("directional", "uniform", "pair"):
            raise ValueError(f"unknown embeddedness variant {self.variant!r}")
        if self.variant == "directional" and not self.axes:
            raise ValueError("directional embeddedness needs a nonempty axis set")


def enlarged_set(U, spec: EnlargementSpec, cap: int = 5_000_000) -> Region:
    sh = U.shadow if hasattr(U, "shadow") else Region.from_boxes(U)
    if sh.is_empty:
        raise GeometryError("enlargement of an empty shadow")
    cur = sh
    for _ in range(spec.iterations):
        fam = spec.family
        if fam.dim != sh.dim:
            fam = GridFamily(fam.kind, sh.dim, fam.depth, fam.grid, fam.cell, fam.axes)
        nxt = superlevel(MaximalQuery(fam, cur, spec.lam), cap=cap)
        cur = nxt.union(cur)
    return cur


# ------------------------------------------------------------- emb solver


@dataclass(frozen=True)
class EmbResult:
    value: Fraction
    mu: tuple  # per-axis dilation factors at the optimum


def _dilation_vector(dim: int, axes: Iterable[int], mu: Fraction) -> list:
    axes = set(axes)
    return [mu if a in axes else Fraction(1) for a in range(dim)]


def breakpoints(R, V: Region, axes: Iterable[int]) -> list[Fraction]:
    """Dilation factors mu >= 1 at which a face of mu*R (on ``axes``) meets a line of V."""
    b = R.box
    out = {Fraction(1)}
    for a in axes:
        c, w = (b.lo[a] + b.hi[a]) / 2, b.hi[a] - b.lo[a]
        for x in V.coords[a]:
            mu = 2 * abs(x - c) / w
            if mu > 1:
                out.add(mu)
    return sorted(out)


def _largest_passing(R, V: Region, axes, cands: Sequence[Fraction]) -> Fraction:
    """Largest candidate with containment; containment is monotone in mu."""
    dim = R.box.dim
    ok = lambda mu: V.contains_box(dilate(R, _dilation_vector(dim, axes, mu)))
    lo, hi = 0, len(cands) - 1  # cands[0] == 1 passes
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if ok(cands[mid]):
            lo = mid
        else:
            hi = mid - 1
    return cands[lo]


def emb_directional(R, V: Region, axes: Iterable[int]) -> EmbResult:
    axes = tuple(sorted(set(axes)))
    if not V.contains_box(R.box):
        raise NotEmbedded(f"{R} is not contained in V")
    mu = _largest_passing(R, V, axes, breakpoints(R, V, axes))
    return EmbResult(mu, tuple(_dilation_vector(R.box.dim, axes, mu)))


def emb_uniform(R, V: Region) -> EmbResult:
    return emb_directional(R, V, range(R.box.dim))


def emb_pair(R, V: Region, axes: tuple = (0, 1)) -> EmbResult:
    """max mu1*mu2 with Dil_(mu1, mu2) R inside V (other axes fixed)."""
    a1, a2 = axes
    dim = R.box.dim
    if not V.contains_box(R.box):
        raise NotEmbedded(f"{R} is not contained in V")
    c1 = breakpoints(R, V, [a1])
    c2 = breakpoints(R, V, [a2])

    def ok(m1, m2):
        lam = [Fraction(1)] * dim
        lam[a1], lam[a2] = m1, m2
        return V.contains_box(dilate(R, lam))

    best = (Fraction(1), Fraction(1), Fraction(1))
    top1 = _largest_passing(R, V, [a1], c1)
    for m1 in c1[: bisect_left(c1, top1) + 1]:
        lo, hi = 0, len(c2) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if ok(m1, c2[mid]):
                lo = mid
            else:
                hi = mid - 1
        m2 = c2[lo]
        if m1 * m2 > best[0]:
            best = (m1 * m2, m1, m2)
    mu = [Fraction(1)] * dim
    mu[a1], mu[a2] = best[1], best[2]
    return EmbResult(best[0], tuple(mu))


def emb(R, spec: EmbSpec, V: Region) -> EmbResult:
    if spec.variant == "uniform":
        return emb_uniform(R, V)
    if spec.variant == "directional":
        return emb_directional(R, V, spec.axes)
    return emb_pair(R, V, spec.axes or (0, 1))


def contains_dilate(R, V: Region, mu: Sequence) -> bool:
    return V.contains_box(dilate(R, mu))


# ---------------------------------------------------- small enlargements


@dataclass
class SmallEnlargement:
    depth: int
    shadow: Region
    V0: Region
    V: Region

    @property
    def delta(self) -> Fraction:
        return delta(self.depth)

    @property
    def excess(self) -> Fraction:
        """|V| / |sh U| - 1"""
        return self.V.measure / self.shadow.measure - 1


def _two_stage(W: Region, grid_or_depth, level: Fraction, strict: bool) -> Region:
    """union over i != j of {M_i 1{M_j 1_W >= level} >= level} (2-D)."""
    out = W
    for i, j in ((0, 1), (1, 0)):
        inner = coordinate_superlevel(grid_or_depth, W, level, j, strict=strict).union(W)
        outer = coordinate_superlevel(grid_or_depth, inner, level, i, strict=strict)
        out = out.union(outer)
    return out


def small_enlargement(U, depth: int) -> SmallEnlargement:
    """Two-stage small enlargement of a 2-D collection.

    Stage one uses dyadic one-coordinate operators, stage two the shifted
    family D_depth, both at level 1 - delta. Superlevels are taken with ">=",
    which the four-translate containment needs (the relevant averages equal
    1 - delta exactly).
    """
    sh = U.shadow if hasattr(U, "shadow") else Region.from_boxes(U)
    if sh.dim != 2:
        raise GeometryError("small_enlargement is two-dimensional")
    level = 1 - delta(depth)
    V0 = _two_stage(sh, DyadicGrid(), level, strict=False)
    V = _two_stage(V0, depth, level, strict=False)
    return SmallEnlargement(depth, sh, V0, V)


def four_translates(R: DyadicRect, depth: int) -> list[Box]:
    """(R1 +- delta|R1|) x (R2 +- delta|R2|), built from shifted-cover witnesses."""
    c1 = shifted_cover(R.sides[0], depth)
    c2 = shifted_cover(R.sides[1], depth)
    return [Box((a.interval[0], b.interval[0]), (a.interval[1], b.interval[1])) for a in c1 for b in c2]


def four_translate_check(R: DyadicRect, se: SmallEnlargement) -> bool:
    """For dyadic R inside V0, all four translates lie inside V."""
    if not se.V0.contains_box(R.box):
        raise GeometryError("rectangle is not inside V0")
    return all(se.V.contains_box(b) for b in four_translates(R, se.depth))


def small_enlargement_1d(U, depth: int, axis: int, strict: bool = True) -> Region:
    """{M_axis^{D_depth} 1_{sh U} > 1 - delta}, united with the shadow."""
    sh = U.shadow if hasattr(U, "shadow") else Region.from_boxes(U)
    level = 1 - delta(depth)
    return coordinate_superlevel(depth, sh, level, axis, strict=strict).union(sh)


def lattice_enlargement(U, lam, cell) -> Region:
    sh = U.shadow if hasattr(U, "shadow") else Region.from_boxes(U)
    return lattice_superlevel(StepFunction.indicator(sh), lam, cell).union(sh)
