"""Standard and shifted dyadic grids.

A shifted grid ``D(dd, b, alpha)`` has scale-k members
``2**(k*dd + b) * ((0,1) + j + (-1)**k * alpha)`` with ``alpha = s/(2**dd + 1)``.
The union over ``b in [0, dd)`` and ``s = +-1`` is the family ``D_dd``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import ceil, floor, lcm
from typing import Iterable, Sequence

import numpy as np

from .exact import as_fraction, pow2
from .geometry import Box, DyadicInterval, DyadicRect


class CapExceeded(RuntimeError):
    """An enumeration would exceed the configured size limit."""


class NoWitness(RuntimeError):
    """A membership witness search failed (indicates an internal bug)."""


def delta(depth: int) -> Fraction:
    return Fraction(1, 2**depth + 1)


# ------------------------------------------------------------- 1-D grids


@dataclass(frozen=True)
class DyadicGrid:
    """The standard dyadic grid on the line."""

    def length(self, k: int) -> Fraction:
        return pow2(k)

    def interval(self, k: int, j: int) -> tuple[Fraction, Fraction]:
        L = pow2(k)
        return j * L, (j + 1) * L

    def offsets(self, k: int, lo: Fraction, hi: Fraction) -> range:
        """Offsets j whose scale-k member meets [lo, hi) in positive length."""
        L = pow2(k)
        return range(floor(lo / L), ceil(hi / L))

    def scale_of_length(self, length: Fraction) -> int:
        """Largest k with length(k) <= length."""
        return _floor_log2(length)

    def label(self) -> str:
        return "dyadic"


@dataclass(frozen=True)
class ShiftedGridId:
    depth: int
    phase: int = 0
    sign: int = 1

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("shift depth must be >= 1")
        if not 0 <= self.phase < self.depth:
            raise ValueError("phase must lie in [0, depth)")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @property
    def delta(self) -> Fraction:
        return delta(self.depth)

    @property
    def alpha(self) -> Fraction:
        return self.sign * self.delta

    def length(self, k: int) -> Fraction:
        return pow2(k * self.depth + self.phase)

    def _shift(self, k: int) -> Fraction:
        return self.alpha if k % 2 == 0 else -self.alpha

    def interval(self, k: int, j: int) -> tuple[Fraction, Fraction]:
        L, c = self.length(k), self._shift(k)
        return L * (j + c), L * (j + 1 + c)

    def offsets(self, k: int, lo: Fraction, hi: Fraction) -> range:
        L, c = self.length(k), self._shift(k)
        # L(j+1+c) > lo and L(j+c) < hi
        return range(floor(lo / L - c), ceil(hi / L - c))

    def scale_of_length(self, length: Fraction) -> int:
        """Largest k with length(k) <= length."""
        return (_floor_log2(length) - self.phase) // self.depth

    def label(self) -> str:
        return f"shifted:{self.depth}:{self.phase}:{'+' if self.sign > 0 else '-'}"


def _floor_log2(x: Fraction) -> int:
    x = Fraction(x)
    if x <= 0:
        raise ValueError("length must be positive")
    k = x.numerator.bit_length() - x.denominator.bit_length()
    while pow2(k) > x:
        k -= 1
    while pow2(k + 1) <= x:
        k += 1
    return k


def shifted_subgrids(depth: int) -> list[ShiftedGridId]:
    """The 2*depth grids whose union is D_depth."""
    return [ShiftedGridId(depth, b, s) for b in range(depth) for s in (1, -1)]


def shifted_interval(gid: ShiftedGridId, k: int, j: int) -> tuple[Fraction, Fraction]:
    return gid.interval(k, j)


# ------------------------------------------------------ grid verification


@dataclass(frozen=True)
class GridViolation:
    kind: str  # "overlap" or "decomposition"
    first: tuple
    second: tuple | None = None


def _overlap_violations(lo: np.ndarray, hi: np.ndarray, limit: int) -> list[tuple[int, int]]:
    """Pairs (a, b), a < b, that overlap without being nested."""
    out = []
    n = len(lo)
    for a in range(n - 1):
        l2, h2 = lo[a + 1 :], hi[a + 1 :]
        overlap = (lo[a] < h2) & (l2 < hi[a])
        nested = ((lo[a] <= l2) & (h2 <= hi[a])) | ((l2 <= lo[a]) & (hi[a] <= h2))
        bad = np.nonzero(overlap & ~nested)[0]
        for b in bad[: max(limit - len(out), 0)]:
            out.append((a, a + 1 + int(b)))
        if len(out) >= limit:
            break
    return out


def _int_endpoints(ivs: list) -> tuple[np.ndarray, np.ndarray]:
    den = 1
    for a, b in ivs:
        den = lcm(den, a.denominator, b.denominator)
    ints = [(int(a * den), int(b * den)) for a, b in ivs]
    big = max(max(abs(x), abs(y)) for x, y in ints) >= 2**62
    dtype = object if big else np.int64
    return np.array([x for x, _ in ints], dtype=dtype), np.array([y for _, y in ints], dtype=dtype)


def find_grid_violations(intervals: Sequence[tuple], limit: int = 100) -> list[GridViolation]:
    """Nested-or-disjoint check for an arbitrary finite list of (lo, hi) intervals."""
    ivs = [(as_fraction(a), as_fraction(b)) for a, b in intervals]
    if not ivs:
        return []
    lo, hi = _int_endpoints(ivs)
    return [GridViolation("overlap", ivs[a], ivs[b]) for a, b in _overlap_violations(lo, hi, limit)]


def verify_grid_property(grid, scales: Iterable[int], offsets: Iterable[int], limit: int = 100) -> list[GridViolation]:
    """Exhaustive nested-or-disjoint check plus the 2**depth child decomposition."""
    scales, offsets = list(scales), list(offsets)
    labels = [(k, j) for k in scales for j in offsets]
    lo, hi = _int_endpoints([grid.interval(k, j) for k, j in labels])
    out = [GridViolation("overlap", labels[a], labels[b]) for a, b in _overlap_violations(lo, hi, limit)]
    fan = 2**grid.depth if isinstance(grid, ShiftedGridId) else 2
    for k in scales:
        for j in offsets:
            if len(out) >= limit:
                return out
            lo, hi = grid.interval(k, j)
            kids = sorted(grid.interval(k - 1, c) for c in grid.offsets(k - 1, lo, hi))
            inside = [c for c in kids if lo <= c[0] and c[1] <= hi]
            ok = (
                len(inside) == fan
                and len(kids) == fan
                and inside[0][0] == lo
                and inside[-1][1] == hi
                and all(a[1] == b[0] for a, b in zip(inside, inside[1:]))
            )
            if not ok:
                out.append(GridViolation("decomposition", (k, j)))
    return out


# ------------------------------------------------------------ shifted cover


@dataclass(frozen=True)
class CoverWitness:
    grid: ShiftedGridId
    k: int
    j: int
    interval: tuple

    def reconstruct(self) -> tuple:
        return self.grid.interval(self.k, self.j)


def shifted_cover(I: DyadicInterval, depth: int) -> tuple[CoverWitness, CoverWitness]:
    """Witnesses that I + delta|I| and I - delta|I| are members of D_depth."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    d = delta(depth)
    b = I.k % depth
    k = (I.k - b) // depth
    out = []
    for t in (1, -1):
        target = (I.lo + t * d * I.length, I.hi + t * d * I.length)
        s = t if k % 2 == 0 else -t
        w = CoverWitness(ShiftedGridId(depth, b, s), k, I.j, target)
        if w.reconstruct() != target:
            w = _search_witness(target, depth)
        out.append(w)
    return out[0], out[1]


def _search_witness(target: tuple, depth: int) -> CoverWitness:
    length = target[1] - target[0]
    for g in shifted_subgrids(depth):
        num = _floor_log2(length) - g.phase
        if num % g.depth:
            continue
        k = num // g.depth
        if g.length(k) != length:
            continue
        for j in g.offsets(k, target[0], target[1]):
            if g.interval(k, j) == target:
                return CoverWitness(g, k, j, target)
    raise NoWitness(f"no shifted-grid witness for {target}")


# ---------------------------------------------------------------- families


@dataclass(frozen=True)
class GridFamily:
    """A family of boxes: dyadic, one shifted grid, the shifted union, or a lattice.

    ``axes`` optionally gives a per-coordinate kind for product families; each
    entry is a DyadicGrid or ShiftedGridId.
    """

    kind: str
    dim: int = 1
    depth: int = 0
    grid: ShiftedGridId | None = None
    cell: Fraction | None = None
    axes: tuple = field(default=())

    @classmethod
    def dyadic(cls, dim: int = 1) -> "GridFamily":
        return cls("dyadic", dim)

    @classmethod
    def shifted(cls, gid: ShiftedGridId, dim: int = 1) -> "GridFamily":
        return cls("shifted", dim, depth=gid.depth, grid=gid)

    @classmethod
    def shifted_union(cls, depth: int, dim: int = 1) -> "GridFamily":
        return cls("shifted-union", dim, depth=depth)

    @classmethod
    def lattice(cls, cell, dim: int = 1) -> "GridFamily":
        return cls("lattice", dim, cell=as_fraction(cell))

    def axis_grids(self) -> list:
        """Per-axis list of 1-D grids (only for grid kinds)."""
        if self.axes:
            return [[g] for g in self.axes]
        if self.kind == "dyadic":
            return [[DyadicGrid()] for _ in range(self.dim)]
        if self.kind == "shifted":
            return [[self.grid] for _ in range(self.dim)]
        if self.kind == "shifted-union":
            return [shifted_subgrids(self.depth) for _ in range(self.dim)]
        raise ValueError(f"{self.kind} family has no grid structure")


def _axis_intervals(grid, scales, lo, hi) -> list:
    out = []
    for k in scales:
        for j in grid.offsets(k, lo, hi):
            a, b = grid.interval(k, j)
            if a < hi and lo < b:
                out.append((k, j, a, b))
    return out


def enumerate_family(fam: GridFamily, bbox: Box, scales=None, cap: int = 1_000_000) -> list:
    """All family members meeting ``bbox`` (lattice: contained in it), deterministic order.

    ``scales`` is a list of integer scales applied to every axis, or a list of
    per-axis scale lists. Lattice families ignore it.
    """
    d = bbox.dim
    if fam.kind == "lattice":
        per_axis = []
        for a in range(d):
            c = fam.cell
            first, last = ceil(bbox.lo[a] / c), floor(bbox.hi[a] / c)
            pts = [i * c for i in range(first, last + 1)]
            per_axis.append([(p, q) for i, p in enumerate(pts) for q in pts[i + 1 :]])
        _check_cap(per_axis, cap)
        return [Box(tuple(p for p, _ in combo), tuple(q for _, q in combo)) for combo in product(*per_axis)]
    if scales is None:
        raise ValueError("grid families need a scale range")
    scales = list(scales)
    per_scale = [list(scales)] * d if not scales or isinstance(scales[0], int) else [list(s) for s in scales]
    out = []
    for grids_here in _axis_grid_choices(fam, d):
        per_axis = [_axis_intervals(g, per_scale[a], bbox.lo[a], bbox.hi[a]) for a, g in enumerate(grids_here)]
        _check_cap(per_axis, cap - len(out))
        for combo in product(*per_axis):
            if all(isinstance(g, DyadicGrid) for g in grids_here):
                out.append(DyadicRect(DyadicInterval(k, j) for k, j, _, _ in combo))
            else:
                out.append(Box(tuple(c[2] for c in combo), tuple(c[3] for c in combo)))
    seen, uniq = set(), []
    for r in out:
        key = r.box if isinstance(r, Box) else r
        if key not in seen:
            seen.add(key)
            uniq.append(r)
    return uniq


def _axis_grid_choices(fam: GridFamily, d: int):
    return [list(c) for c in product(*fam.axis_grids())]


def _check_cap(per_axis, cap):
    total = 1
    for p in per_axis:
        total *= len(p)
    if total > cap:
        raise CapExceeded(f"enumeration of {total} members exceeds cap")
