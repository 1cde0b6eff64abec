"""Dyadic intervals, boxes, rectangles and exact regions.

A :class:`Region` is stored as a boolean mask over a per-axis grid of rational
coordinates. The grid is kept minimal (no redundant lines, no empty border
slabs), which makes the representation canonical: two regions that agree up to
a null set have identical grids and masks.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from itertools import product
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .exact import as_fraction, lcm, pow2


class GeometryError(ValueError):
    pass


class DimensionMismatch(GeometryError):
    pass


class InvalidDilation(GeometryError):
    pass


# ---------------------------------------------------------------- intervals


class DyadicInterval(NamedTuple):
    """[j 2^k, (j+1) 2^k)"""

    k: int
    j: int

    @property
    def lo(self) -> Fraction:
        return self.j * pow2(self.k)

    @property
    def hi(self) -> Fraction:
        return (self.j + 1) * pow2(self.k)

    @property
    def length(self) -> Fraction:
        return pow2(self.k)

    def parent(self, levels: int = 1) -> "DyadicInterval":
        return DyadicInterval(self.k + levels, self.j >> levels)

    def children(self) -> tuple["DyadicInterval", "DyadicInterval"]:
        return DyadicInterval(self.k - 1, 2 * self.j), DyadicInterval(self.k - 1, 2 * self.j + 1)

    def contains(self, other: "DyadicInterval") -> bool:
        if other.k > self.k:
            return False
        return other.j >> (self.k - other.k) == self.j

    def intersects(self, other: "DyadicInterval") -> bool:
        return self.contains(other) or other.contains(self)

    @classmethod
    def containing(cls, x: Fraction, k: int) -> "DyadicInterval":
        x = Fraction(x)
        return cls(k, (x / pow2(k)).__floor__())

    @classmethod
    def from_endpoints(cls, lo, hi) -> "DyadicInterval":
        lo, hi = as_fraction(lo), as_fraction(hi)
        length = hi - lo
        if length <= 0 or length.numerator & (length.numerator - 1) or length.denominator & (length.denominator - 1):
            raise GeometryError(f"[{lo},{hi}) is not a dyadic interval")
        if length.numerator != 1 and length.denominator != 1:
            raise GeometryError(f"[{lo},{hi}) is not a dyadic interval")
        k = length.numerator.bit_length() - 1 if length.denominator == 1 else -(length.denominator.bit_length() - 1)
        j = lo / length
        if j.denominator != 1:
            raise GeometryError(f"[{lo},{hi}) is not aligned to its length")
        return cls(k, int(j))


# -------------------------------------------------------------------- boxes


@dataclass(frozen=True)
class Box:
    """Half-open axis-aligned box prod [lo_i, hi_i) with rational corners."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(as_fraction(x) for x in self.lo)
        hi = tuple(as_fraction(x) for x in self.hi)
        if len(lo) != len(hi) or not lo:
            raise GeometryError("box corners must have equal positive length")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def is_empty(self) -> bool:
        return any(h <= l for l, h in zip(self.lo, self.hi))

    @property
    def widths(self) -> tuple:
        return tuple(h - l for l, h in zip(self.lo, self.hi))

    @property
    def center(self) -> tuple:
        return tuple((l + h) / 2 for l, h in zip(self.lo, self.hi))

    @property
    def measure(self) -> Fraction:
        if self.is_empty:
            return Fraction(0)
        return reduce(lambda a, b: a * b, self.widths, Fraction(1))

    @property
    def box(self) -> "Box":
        return self

    def intersection(self, other: "Box") -> "Box":
        _check_dim(self.dim, other.dim)
        return Box(tuple(map(max, self.lo, other.lo)), tuple(map(min, self.hi, other.hi)))

    def contains_box(self, other: "Box") -> bool:
        """other subset of self up to a null set (closure containment)."""
        if other.is_empty:
            return True
        return all(a <= c and d <= b for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi))

    def translate(self, shift: Sequence) -> "Box":
        shift = [as_fraction(s) for s in shift]
        return Box(tuple(l + s for l, s in zip(self.lo, shift)), tuple(h + s for h, s in zip(self.hi, shift)))

    def __repr__(self):
        sides = " x ".join(f"[{l},{h})" for l, h in zip(self.lo, self.hi))
        return f"Box({sides})"


class DyadicRect:
    """Product of d dyadic intervals."""

    __slots__ = ("sides", "_box", "_hash")

    def __init__(self, sides: Iterable[DyadicInterval]):
        sides = tuple(s if isinstance(s, DyadicInterval) else DyadicInterval(*s) for s in sides)
        if not sides:
            raise GeometryError("a rectangle needs at least one side")
        self.sides = sides
        self._box = None
        self._hash = hash(sides)

    @classmethod
    def from_box(cls, box: Box) -> "DyadicRect":
        return cls(DyadicInterval.from_endpoints(l, h) for l, h in zip(box.lo, box.hi))

    @property
    def dim(self) -> int:
        return len(self.sides)

    @property
    def box(self) -> Box:
        if self._box is None:
            self._box = Box(tuple(s.lo for s in self.sides), tuple(s.hi for s in self.sides))
        return self._box

    @property
    def lo(self):
        return self.box.lo

    @property
    def hi(self):
        return self.box.hi

    @property
    def measure(self) -> Fraction:
        return pow2(sum(s.k for s in self.sides))

    @property
    def scales(self) -> tuple:
        return tuple(s.k for s in self.sides)

    def contains(self, other: "DyadicRect") -> bool:
        return all(a.contains(b) for a, b in zip(self.sides, other.sides))

    def intersects(self, other: "DyadicRect") -> bool:
        return all(a.intersects(b) for a, b in zip(self.sides, other.sides))

    def scaled(self, levels: int) -> "DyadicRect":
        """Image under x -> 2**levels x."""
        return DyadicRect(DyadicInterval(s.k + levels, s.j) for s in self.sides)

    def __eq__(self, other):
        return isinstance(other, DyadicRect) and self.sides == other.sides

    def __lt__(self, other):
        return sort_key(self) < sort_key(other)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        sides = " x ".join(f"[{s.lo},{s.hi})" for s in self.sides)
        return f"DyadicRect({sides})"


def sort_key(r) -> tuple:
    """Decreasing area, then lexicographic lower corner, then upper corner."""
    b = r.box
    return (-b.measure, b.lo, b.hi)


def _check_dim(a: int, b: int):
    if a != b:
        raise DimensionMismatch(f"dimension mismatch: {a} vs {b}")


def rect(*sides) -> DyadicRect:
    """rect((k, j), (k, j), ...) or rect(DyadicInterval, ...)"""
    return DyadicRect(sides)


def box(*intervals) -> Box:
    """box((lo, hi), (lo, hi), ...)"""
    return Box(tuple(as_fraction(i[0]) for i in intervals), tuple(as_fraction(i[1]) for i in intervals))


def dilate(r, lams: Sequence) -> Box:
    """Same centre, j-th width scaled by lams[j]."""
    b = r.box
    lams = [as_fraction(x) for x in lams]
    if len(lams) != b.dim:
        raise DimensionMismatch("dilation vector has wrong length")
    if any(x <= 0 for x in lams):
        raise InvalidDilation(f"dilation factors must be positive: {lams}")
    lo, hi = [], []
    for l, h, lam in zip(b.lo, b.hi, lams):
        c, half = (l + h) / 2, (h - l) * lam / 2
        lo.append(c - half)
        hi.append(c + half)
    return Box(tuple(lo), tuple(hi))


# ------------------------------------------------------------- grid algebra


def _merge(*coord_lists) -> tuple:
    out = set()
    for c in coord_lists:
        out.update(c)
    return tuple(sorted(out))


def _cell_index_map(old: Sequence, new: Sequence) -> np.ndarray:
    """For each cell of ``new`` the index of the ``old`` cell containing it, or -1."""
    n_old = len(old) - 1
    idx = np.full(max(len(new) - 1, 0), -1, dtype=np.intp)
    if n_old <= 0:
        return idx
    lo_old, hi_old = old[0], old[-1]
    for i in range(len(new) - 1):
        x = new[i]
        if lo_old <= x < hi_old:
            idx[i] = bisect_right(old, x) - 1
    return idx


def _refine(coords, arr: np.ndarray, new_coords, fill) -> np.ndarray:
    """Resample a grid array onto a finer grid; cells outside the old grid get ``fill``."""
    out = arr
    for axis, (old, new) in enumerate(zip(coords, new_coords)):
        if tuple(old) == tuple(new):
            continue
        idx = _cell_index_map(old, new)
        pad_shape = list(out.shape)
        pad_shape[axis] = 1
        pad = np.full(pad_shape, fill, dtype=out.dtype)
        padded = np.concatenate([out, pad], axis=axis)
        idx = np.where(idx < 0, padded.shape[axis] - 1, idx)
        out = np.take(padded, idx, axis=axis)
    return out


def _slabs_differ(arr: np.ndarray, axis: int) -> np.ndarray:
    a = np.moveaxis(arr, axis, 0)
    if a.shape[0] < 2:
        return np.zeros(0, dtype=bool)
    diff = a[1:] != a[:-1]
    return diff.reshape(diff.shape[0], -1).any(axis=1)


def _canonical(coords, arr: np.ndarray, is_zero) -> tuple:
    """Trim zero border slabs and merge identical neighbours along every axis."""
    coords = [tuple(c) for c in coords]
    nz = ~is_zero(arr)
    if arr.size == 0 or not nz.any():
        return tuple(() for _ in coords), np.zeros((0,) * len(coords), dtype=arr.dtype)
    for axis in range(arr.ndim):
        other = tuple(a for a in range(arr.ndim) if a != axis)
        live = nz.any(axis=other) if other else nz
        first = int(np.argmax(live))
        last = len(live) - int(np.argmax(live[::-1]))
        if first > 0 or last < arr.shape[axis]:
            sl = [slice(None)] * arr.ndim
            sl[axis] = slice(first, last)
            arr, nz = arr[tuple(sl)], nz[tuple(sl)]
            coords[axis] = coords[axis][first : last + 1]
        differ = _slabs_differ(arr, axis)
        if not differ.all():
            starts = [0] + [i + 1 for i, d in enumerate(differ) if d]
            arr = np.take(arr, starts, axis=axis)
            nz = np.take(nz, starts, axis=axis)
            c = coords[axis]
            coords[axis] = tuple(c[s] for s in starts) + (c[-1],)
    return tuple(coords), arr


def _int_widths(coords: Sequence) -> tuple[list, int]:
    den = 1
    for c in coords:
        den = lcm(den, c.denominator)
    ints = [int(c * den) for c in coords]
    return [b - a for a, b in zip(ints, ints[1:])], den


def _contract(arr: np.ndarray, weights: list) -> int:
    """sum over cells of arr * prod_axis weights[axis][i]; exact integer result."""
    big = any(w and max(w).bit_length() > 20 for w in weights) or arr.size > 1 << 20
    if arr.dtype == bool:
        arr = arr.astype(object if big else np.int64)
    elif big and arr.dtype != object:
        arr = arr.astype(object)
    out = arr
    for w in reversed(weights):
        wv = np.array(w, dtype=out.dtype)
        out = out @ wv if out.ndim > 1 else out.dot(wv)
    return int(out) if out.dtype != object else out


# ------------------------------------------------------------------- region


class Region:
    """Finite union of boxes, exact up to null sets."""

    __slots__ = ("dim", "coords", "mask", "_measure", "_boxes")

    def __init__(self, dim: int, coords=None, mask=None, _canon=False):
        self.dim = dim
        if coords is None:
            coords, mask = tuple(() for _ in range(dim)), np.zeros((0,) * dim, dtype=bool)
        elif not _canon:
            coords, mask = _canonical(coords, np.asarray(mask, dtype=bool), lambda a: ~a)
        mask = np.ascontiguousarray(mask, dtype=bool)
        mask.setflags(write=False)
        self.coords = tuple(tuple(c) for c in coords)
        self.mask = mask
        self._measure = None
        self._boxes = None

    @classmethod
    def empty(cls, dim: int) -> "Region":
        return cls(dim)

    @classmethod
    def from_boxes(cls, boxes: Iterable, dim: int | None = None) -> "Region":
        boxes = [b.box for b in boxes]
        boxes = [b for b in boxes if not b.is_empty]
        if dim is None:
            if not boxes:
                raise GeometryError("dimension needed for an empty box list")
            dim = boxes[0].dim
        for b in boxes:
            _check_dim(dim, b.dim)
        if not boxes:
            return cls(dim)
        coords = [sorted({x for b in boxes for x in (b.lo[a], b.hi[a])}) for a in range(dim)]
        index = [{x: i for i, x in enumerate(c)} for c in coords]
        mask = np.zeros(tuple(len(c) - 1 for c in coords), dtype=bool)
        for b in boxes:
            mask[tuple(slice(index[a][b.lo[a]], index[a][b.hi[a]]) for a in range(dim))] = True
        return cls(dim, coords, mask)

    @classmethod
    def from_box(cls, b) -> "Region":
        return cls.from_boxes([b])

    @property
    def is_empty(self) -> bool:
        return self.mask.size == 0

    @property
    def measure(self) -> Fraction:
        if self._measure is None:
            if self.is_empty:
                self._measure = Fraction(0)
            else:
                ws, dens = zip(*(_int_widths(c) for c in self.coords))
                total = _contract(self.mask, list(ws))
                self._measure = Fraction(total, reduce(lambda a, b: a * b, dens, 1))
        return self._measure

    def bbox(self) -> Box | None:
        if self.is_empty:
            return None
        return Box(tuple(c[0] for c in self.coords), tuple(c[-1] for c in self.coords))

    def boxes(self) -> list:
        """Canonical disjoint box decomposition (slab recursion, lexicographic order)."""
        if self._boxes is None:
            self._boxes = [] if self.is_empty else _decompose(self.coords, self.mask)
        return list(self._boxes)

    def _aligned(self, other: "Region"):
        _check_dim(self.dim, other.dim)
        coords = tuple(_merge(a, b) for a, b in zip(self.coords, other.coords))
        if any(len(c) < 2 for c in coords):
            return None
        return coords, _refine(self.coords, self.mask, coords, False), _refine(other.coords, other.mask, coords, False)

    def _combine(self, other: "Region", op) -> "Region":
        if self.is_empty and other.is_empty:
            return Region(self.dim)
        if self.is_empty or other.is_empty:
            _check_dim(self.dim, other.dim)
            coords = self.coords if other.is_empty else other.coords
            fake = np.zeros(tuple(max(len(c) - 1, 0) for c in coords), dtype=bool)
            a = self.mask if not self.is_empty else fake
            b = other.mask if not other.is_empty else fake
            return Region(self.dim, coords, op(a, b))
        coords, a, b = self._aligned(other)
        return Region(self.dim, coords, op(a, b))

    def union(self, other: "Region") -> "Region":
        return self._combine(other, np.logical_or)

    def intersect(self, other: "Region") -> "Region":
        return self._combine(other, np.logical_and)

    def subtract(self, other: "Region") -> "Region":
        return self._combine(other, lambda a, b: a & ~b)

    __or__ = union
    __and__ = intersect
    __sub__ = subtract

    def contains_box(self, b) -> bool:
        """measure(b minus self) == 0"""
        b = b.box
        _check_dim(self.dim, b.dim)
        if b.is_empty:
            return True
        if self.is_empty:
            return False
        sl = []
        for c, lo, hi in zip(self.coords, b.lo, b.hi):
            if lo < c[0] or hi > c[-1]:
                return False
            sl.append(slice(bisect_right(c, lo) - 1, bisect_left(c, hi)))
        return bool(self.mask[tuple(sl)].all())

    def contains_region(self, other: "Region") -> bool:
        return other.subtract(self).is_empty

    def measure_in_box(self, b) -> Fraction:
        return self.intersect(Region.from_box(b)).measure

    def __eq__(self, other):
        if not isinstance(other, Region):
            return NotImplemented
        return self.dim == other.dim and self.coords == other.coords and np.array_equal(self.mask, other.mask)

    def __hash__(self):
        return hash((self.dim, self.coords, self.mask.tobytes()))

    def __repr__(self):
        return f"Region(dim={self.dim}, boxes={len(self.boxes())}, measure={self.measure})"


def _decompose(coords, mask) -> list:
    if mask.ndim == 1:
        out, i, n = [], 0, mask.shape[0]
        while i < n:
            if mask[i]:
                j = i
                while j < n and mask[j]:
                    j += 1
                out.append(Box((coords[0][i],), (coords[0][j],)))
                i = j
            else:
                i += 1
        return out
    out = []
    xs = coords[0]
    n = mask.shape[0]
    i = 0
    while i < n:
        if not mask[i].any():
            i += 1
            continue
        j = i + 1
        while j < n and np.array_equal(mask[j], mask[i]):
            j += 1
        for sub in _decompose(coords[1:], mask[i]):
            out.append(Box((xs[i],) + sub.lo, (xs[j],) + sub.hi))
        i = j
    return out


# ----------------------------------------------------------- functional API


def measure(r) -> Fraction:
    return r.measure


def region_union(a: Region, b: Region) -> Region:
    return a.union(b)


def region_intersect(a: Region, b: Region) -> Region:
    return a.intersect(b)


def region_subtract(a: Region, b: Region) -> Region:
    return a.subtract(b)


def contains_ae(inner, outer) -> bool:
    if isinstance(outer, Region):
        return outer.contains_box(inner)
    return outer.box.contains_box(inner.box)


def shadow(rects: Iterable, dim: int | None = None) -> Region:
    rects = list(rects)
    if dim is None:
        dim = getattr(rects, "dim", None) or (rects[0].dim if rects else None)
    return Region.from_boxes(rects, dim)


# ------------------------------------------------------------ step function


class StepFunction:
    """Piecewise-constant rational function with finite support.

    Maximal operators require nonnegative inputs; Haar analysis allows signs.
    """

    __slots__ = ("dim", "coords", "values")

    def __init__(self, dim: int, coords=None, values=None, _canon=False):
        self.dim = dim
        if coords is None:
            coords, values = tuple(() for _ in range(dim)), np.zeros((0,) * dim, dtype=object)
        else:
            values = np.asarray(values, dtype=object)
            if not _canon:
                coords, values = _canonical(coords, values, lambda a: a == 0)
        self.coords = tuple(tuple(c) for c in coords)
        self.values = values

    @classmethod
    def from_pieces(cls, pieces: Iterable, dim: int | None = None) -> "StepFunction":
        pieces = [(b.box, as_fraction(v)) for b, v in pieces]
        pieces = [(b, v) for b, v in pieces if not b.is_empty]
        if dim is None:
            if not pieces:
                raise GeometryError("dimension needed for empty piece list")
            dim = pieces[0][0].dim
        if not pieces:
            return cls(dim)
        coords = [sorted({x for b, _ in pieces for x in (b.lo[a], b.hi[a])}) for a in range(dim)]
        index = [{x: i for i, x in enumerate(c)} for c in coords]
        values = np.full(tuple(len(c) - 1 for c in coords), Fraction(0), dtype=object)
        taken = np.zeros(values.shape, dtype=bool)
        for b, v in pieces:
            sl = tuple(slice(index[a][b.lo[a]], index[a][b.hi[a]]) for a in range(dim))
            if taken[sl].any():
                raise GeometryError("step function pieces must be disjoint")
            taken[sl] = True
            values[sl] = v
        return cls(dim, coords, values)

    @classmethod
    def indicator(cls, region: Region, value=1) -> "StepFunction":
        if region.is_empty:
            return cls(region.dim)
        values = np.where(region.mask, as_fraction(value), Fraction(0)).astype(object)
        return cls(region.dim, region.coords, values)

    @property
    def is_zero(self) -> bool:
        return self.values.size == 0

    def support(self) -> Region:
        if self.is_zero:
            return Region(self.dim)
        return Region(self.dim, self.coords, self.values != 0)

    def pieces(self) -> list:
        out = []
        for idx in product(*(range(n) for n in self.values.shape)):
            v = self.values[idx]
            if v:
                out.append((Box(tuple(self.coords[a][i] for a, i in enumerate(idx)),
                                tuple(self.coords[a][i + 1] for a, i in enumerate(idx))), v))
        return out

    def cell_volumes(self) -> np.ndarray:
        widths = [np.array([b - a for a, b in zip(c, c[1:])], dtype=object) for c in self.coords]
        vol = widths[0]
        for w in widths[1:]:
            vol = np.multiply.outer(vol, w)
        return vol

    def integral(self) -> Fraction:
        if self.is_zero:
            return Fraction(0)
        return Fraction(np.sum(self.values * self.cell_volumes()))

    def lp_power(self, p: int) -> Fraction:
        """integral of |f|**p (exact; integer p >= 1)."""
        if self.is_zero:
            return Fraction(0)
        return Fraction(np.sum(np.abs(self.values) ** p * self.cell_volumes()))

    def mass_in_box(self, b) -> Fraction:
        b = b.box
        if self.is_zero or b.is_empty:
            return Fraction(0)
        overlaps = []
        for c, lo, hi in zip(self.coords, b.lo, b.hi):
            ov = np.array([max(Fraction(0), min(hi, y) - max(lo, x)) for x, y in zip(c, c[1:])], dtype=object)
            overlaps.append(ov)
        out = self.values
        for w in reversed(overlaps):
            out = out.dot(w)
        return Fraction(out)

    def average(self, b) -> Fraction:
        b = b.box
        m = b.measure
        if m <= 0:
            raise GeometryError("average over a degenerate box")
        return self.mass_in_box(b) / m

    def superlevel(self, t, strict: bool = True) -> Region:
        t = as_fraction(t)
        if self.is_zero:
            return Region(self.dim)
        mask = (self.values > t) if strict else (self.values >= t)
        return Region(self.dim, self.coords, mask.astype(bool))

    def on_grid(self, coords) -> np.ndarray:
        """Values resampled on a grid whose lines include this function's lines."""
        if self.is_zero:
            return np.full(tuple(len(c) - 1 for c in coords), Fraction(0), dtype=object)
        return _refine(self.coords, self.values, coords, Fraction(0))

    def _binary(self, other: "StepFunction", op) -> "StepFunction":
        _check_dim(self.dim, other.dim)
        if self.is_zero and other.is_zero:
            return StepFunction(self.dim)
        coords = tuple(_merge(a, b) for a, b in zip(self.coords, other.coords))
        return StepFunction(self.dim, coords, op(self.on_grid(coords), other.on_grid(coords)))

    def __add__(self, other: "StepFunction") -> "StepFunction":
        return self._binary(other, lambda a, b: a + b)

    def scale(self, c) -> "StepFunction":
        c = as_fraction(c)
        if self.is_zero or c == 0:
            return StepFunction(self.dim)
        return StepFunction(self.dim, self.coords, self.values * c)

    @property
    def is_nonnegative(self) -> bool:
        return all(v >= 0 for v in self.values.flat)

    def __neg__(self) -> "StepFunction":
        return self.scale(-1)

    def __sub__(self, other: "StepFunction") -> "StepFunction":
        return self._binary(other, lambda a, b: a - b)

    def max_value(self) -> Fraction:
        return max(self.values.flat, default=Fraction(0))

    def __eq__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        return (self.dim == other.dim and self.coords == other.coords
                and self.values.shape == other.values.shape and bool(np.all(self.values == other.values)))

    def __repr__(self):
        return f"StepFunction(dim={self.dim}, pieces={len(self.pieces())}, integral={self.integral()})"


# --------------------------------------------------------------- collection


class RectCollection:
    """Finite family of rectangles (dyadic or general boxes); duplicates collapse."""

    def __init__(self, members: Iterable = (), dim: int | None = None, labels: Sequence | None = None):
        seen, out, labs = set(), [], []
        members = list(members)
        for i, r in enumerate(members):
            if r in seen:
                continue
            seen.add(r)
            out.append(r)
            if labels is not None:
                labs.append(labels[i])
        if dim is None:
            if not out:
                raise GeometryError("dimension needed for an empty collection")
            dim = out[0].dim
        for r in out:
            _check_dim(dim, r.dim)
        self.dim = dim
        self.members = tuple(out)
        self.labels = tuple(labs) if labels is not None else None

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i):
        return self.members[i]

    def __eq__(self, other):
        return isinstance(other, RectCollection) and self.dim == other.dim and self.members == other.members

    def __repr__(self):
        return f"RectCollection(dim={self.dim}, n={len(self)})"

    def subset(self, indices) -> "RectCollection":
        return RectCollection([self.members[i] for i in indices], self.dim)

    @cached_property
    def shadow(self) -> Region:
        return Region.from_boxes(self.members, self.dim)

    def maximal_elements(self) -> "RectCollection":
        return maximal_elements(self)

    def is_pairwise_incomparable(self) -> bool:
        return is_pairwise_incomparable(self)

    def total_measure(self) -> Fraction:
        return sum((r.measure for r in self.members), Fraction(0))


def _contains(a, b) -> bool:
    if isinstance(a, DyadicRect) and isinstance(b, DyadicRect):
        return a.contains(b)
    return a.box.contains_box(b.box)


def maximal_elements(U) -> RectCollection:
    members = list(U)
    keep = []
    for i, r in enumerate(members):
        if not any(j != i and s != r and _contains(s, r) for j, s in enumerate(members)):
            keep.append(r)
    return RectCollection(keep, U.dim if hasattr(U, "dim") else None)


def is_pairwise_incomparable(U) -> bool:
    members = list(U)
    for i, r in enumerate(members):
        for s in members[i + 1 :]:
            if _contains(r, s) or _contains(s, r):
                return False
    return True


def covered_measure(target, rects: Iterable) -> Fraction:
    """|target ∩ union(rects)| exactly."""
    tb = target.box
    clipped = [tb.intersection(r.box) for r in rects]
    clipped = [c for c in clipped if not c.is_empty]
    if not clipped:
        return Fraction(0)
    return Region.from_boxes(clipped, tb.dim).measure
