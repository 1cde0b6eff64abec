"""Maximal operators over grid and lattice families, computed exactly.

Superlevel sets ``{M^F f > lam}`` of a step function are unions of the family
members with large average. Over a product of one-dimensional grids the
union only needs finitely many candidates per axis:

* the cells of the function's own coordinate grid (each is, up to a null set,
  the union of all grid intervals inside it, and every such interval has the
  same average profile), and
* grid intervals with a breakpoint of ``f`` in their interior, from the
  coarsest scale that can still beat ``lam`` down to a few scales below the
  finest breakpoint gap. Below that threshold the relative position of a
  breakpoint inside the straddling interval repeats periodically, and smaller
  intervals with the same relative position are nested inside larger ones.

An axis whose grid is ``None`` contributes cells only, which realises the
coordinate-restricted operators ``M_j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import product
from math import ceil, floor, lcm
from typing import Sequence

import numpy as np

from .exact import as_fraction, pow2
from .geometry import Box, GeometryError, Region, StepFunction
from .grids import CapExceeded, DyadicGrid, GridFamily, ShiftedGridId, _floor_log2, delta, shifted_subgrids

INT_LIMIT = 1 << 62


@dataclass(frozen=True)
class MaximalQuery:
    family: GridFamily
    weight: object  # StepFunction or Region
    lam: Fraction
    strict: bool = True
    refinement: int = 2

    def __post_init__(self):
        lam = as_fraction(self.lam)
        if lam <= 0:
            raise ValueError("threshold must be positive")
        object.__setattr__(self, "lam", lam)


def as_step(w) -> StepFunction:
    if isinstance(w, StepFunction):
        if not w.is_nonnegative:
            raise GeometryError("maximal operators need a nonnegative weight")
        return w
    if isinstance(w, Region):
        return StepFunction.indicator(w)
    raise TypeError(f"cannot use {type(w).__name__} as a weight")


def average(R, f) -> Fraction:
    return as_step(f).average(R.box)


# ------------------------------------------------------- candidate intervals


def _odd_part(n: int) -> int:
    while n and n % 2 == 0:
        n //= 2
    return n


def _mult_order(a: int, m: int, cap: int = 100_000) -> int:
    if m == 1:
        return 1
    x, k = a % m, 1
    while x != 1:
        x = x * a % m
        k += 1
        if k > cap:
            raise CapExceeded("period of breakpoint pattern too long")
    return k


def _straddle_scales(grid, coords: Sequence[Fraction], max_len: Fraction, strict: bool) -> list[int]:
    """Scales whose straddling intervals can matter (see module docstring)."""
    fine = min(b - a for a, b in zip(coords, coords[1:]))
    # below 2**v2(x) every breakpoint x is 2-integral relative to the scale
    for c in coords:
        if c != 0:
            fine = min(fine, pow2(_two_val(c)))
    if isinstance(grid, DyadicGrid):
        period = 1
    else:
        odd = 2**grid.depth + 1
        for c in coords:
            odd = lcm(odd, _odd_part(c.denominator))
        period = lcm(2, _mult_order(2**grid.depth, odd))
    k_lo = grid.scale_of_length(fine) - period
    k_hi = grid.scale_of_length(max_len)
    if grid.length(k_hi) == max_len and strict:
        k_hi -= 1
    return list(range(k_lo, k_hi + 1))


def _two_val(x: Fraction) -> int:
    num, den = abs(x.numerator), x.denominator
    v = (num & -num).bit_length() - 1
    return v - (den.bit_length() - 1)


def _axis_candidates(grid, coords, max_len, strict) -> list[tuple[Fraction, Fraction]]:
    cells = list(zip(coords, coords[1:]))
    if grid is None or max_len <= 0:
        return cells
    out = set(cells)
    inner = coords  # all breakpoints, including the outer ends
    for k in _straddle_scales(grid, coords, max_len, strict):
        L = grid.length(k)
        if L >= max_len and (strict or L > max_len):
            continue
        for x in inner:
            for j in grid.offsets(k, x, x + L):
                a, b = grid.interval(k, j)
                if a < x < b:
                    out.add((a, b))
    return sorted(out)


# -------------------------------------------------------------- the engine


def _overlap_matrix(cands, coords, den) -> np.ndarray:
    lo = np.array([int(c * den) for c in coords[:-1]], dtype=object)
    hi = np.array([int(c * den) for c in coords[1:]], dtype=object)
    clo = np.array([int(a * den) for a, _ in cands], dtype=object)[:, None]
    chi = np.array([int(b * den) for _, b in cands], dtype=object)[:, None]
    ov = np.minimum(hi[None, :], chi) - np.maximum(lo[None, :], clo)
    return np.where(ov > 0, ov, 0)


def _fits(*bounds) -> bool:
    return reduce(lambda a, b: a * b, bounds, 1) < INT_LIMIT


def product_superlevel(grids: Sequence, f, lam, strict: bool = True, cap: int = 5_000_000) -> Region:
    """Exact ``{M f > lam}`` for the product family of the given 1-D grids.

    ``grids[a]`` is a 1-D grid object or ``None`` (fibre operator along the
    remaining axes, i.e. axis ``a`` is not averaged).
    """
    f = as_step(f)
    lam = as_fraction(lam)
    if lam <= 0:
        raise ValueError("threshold must be positive")
    d = f.dim
    if len(grids) != d:
        raise GeometryError("one grid per axis required")
    if f.is_zero:
        return Region(d)
    top = f.max_value()
    if lam > top or (strict and lam == top):
        return Region(d)
    cands = []
    for a in range(d):
        c = f.coords[a]
        ext = c[-1] - c[0]
        max_len = ext * top / lam if grids[a] is not None else Fraction(0)
        cands.append(_axis_candidates(grids[a], c, max_len, strict))
    total = reduce(lambda x, y: x * len(y), cands, 1)
    if total > cap:
        raise CapExceeded(f"{total} candidate boxes exceed cap {cap}")

    # integer scaling per axis and for the values
    dens = []
    for a in range(d):
        den = 1
        for x in f.coords[a]:
            den = lcm(den, x.denominator)
        for lo, hi in cands[a]:
            den = lcm(den, lo.denominator, hi.denominator)
        dens.append(den)
    vden = 1
    for v in f.values.flat:
        vden = lcm(vden, v.denominator)
    vals = np.vectorize(lambda v: int(v * vden), otypes=[object])(f.values)
    overlaps = [_overlap_matrix(cands[a], f.coords[a], dens[a]) for a in range(d)]
    lens = [np.array([int((b - a_) * dens[a]) for a_, b in cands[a]], dtype=object) for a in range(d)]

    vmax = int(max(vals.flat))
    row = [int(o.sum(axis=1).max()) for o in overlaps]
    lmax = [int(x.max()) for x in lens]
    p, q = lam.numerator, lam.denominator
    small = _fits(vmax, q, *row) and _fits(p, vden, *lmax)
    dtype = np.int64 if small else object
    T = vals.astype(dtype)
    for o in overlaps:
        T = np.tensordot(T, o.astype(dtype), axes=([0], [1]))
    vol = reduce(np.multiply.outer, [x.astype(dtype) for x in lens])
    lhs, rhs = T * q, vol * (p * vden)
    hit = lhs > rhs if strict else lhs >= rhs
    hit = np.asarray(hit, dtype=bool)
    if not hit.any():
        return Region(d)
    return _paint(cands, np.nonzero(hit), d)


def _paint(cands, idx, d) -> Region:
    """Union of the selected candidate boxes via a difference array."""
    coords, lo_i, hi_i = [], [], []
    for a in range(d):
        pts = sorted({x for iv in cands[a] for x in iv})
        pos = {x: i for i, x in enumerate(pts)}
        coords.append(pts)
        lo_i.append(np.array([pos[iv[0]] for iv in cands[a]], dtype=np.intp)[idx[a]])
        hi_i.append(np.array([pos[iv[1]] for iv in cands[a]], dtype=np.intp)[idx[a]])
    diff = np.zeros(tuple(len(c) for c in coords), dtype=np.int64)
    for corner in product((0, 1), repeat=d):
        sign = -1 if sum(corner) % 2 else 1
        at = tuple(hi_i[a] if corner[a] else lo_i[a] for a in range(d))
        np.add.at(diff, at, sign)
    for a in range(d):
        diff = np.cumsum(diff, axis=a)
    mask = diff[tuple(slice(0, len(c) - 1) for c in coords)] > 0
    return Region(d, coords, mask)


# ------------------------------------------------------ family dispatchers


def grid_superlevel_1d(grid, f, lam, strict: bool = True) -> Region:
    return product_superlevel([grid], f, lam, strict)


def union_superlevel_1d(depth: int, f, lam, strict: bool = True) -> Region:
    """{M^{D_depth} f > lam}: union over the 2*depth shifted subgrids."""
    out = None
    for g in shifted_subgrids(depth):
        r = grid_superlevel_1d(g, f, lam, strict)
        out = r if out is None else out.union(r)
    return out


def coordinate_superlevel(grid_or_depth, f, lam, axis: int, strict: bool = True) -> Region:
    """{M_axis^G f > lam}: 1-D grid operator applied along one coordinate.

    ``grid_or_depth`` is a 1-D grid, or an int depth meaning the union D_depth.
    """
    f = as_step(f)
    if isinstance(grid_or_depth, int):
        out = Region(f.dim)
        for g in shifted_subgrids(grid_or_depth):
            out = out.union(coordinate_superlevel(g, f, lam, axis, strict))
        return out
    grids = [None] * f.dim
    grids[axis] = grid_or_depth
    return product_superlevel(grids, f, lam, strict)


def dyadic_superlevel(f, lam, strict: bool = True, cap: int = 5_000_000) -> Region:
    f = as_step(f)
    return product_superlevel([DyadicGrid()] * f.dim, f, lam, strict, cap)


def superlevel(q: MaximalQuery, cap: int = 5_000_000) -> Region:
    f = as_step(q.weight)
    fam = q.family
    if fam.kind == "lattice":
        return lattice_superlevel(f, q.lam, fam.cell, strict=q.strict, cap=cap)
    if fam.kind == "dyadic" and not fam.axes:
        return dyadic_superlevel(f, q.lam, q.strict, cap)
    out = Region(f.dim)
    for choice in product(*fam.axis_grids()):
        out = out.union(product_superlevel(list(choice), f, q.lam, q.strict, cap))
    return out


# -------------------------------------------------------- weak-type checks


@dataclass(frozen=True)
class WeakTypeResult:
    lhs: Fraction
    rhs: Fraction

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs


def weak_type_check(grid, f, lam) -> WeakTypeResult:
    """lam * |{M^G f > lam}| <= integral of f, for a 1-D grid G."""
    f = as_step(f)
    lam = as_fraction(lam)
    E = grid_superlevel_1d(grid, f, lam)
    return WeakTypeResult(lam * E.measure, f.integral())


@dataclass(frozen=True)
class SmallWeakResult:
    depth: int
    kappa: Fraction
    delta_depth: Fraction
    bound: Fraction  # 2*depth*delta/(1-delta), from the per-subgrid weak bound
    superlevel: Region

    @property
    def within_bound(self) -> bool:
        return self.kappa <= self.bound


def small_weak_check(U: Region, depth: int) -> SmallWeakResult:
    """Excess kappa = |{M^{D_depth} 1_U > 1 - delta}| / |U| - 1."""
    if U.dim != 1:
        raise GeometryError("small_weak_check expects a 1-D region")
    if U.measure <= 0:
        raise GeometryError("region must have positive measure")
    dl = delta(depth)
    E = union_superlevel_1d(depth, StepFunction.indicator(U), 1 - dl)
    kappa = E.union(U).measure / U.measure - 1
    return SmallWeakResult(depth, kappa, dl * depth, 2 * depth * dl / (1 - dl), E)


# ------------------------------------------------------ lattice (strong) M


def _covered(G: np.ndarray, d: int) -> np.ndarray:
    """Cells (last d axes) lying in some lattice box with positive sum."""
    if d == 1:
        zero = np.zeros(G.shape[:-1] + (1,), dtype=G.dtype)
        P = np.concatenate([zero, np.cumsum(G, axis=-1)], axis=-1)
        pre_min = np.minimum.accumulate(P[..., :-1], axis=-1)
        suf_max = np.maximum.accumulate(P[..., :0:-1], axis=-1)[..., ::-1]
        return suf_max > pre_min
    axis = G.ndim - d
    n = G.shape[axis]
    cov = np.zeros(G.shape, dtype=bool)
    for i0 in range(n):
        sl = [slice(None)] * G.ndim
        sl[axis] = slice(i0, None)
        S = np.cumsum(G[tuple(sl)], axis=axis)
        C = _covered(S, d - 1)
        RC = np.flip(np.logical_or.accumulate(np.flip(C, axis=axis), axis=axis), axis=axis)
        cov[tuple(sl)] |= RC
    return cov


def lattice_cell(f: StepFunction, refinement: int) -> Fraction:
    """2**-refinement times the coarsest dyadic step aligned with every breakpoint."""
    v = None
    for c in f.coords:
        for x in c:
            if x != 0:
                if x.denominator & (x.denominator - 1):
                    raise GeometryError("lattice family needs dyadic breakpoints")
                vx = _two_val(x)
                v = vx if v is None else min(v, vx)
    v = 0 if v is None else v
    return pow2(v - refinement)


def _lattice_window(f: StepFunction, lam: Fraction, cell: Fraction) -> list[tuple[Fraction, Fraction]]:
    top = f.max_value()
    out = []
    for c in f.coords:
        ext = c[-1] - c[0]
        pad = ext * (top / lam - 1)
        lo = floor((c[0] - pad) / cell) * cell
        hi = ceil((c[-1] + pad) / cell) * cell
        out.append((lo, hi))
    return out


def lattice_superlevel(f, lam, cell=None, refinement: int = 2, strict: bool = True, cap: int = 4_000_000) -> Region:
    """Superlevel of the maximal operator over boxes with corners on cell*Z^d.

    An inner approximation of the strong maximal superlevel set.
    """
    f = as_step(f)
    lam = as_fraction(lam)
    if f.is_zero:
        return Region(f.dim)
    top = f.max_value()
    if lam > top or (strict and lam == top):
        return Region(f.dim)
    if cell is None:
        cell = lattice_cell(f, refinement)
    cell = as_fraction(cell)
    window = _lattice_window(f, lam, cell)
    coords = [[lo + i * cell for i in range(int((hi - lo) / cell) + 1)] for lo, hi in window]
    ncells = reduce(lambda x, y: x * (len(y) - 1), coords, 1)
    if ncells > cap:
        raise CapExceeded(f"lattice of {ncells} cells exceeds cap {cap}")
    vals = f.on_grid([tuple(c) for c in coords])
    vden = reduce(lcm, (v.denominator for v in vals.flat), 1)
    p, q = lam.numerator, lam.denominator
    G = np.vectorize(lambda v: int(v * vden) * q - p * vden, otypes=[object])(vals)
    if not strict:
        # >= lam: use a tiny exact tilt so that zero-sum boxes count as hits
        G = G * (ncells + 1) + 1
    bound = int(np.abs(G).max()) * ncells
    G = G.astype(np.int64) if bound < INT_LIMIT else G
    cov = _covered(G, f.dim)
    return Region(f.dim, [tuple(c) for c in coords], cov)


def strong_superlevel(W, lam, refinement: int = 2, cap: int = 4_000_000) -> Region:
    f = as_step(W)
    return lattice_superlevel(f, lam, lattice_cell(f, refinement), strict=True, cap=cap)


def lattice_maximal_function(f, cell, window: Sequence[tuple], cap: int = 20_000_000) -> StepFunction:
    """Exact lattice-restricted maximal function on a bounded window.

    Boxes range over cell*Z^d boxes inside the window; the result is a step
    function on the window's cells (a lower bound for M f there).
    """
    f = as_step(f)
    cell = as_fraction(cell)
    coords = [[as_fraction(lo) + i * cell for i in range(int((as_fraction(hi) - as_fraction(lo)) / cell) + 1)]
              for lo, hi in window]
    shape = tuple(len(c) - 1 for c in coords)
    d = len(shape)
    pairs = [[(i, j) for i in range(n) for j in range(i + 1, n + 1)] for n in shape]
    if reduce(lambda x, pr: x * len(pr), pairs, 1) > cap:
        raise CapExceeded("lattice maximal function too large")
    vals = f.on_grid([tuple(c) for c in coords])
    vden = reduce(lcm, (v.denominator for v in vals.flat), 1)
    ivals = np.vectorize(lambda v: int(v * vden), otypes=[object])(vals)
    vol_lcm = reduce(lambda x, n: x * reduce(lcm, range(1, n + 1), 1), shape, 1)
    cells = reduce(lambda x, n: x * n, shape, 1)
    big = int(max(ivals.flat, default=0)) * cells * vol_lcm >= INT_LIMIT
    dtype = object if big else np.int64
    P = np.zeros(tuple(n + 1 for n in shape), dtype=dtype)
    P[tuple(slice(1, None) for _ in shape)] = ivals.astype(dtype)
    for a in range(d):
        P = np.cumsum(P, axis=a)
    lo_idx = [np.array([i for i, _ in pr], dtype=np.intp) for pr in pairs]
    hi_idx = [np.array([j for _, j in pr], dtype=np.intp) for pr in pairs]
    mass = np.zeros(tuple(len(pr) for pr in pairs), dtype=dtype)
    for corner in product((0, 1), repeat=d):
        sign = -1 if (d - sum(corner)) % 2 else 1
        mass = mass + sign * P[np.ix_(*[hi_idx[a] if corner[a] else lo_idx[a] for a in range(d)])]
    # scaled average: mass * (vol_lcm / vol), exact and integral
    inv = [np.array([reduce(lcm, range(1, n + 1), 1) // (j - i) for i, j in pr], dtype=dtype)
           for n, pr in zip(shape, pairs)]
    T = mass * reduce(np.multiply.outer, inv)
    for a in range(d):
        parts = []
        for c in range(shape[a]):
            sel = np.nonzero((lo_idx[a] <= c) & (c < hi_idx[a]))[0]
            parts.append(np.take(T, sel, axis=a).max(axis=a))
        T = np.stack(parts, axis=a)
    den = vden * vol_lcm
    best = np.vectorize(lambda v: Fraction(int(v), den), otypes=[object])(T)
    return StepFunction(d, [tuple(c) for c in coords], best)
