"""Product Carleson norms, tents, the embedding operator and John-Nirenberg.

A weight ``alpha`` is a finitely supported nonnegative map on dyadic
rectangles. For a collection U,

    ratio(U) = mu_alpha(Tent(sh U)) / |sh U|,

the alpha-mass of the dyadic rectangles inside the shadow over its measure.
CM is the sup over all collections, CM(rec) the sup over single rectangles
and CM(l) the sup over collections whose sides agree off a set L of l
coordinates, so CM(rec) <= CM(1) <= ... <= CM(d) = CM.

Why subsets of the support suffice for CM: rectangles outside the support add
shadow without mass, and once a shadow is fixed every support rectangle inside
it may be added for free. So CM is the max over shadows S of support subsets
of (alpha-mass of support rectangles inside S) / |S|. Restricting S to unions
of inclusion-maximal rectangles is not enough: with alpha = 1 on [0,1)^2 and
1/10 on [0,2) x [0,1) the only maximal shadow gives 11/20 while [0,1)^2 alone
gives 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import lcm
from typing import Iterable, Sequence

import numpy as np

from .exact import as_fraction, fmt_rational, pow2, power_bracket, root_bracket
from .geometry import DyadicInterval, DyadicRect, GeometryError, Region, RectCollection, StepFunction
from .grids import CapExceeded


class WeightError(GeometryError):
    pass


@dataclass(frozen=True)
class CarlesonWeight:
    dim: int
    entries: tuple  # sorted ((DyadicRect, Fraction), ...) with positive values

    @classmethod
    def from_map(cls, alpha: dict, dim: int | None = None) -> "CarlesonWeight":
        items = []
        for r, v in alpha.items():
            v = as_fraction(v)
            if v < 0:
                raise WeightError("Carleson weights are nonnegative")
            if v:
                items.append((r, v))
        if dim is None:
            if not items:
                raise WeightError("dimension needed for an empty weight")
            dim = items[0][0].dim
        if any(r.dim != dim for r, _ in items):
            raise WeightError("mixed dimensions in weight")
        return cls(dim, tuple(sorted(items)))

    @classmethod
    def uniform(cls, rects: Iterable, value=1) -> "CarlesonWeight":
        rects = list(rects)
        return cls.from_map({r: value for r in rects}, rects[0].dim if rects else None)

    @property
    def support(self) -> list:
        return [r for r, _ in self.entries]

    def as_dict(self) -> dict:
        return dict(self.entries)

    def __call__(self, r) -> Fraction:
        return self.as_dict().get(r, Fraction(0))

    def __len__(self):
        return len(self.entries)

    def total(self) -> Fraction:
        return sum((v for _, v in self.entries), Fraction(0))

    def restrict(self, keep) -> "CarlesonWeight":
        keep = set(keep)
        return CarlesonWeight(self.dim, tuple((r, v) for r, v in self.entries if r in keep))

    def scale(self, c) -> "CarlesonWeight":
        c = as_fraction(c)
        return CarlesonWeight.from_map({r: v * c for r, v in self.entries}, self.dim)

    def generators(self) -> list:
        """Inclusion-maximal support rectangles."""
        sup = self.support
        return [r for r in sup if not any(s != r and s.contains(r) for s in sup)]

    def to_json(self) -> dict:
        from .serialize import rect_to_json

        return {"dim": self.dim, "entries": [{"rect": rect_to_json(r), "value": fmt_rational(v)} for r, v in self.entries]}

    @classmethod
    def from_json(cls, obj: dict) -> "CarlesonWeight":
        from .serialize import rect_from_json

        dim = int(obj["dim"])
        alpha = {}
        for e in obj["entries"]:
            r = rect_from_json(e["rect"])
            if not isinstance(r, DyadicRect):
                raise WeightError("weights live on dyadic rectangles")
            alpha[r] = alpha.get(r, Fraction(0)) + as_fraction(str(e["value"]))
        return cls.from_map(alpha, dim)


@dataclass(frozen=True)
class CmReport:
    mode: str  # exact | heuristic | rec | ell:<l>
    value: Fraction
    witness: tuple  # the optimizing collection U; value = collection_ratio(alpha, U)


def collection_ratio(alpha: CarlesonWeight, U: Sequence) -> Fraction:
    """mu_alpha(Tent(sh U)) / |sh U|: alpha-mass of support rectangles inside the shadow."""
    if not U:
        return Fraction(0)
    sh = Region.from_boxes(U, alpha.dim)
    return tent_mass(alpha, sh) / sh.measure


# ------------------------------------------------------------ cell masks


class _Cells:
    """Support rectangles as boolean masks over a common cell grid."""

    def __init__(self, rects: Sequence[DyadicRect], dim: int):
        self.rects = list(rects)
        n = len(self.rects)
        coords = [sorted({x for r in self.rects for x in (r.box.lo[a], r.box.hi[a])}) for a in range(dim)]
        den = 1
        for c in coords:
            for x in c:
                den = lcm(den, x.denominator)
        widths = [[int((b - a) * den) for a, b in zip(c, c[1:])] for c in coords]
        self.unit = Fraction(1, den**dim)
        area = np.array([1], dtype=object)
        for w in widths:
            area = np.multiply.outer(area, np.array(w, dtype=object)).reshape(-1)
        big = any(x >= 2**40 for x in area) or len(area) * max(area) >= 2**62
        self.area = area if big else area.astype(np.int64)
        index = [{x: i for i, x in enumerate(c)} for c in coords]
        shape = tuple(len(c) - 1 for c in coords)
        self.masks = np.zeros((n, int(np.prod(shape))), dtype=bool)
        for i, r in enumerate(self.rects):
            m = np.zeros(shape, dtype=bool)
            m[tuple(slice(index[a][r.box.lo[a]], index[a][r.box.hi[a]]) for a in range(dim))] = True
            self.masks[i] = m.reshape(-1)

    def measure(self, union: np.ndarray) -> Fraction:
        return int(self.area[union].sum()) * self.unit

    def inside(self, union: np.ndarray) -> np.ndarray:
        return ~np.any(self.masks & ~union, axis=1)


def _exact_over(rects: Sequence[DyadicRect], values: Sequence[Fraction], dim: int, cap: int) -> tuple:
    """Max over support subsets S of (mass of rects inside sh S) / |sh S|; returns (value, members)."""
    n = len(rects)
    if n == 0:
        return Fraction(0), ()
    if n > cap:
        raise CapExceeded(f"exact Carleson norm over {n} rectangles exceeds cap {cap}")
    cells = _Cells(rects, dim)
    den = lcm(*(v.denominator for v in values))
    ints = [int(v * den) for v in values]
    wvec = np.array(ints, dtype=object if max(ints) * n >= 2**62 else np.int64)
    best = [Fraction(-1), None]

    def visit(i: int, union: np.ndarray):
        if i == n:
            return
        if not np.any(cells.masks[i] & ~union):
            visit(i + 1, union)  # already covered: including it changes nothing
            return
        new = union | cells.masks[i]
        inside = cells.inside(new)
        val = Fraction(int(wvec[inside].sum()), den) / cells.measure(new)
        if val > best[0]:
            best[0], best[1] = val, inside
        visit(i + 1, new)
        visit(i + 1, union)

    visit(0, np.zeros(cells.masks.shape[1], dtype=bool))
    members = tuple(r for r, keep in zip(rects, best[1]) if keep)
    return best[0], members


def cm_norm(alpha: CarlesonWeight, cap: int = 20, mode: str = "exact") -> CmReport:
    """Product Carleson norm; exact enumeration or greedy + local search lower bound."""
    if mode in ("greedy", "heuristic"):
        return _cm_heuristic(alpha)
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    rects, vals = alpha.support, [v for _, v in alpha.entries]
    value, members = _exact_over(rects, vals, alpha.dim, cap)
    return CmReport("exact", value, members)


def _closure(cells: _Cells, chosen: set) -> np.ndarray:
    union = np.zeros(cells.masks.shape[1], dtype=bool)
    for i in chosen:
        union |= cells.masks[i]
    return union


def _cm_heuristic(alpha: CarlesonWeight) -> CmReport:
    rects, vals = alpha.support, [v for _, v in alpha.entries]
    if not rects:
        return CmReport("heuristic", Fraction(0), ())
    cells = _Cells(rects, alpha.dim)

    def score(chosen: set) -> Fraction:
        if not chosen:
            return Fraction(-1)
        union = _closure(cells, chosen)
        inside = cells.inside(union)
        return sum((v for v, k in zip(vals, inside) if k), Fraction(0)) / cells.measure(union)

    n = len(rects)
    chosen = {max(range(n), key=lambda i: (vals[i] / rects[i].measure, -i))}
    cur = score(chosen)
    improved = True
    while improved:  # single toggles until no gain
        improved = False
        for i in range(n):
            trial = chosen ^ {i}
            s = score(trial)
            if s > cur:
                chosen, cur, improved = trial, s, True
    inside = cells.inside(_closure(cells, chosen))
    return CmReport("heuristic", cur, tuple(r for r, k in zip(rects, inside) if k))


# -------------------------------------------------------- rectangular norm


def _axis_candidates(alpha: CarlesonWeight, axis: int) -> list[DyadicInterval]:
    sides = {r.sides[axis] for r in alpha.support}
    top = max(s.k for s in sides)
    out = set()
    for s in sides:
        for lev in range(top - s.k + 1):
            out.add(s.parent(lev))
    return sorted(out)


def cm_rec_norm(alpha: CarlesonWeight) -> CmReport:
    """sup over dyadic R0 of sum_{R inside R0} alpha(R) / |R0|.

    Candidates on each axis are ancestors-or-equal of support sides up to the
    largest support scale on that axis. Any other R0 can be shrunk to the
    smallest such box holding the same rectangles, and going above the top
    scale splits R0 into halves, one of which does at least as well.
    """
    if not alpha.entries:
        return CmReport("rec", Fraction(0), ())
    d = alpha.dim
    rects, vals = alpha.support, [v for _, v in alpha.entries]
    den = lcm(*(v.denominator for v in vals))
    w = np.array([int(v * den) for v in vals], dtype=object)
    cands = [_axis_candidates(alpha, a) for a in range(d)]
    cont = [np.array([[c.contains(r.sides[a]) for r in rects] for c in cands[a]], dtype=object) for a in range(d)]
    # mass[i0, ..., i_{d-1}] = sum_r w_r prod_a cont[a][i_a, r]
    mass = cont[0] * w
    for a in range(1, d):
        mass = np.einsum("...r,jr->...jr", mass, cont[a])
    mass = mass.sum(axis=-1)
    kmin = [min(c.k for c in cands[a]) for a in range(d)]
    best, arg = Fraction(-1), None
    for idx in np.ndindex(mass.shape):
        m = mass[idx]
        if not m:
            continue
        val = Fraction(int(m), den) / pow2(sum(cands[a][i].k for a, i in enumerate(idx)))
        if val > best:
            best, arg = val, idx
    R0 = DyadicRect(cands[a][i] for a, i in enumerate(arg))
    inside = tuple(r for r in rects if R0.contains(r) and r != R0)
    return CmReport("rec", best, (R0,) + inside)


def rec_ratio(alpha: CarlesonWeight, R0: DyadicRect) -> Fraction:
    a = alpha.as_dict()
    return sum((v for r, v in a.items() if R0.contains(r)), Fraction(0)) / R0.measure


# --------------------------------------------------------- l-parameter norm


def cm_ell_norm(alpha: CarlesonWeight, ell: int, cap: int = 20) -> CmReport:
    """sup over collections with ell free coordinates of mu_alpha(Tent(sh U)) / |sh U|.

    Such a shadow is F x E: F a frozen dyadic box on the other coordinates and
    E a union of dyadic boxes in the free ones. A support rectangle lies in it
    iff its frozen sides lie in F and its free part lies in E, so each F gives
    an ell-dimensional exact problem on the free projections. F ranges over
    the same ancestor candidates as the rectangular norm.
    """
    d = alpha.dim
    if not 1 <= ell <= d:
        raise ValueError("ell must lie in [1, d]")
    if ell == d:
        rep = cm_norm(alpha, cap)
        return CmReport(f"ell:{ell}", rep.value, rep.witness)
    if not alpha.entries:
        return CmReport(f"ell:{ell}", Fraction(0), ())
    best, wit = Fraction(-1), ()
    for L in combinations(range(d), ell):
        off = [a for a in range(d) if a not in L]
        for F in product(*(_axis_candidates(alpha, a) for a in off)):
            proj: dict = {}
            for r, v in alpha.entries:
                if all(f.contains(r.sides[a]) for f, a in zip(F, off)):
                    q = DyadicRect(r.sides[a] for a in L)
                    proj[q] = proj.get(q, Fraction(0)) + v
            if not proj:
                continue
            keys = sorted(proj)
            val, members = _exact_over(keys, [proj[q] for q in keys], ell, cap)
            val /= pow2(sum(f.k for f in F))
            if val > best:
                best = val
                wit = tuple(_lift(q, L, F, off, d) for q in members)
    return CmReport(f"ell:{ell}", best, wit)


def _lift(q: DyadicRect, L, F, off, d: int) -> DyadicRect:
    sides = [None] * d
    for a, s in zip(L, q.sides):
        sides[a] = s
    for a, f in zip(off, F):
        sides[a] = f
    return DyadicRect(sides)


def is_ell_parameter(U: Sequence, ell: int) -> bool:
    """True if some set L of ell coordinates carries all the variation in U."""
    U = list(U)
    if not U:
        return True
    d = U[0].dim
    for L in combinations(range(d), ell):
        off = [a for a in range(d) if a not in L]
        if len({tuple(r.sides[a] for a in off) for r in U}) <= 1:
            return True
    return False


# ----------------------------------------------------------------- tents


def tent_mass(alpha: CarlesonWeight, U) -> Fraction:
    """mu_alpha(Tent(U)) = sum of alpha(R) over support rectangles R inside U."""
    W = U if isinstance(U, Region) else Region.from_boxes(U, alpha.dim)
    return sum((v for r, v in alpha.entries if W.contains_box(r.box)), Fraction(0))


def _sum_indicators(dim: int, terms: Sequence[tuple]) -> StepFunction:
    """Sum of c * 1_R over (R, c) terms, exactly."""
    terms = [(r, c) for r, c in terms if c]
    if not terms:
        return StepFunction(dim)
    coords = [sorted({x for r, _ in terms for x in (r.box.lo[a], r.box.hi[a])}) for a in range(dim)]
    index = [{x: i for i, x in enumerate(c)} for c in coords]
    vals = np.full(tuple(len(c) - 1 for c in coords), Fraction(0), dtype=object)
    for r, c in terms:
        b = r.box
        vals[tuple(slice(index[a][b.lo[a]], index[a][b.hi[a]]) for a in range(dim))] += c
    return StepFunction(dim, coords, vals)


def t_alpha_apply(alpha: CarlesonWeight, f: StepFunction) -> StepFunction:
    """T_alpha f = sum_R alpha(R) (average of f over R) 1_R."""
    return _sum_indicators(alpha.dim, [(r, v * f.average(r)) for r, v in alpha.entries])


# --------------------------------------------------------- John-Nirenberg


@dataclass(frozen=True)
class JnReport:
    p: int
    lhs_power: Fraction  # || sum alpha(R)/|R| 1_R ||_p ** p
    cm: Fraction
    shadow: Fraction
    lhs: tuple  # bracket of the p-norm
    rhs: tuple  # bracket of cm * |sh U| ** (1/p)

    @property
    def ratio_power(self) -> Fraction:
        """(lhs / rhs) ** p, exact."""
        return self.lhs_power / (self.cm**self.p * self.shadow)

    @property
    def ratio_upper(self) -> Fraction:
        return root_bracket(self.ratio_power, self.p)[1]


def jn_function(alpha: CarlesonWeight, U: Iterable) -> StepFunction:
    a = alpha.as_dict()
    return _sum_indicators(alpha.dim, [(r, a.get(r, Fraction(0)) / r.measure) for r in set(U)])


def jn_lp(alpha: CarlesonWeight, U, p: int = 2, cap: int = 20, cm: Fraction | None = None) -> JnReport:
    if p < 1 or int(p) != p:
        raise ValueError("p must be a positive integer")
    U = list(U)
    F = jn_function(alpha, U)
    lhs_power = F.lp_power(p)
    cm = cm_norm(alpha, cap).value if cm is None else as_fraction(cm)
    sh = Region.from_boxes(U, alpha.dim).measure if U else Fraction(0)
    lhs = root_bracket(lhs_power, p)
    s = root_bracket(sh, p)
    return JnReport(p, lhs_power, cm, sh, lhs, (cm * s[0], cm * s[1]))


# ------------------------------------------------------------- weak type


@dataclass(frozen=True)
class WeakInstanceReport:
    p: int
    measure: Fraction  # |{T_beta f > ||f||_p}| with beta = alpha / CM(alpha)
    cm: Fraction
    bound: Fraction | None

    @property
    def passed(self) -> bool | None:
        return None if self.bound is None else self.measure <= self.bound


def weak_instance_check(alpha: CarlesonWeight, f: StepFunction, p: int = 2, bound=None,
                        cap: int = 20, cm: Fraction | None = None) -> WeakInstanceReport:
    """Measure of {T_alpha f > 1} after normalizing CM(alpha) = 1 and ||f||_p = 1.

    Both normalizations are folded into the level: T_beta f > ||f||_p is
    decided exactly by comparing p-th powers.
    """
    cm = cm_norm(alpha, cap).value if cm is None else as_fraction(cm)
    if cm == 0 or f.is_zero:
        return WeakInstanceReport(p, Fraction(0), cm, None if bound is None else as_fraction(bound))
    T = t_alpha_apply(alpha.scale(1 / cm), f)
    norm_p = f.lp_power(p)
    if T.is_zero:
        meas = Fraction(0)
    else:
        mask = np.vectorize(lambda v: v**p > norm_p, otypes=[bool])(T.values)
        meas = Fraction(np.sum(T.cell_volumes()[mask])) if mask.any() else Fraction(0)
    return WeakInstanceReport(p, meas, cm, None if bound is None else as_fraction(bound))


def dilate_weight(alpha: CarlesonWeight, levels: int) -> CarlesonWeight:
    """beta(R) = alpha(2**levels R): the weight transported by x -> 2**-levels x."""
    return CarlesonWeight.from_map({r.scaled(-levels): v for r, v in alpha.entries}, alpha.dim)


def dilate_step(f: StepFunction, levels: int) -> StepFunction:
    """x -> f(2**levels x)."""
    if f.is_zero:
        return f
    s = pow2(-levels)
    return StepFunction(f.dim, [[x * s for x in c] for c in f.coords], f.values, _canon=True)


# ------------------------------------------------------- restricted ratio


@dataclass(frozen=True)
class RestrictedRatio:
    mu: Fraction
    eps: Fraction
    restricted: tuple  # rectangles in the emb bucket
    cm_restricted: Fraction
    denominator: Fraction  # CM(rec) in 2-D, CM(d-1) otherwise
    lower: Fraction
    upper: Fraction


def cm_restricted_ratio(alpha: CarlesonWeight, V: Region, emb_of, mu, eps, cap: int = 20) -> RestrictedRatio:
    """CM(alpha restricted to {mu <= emb(R) < 2 mu}) / (mu**eps * rectangular norm).

    ``emb_of`` maps a support rectangle to its embeddedness in V.
    """
    mu, eps = as_fraction(mu), as_fraction(eps)
    keep = tuple(r for r in alpha.support if mu <= emb_of(r) < 2 * mu)
    sub = alpha.restrict(keep)
    num = cm_norm(sub, cap).value if keep else Fraction(0)
    den = cm_rec_norm(alpha).value if alpha.dim == 2 else cm_ell_norm(alpha, alpha.dim - 1, cap).value
    lo, hi = power_bracket(mu, eps)
    if den == 0:
        return RestrictedRatio(mu, eps, keep, num, den, Fraction(0), Fraction(0))
    return RestrictedRatio(mu, eps, keep, num, den, num / (hi * den), num / (lo * den))


# ------------------------------------------------------------- generators


def carleson_family(n: int) -> CarlesonWeight:
    """alpha = 1 on [0, 2^k) x [0, 2^(n-k)), k = 0..n."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return CarlesonWeight.uniform([DyadicRect([DyadicInterval(k, 0), DyadicInterval(n - k, 0)]) for k in range(n + 1)])
