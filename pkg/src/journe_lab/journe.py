"""Verifiers for the covering lemmas and their constructive pieces."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil
from typing import Callable, Sequence

import numpy as np

from .embedding import EmbSpec, EnlargementSpec, emb, emb_directional, emb_pair, emb_uniform, enlarged_set
from .exact import as_fraction, power_bracket
from .geometry import (
    Box,
    DyadicInterval,
    DyadicRect,
    GeometryError,
    Region,
    RectCollection,
    StepFunction,
    covered_measure,
    dilate,
    is_pairwise_incomparable,
    sort_key,
)
from .grids import GridFamily, _floor_log2
from .maximal import lattice_maximal_function

VARIANTS = ("classic", "uniform", "redux", "pipher-rect")


class IncomparabilityError(GeometryError):
    pass


# --------------------------------------------------------- scale structure


def scale_separate(U: RectCollection, mu) -> list[RectCollection]:
    """Partition by per-axis scale exponents modulo m = ceil(log2 mu) + 1."""
    mu = as_fraction(mu)
    if mu <= 1:
        raise ValueError("separation factor must exceed 1")
    m = _ceil_log2(mu) + 1
    classes = defaultdict(list)
    for r in U:
        classes[tuple(k % m for k in r.scales)].append(r)
    return [RectCollection(classes[key], U.dim) for key in sorted(classes)]


def _ceil_log2(x: Fraction) -> int:
    k = _floor_log2(x)
    return k if Fraction(2) ** k == x else k + 1


def standard_reduction(U: RectCollection, V: Region, spec: EmbSpec, mu, separation=None) -> list[RectCollection]:
    """Members with mu <= emb <= 2 mu, split into scale-separated classes."""
    mu = as_fraction(mu)
    if mu < 1:
        raise ValueError("mu must be >= 1")
    if separation is None:
        separation = 10 ** (3 * U.dim) * mu
    keep = [r for r in U if mu <= emb(r, spec, V).value <= 2 * mu]
    if not keep:
        return []
    return scale_separate(RectCollection(keep, U.dim), separation)


# ----------------------------------------------------------- Journe sums


@dataclass(frozen=True)
class JourneReport:
    variant: str
    epsilon: Fraction
    n_rects: int
    lhs_lower: Fraction
    lhs_upper: Fraction
    shadow: Fraction

    @property
    def ratio_upper(self) -> Fraction:
        return self.lhs_upper / self.shadow if self.shadow else Fraction(0)

    @property
    def ratio_lower(self) -> Fraction:
        return self.lhs_lower / self.shadow if self.shadow else Fraction(0)


def enlargement_for(variant: str, U: RectCollection) -> Region:
    """Default enlarged set per variant, using the dyadic subfamily of rectangles.

    Dyadic rectangles form a subfamily of all rectangles, so these sets sit
    inside the strong-maximal enlargements and the resulting embeddedness
    values are lower bounds (ratios are upper bounds).
    """
    d = U.dim
    lam = {"classic": Fraction(1, 2), "uniform": Fraction(1, 16), "redux": Fraction(1, 16),
           "pipher-rect": Fraction(1, 2 * d), "few": Fraction(1, 2)}[variant]
    return enlarged_set(U, EnlargementSpec(GridFamily.dyadic(d), lam, 1))


def emb_factors(R, variant: str, V: Region) -> list[Fraction]:
    """Embeddedness values whose -eps powers multiply into the weight of R."""
    if variant == "classic":
        return [emb_directional(R, V, [0]).value]
    if variant == "uniform":
        return [emb_uniform(R, V).value]
    if variant == "redux":
        return [emb_pair(R, V).value]
    if variant == "pipher-rect":
        return [emb_directional(R, V, [j]).value for j in range(R.dim - 1)]
    raise ValueError(f"unknown variant {variant!r}")


def neg_power_bracket(x: Fraction, eps: Fraction, bits: int = 64) -> tuple[Fraction, Fraction]:
    """Certified bracket of x**(-eps)."""
    return power_bracket(x, -as_fraction(eps), bits)


def journe_sum(Up: RectCollection, V: Region, variant: str, eps, cache: dict | None = None) -> JourneReport:
    """Certified bracket of sum_R |R| * prod emb^-eps over Up, with emb taken in V."""
    eps = as_fraction(eps)
    if variant in ("classic", "pipher-rect") and not is_pairwise_incomparable(Up):
        raise IncomparabilityError(f"{variant} variant needs pairwise incomparable rectangles")
    lo_sum, hi_sum = Fraction(0), Fraction(0)
    for R in Up:
        key = (R, variant)
        if cache is not None and key in cache:
            lo, hi = cache[key]
        else:
            lo, hi = Fraction(1), Fraction(1)
            for e in emb_factors(R, variant, V):
                a, b = neg_power_bracket(e, eps)
                lo, hi = lo * a, hi * b
            if cache is not None:
                cache[key] = (lo, hi)
        lo_sum += lo * R.measure
        hi_sum += hi * R.measure
    return JourneReport(variant, eps, len(Up), lo_sum, hi_sum, Up.shadow.measure if len(Up) else Fraction(0))


# ------------------------------------------------------------ packing fact


@dataclass(frozen=True)
class PackingResult:
    I: DyadicInterval
    k: int
    total: Fraction
    bound: Fraction  # 2 |sh E(I,k)|

    @property
    def passed(self) -> bool:
        return self.total <= self.bound


def packing_sets(Up: RectCollection, ambient: Region, I: DyadicInterval, k: int) -> list:
    """E(I,k): members I x J of Up with Dil_(2^k,1)(I x J) inside the ambient shadow."""
    lam = [Fraction(2) ** k] + [Fraction(1)] * (Up.dim - 1)
    return [R for R in Up if R.sides[0] == I and ambient.contains_box(dilate(R, lam))]


def packing_check(Up: RectCollection, I: DyadicInterval, k: int, ambient: Region, checked: bool = False) -> PackingResult:
    if not checked and not is_pairwise_incomparable(Up):
        raise IncomparabilityError("packing check needs pairwise incomparable rectangles")
    E = packing_sets(Up, ambient, I, k)
    total = sum((R.measure for R in E), Fraction(0))
    sh = Region.from_boxes(E, Up.dim).measure if E else Fraction(0)
    return PackingResult(I, k, total, 2 * sh)


def packing_sweep(Up: RectCollection, ambient: Region, kmax: int = 16) -> list[PackingResult]:
    """Run the packing check for every first side I in Up and k = 0..kmax until E(I,k) empties."""
    if not is_pairwise_incomparable(Up):
        raise IncomparabilityError("packing check needs pairwise incomparable rectangles")
    out = []
    for I in sorted({R.sides[0] for R in Up}):
        for k in range(kmax + 1):
            res = packing_check(Up, I, k, ambient, checked=True)
            out.append(res)
            if res.total == 0:
                break
    return out


# ------------------------------------------------------ good / bad split


@dataclass
class GoodBadResult:
    good: RectCollection
    bad: list  # one RectCollection per axis
    trace: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"trace": self.trace}


def _longer(r, s, axis) -> bool:
    return r.sides[axis].k > s.sides[axis].k


def _cover_fraction(target, G, axis) -> Fraction:
    longer = [g for g in G if _longer(g, target, axis)]
    return covered_measure(target, longer) / target.measure


def good_bad_decompose(U: RectCollection, theta=Fraction(8, 9), order: Sequence | None = None) -> GoodBadResult:
    """Split U into a good part and bad parts B_j by the near-cover rule.

    Selection order: decreasing area, then lexicographic lower corner, unless
    an explicit ``order`` (list of members) is given.
    """
    theta = as_fraction(theta)
    members = list(order) if order is not None else sorted(U, key=sort_key)
    index = {r: i for i, r in enumerate(U.members)}
    stock = list(members)
    G, bad = [], [[] for _ in range(U.dim)]
    trace = []
    while stock:
        R = stock.pop(0)
        G.append(R)
        trace.append({"op": "good", "rect": index[R]})
        for axis in range(U.dim):
            moved = True
            while moved:
                moved = False
                for Rp in stock:
                    frac = _cover_fraction(Rp, G, axis)
                    if frac > theta:
                        stock.remove(Rp)
                        bad[axis].append(Rp)
                        trace.append({"op": "bad", "axis": axis, "rect": index[Rp], "cover": f"{frac.numerator}/{frac.denominator}"})
                        moved = True
                        break
    return GoodBadResult(RectCollection(G, U.dim), [RectCollection(b, U.dim) for b in bad], trace)


def replay(U: RectCollection, trace: list) -> GoodBadResult:
    """Rebuild a decomposition from its trace, checking every recorded decision."""
    G, bad = [], [[] for _ in range(U.dim)]
    for step in trace:
        R = U.members[step["rect"]]
        if step["op"] == "good":
            G.append(R)
        elif step["op"] == "bad":
            frac = _cover_fraction(R, G, step["axis"])
            if f"{frac.numerator}/{frac.denominator}" != step["cover"]:
                raise ValueError("trace does not match input")
            bad[step["axis"]].append(R)
        else:
            raise ValueError(f"unknown trace op {step['op']!r}")
    if len(G) + sum(map(len, bad)) != len(U):
        raise ValueError("trace does not cover the input")
    return GoodBadResult(RectCollection(G, U.dim), [RectCollection(b, U.dim) for b in bad], list(trace))


def insertion_private_fractions(U: RectCollection, result: GoodBadResult) -> list[Fraction]:
    """For each good rectangle and axis: uncovered share against longer earlier good rectangles."""
    out, G = [], []
    for step in result.trace:
        if step["op"] != "good":
            continue
        R = U.members[step["rect"]]
        for axis in range(U.dim):
            out.append(1 - _cover_fraction(R, G, axis))
        G.append(R)
    return out


@dataclass(frozen=True)
class BBResult:
    passed: bool
    counterexample: dict | None = None


def bb_empty_check(U: RectCollection, theta=Fraction(8, 9)) -> BBResult:
    """B_j(B_j(U)) is empty for every axis j."""
    first = good_bad_decompose(U, theta)
    for axis, Bj in enumerate(first.bad):
        if not len(Bj):
            continue
        second = good_bad_decompose(Bj, theta)
        if len(second.bad[axis]):
            return BBResult(False, {"axis": axis, "trace": second.trace,
                                    "rects": [repr(r) for r in second.bad[axis].members]})
    return BBResult(True)


def essential_disjointness(G: RectCollection) -> Fraction:
    """min over R of |R minus the union of the others| / |R| (1 for an empty family)."""
    best = Fraction(1)
    for i, R in enumerate(G):
        others = [s for j, s in enumerate(G) if j != i]
        frac = 1 - covered_measure(R, others) / R.measure
        best = min(best, frac)
    return best


# ---------------------------------------------------------- F(I, j, U')


def emb_bucket(e: Fraction) -> int:
    """j with 2**(j-1) <= e < 2**j, for e >= 1."""
    return _floor_log2(e) + 1


def f_sets(Up: RectCollection, V: Region, axis: int = 0) -> dict:
    """(I, j) -> F(I, j, Up): union of members with side I on ``axis`` and emb bucket j."""
    groups = defaultdict(list)
    for R in Up:
        e = emb_directional(R, V, [axis]).value
        groups[(R.sides[axis], emb_bucket(e))].append(R)
    return {key: Region.from_boxes(rs, Up.dim) for key, rs in sorted(groups.items())}


@dataclass(frozen=True)
class FewSetsReport:
    sum_lower: Fraction
    sum_upper: Fraction
    shadow: Fraction
    lp_power_upper: Fraction | None = None  # upper bound for ||G||_p**p
    p: int | None = None

    @property
    def ratio_upper(self) -> Fraction:
        return self.sum_upper / self.shadow if self.shadow else Fraction(0)

    @property
    def lp_ratio_power_upper(self) -> Fraction | None:
        """(||G||_p / |sh|^(1/p))**p"""
        if self.lp_power_upper is None or not self.shadow:
            return None
        return self.lp_power_upper / self.shadow


def pipher_sum(fsets: dict, eps, shadow: Fraction, n: int | None = None, p: int | None = None,
               cell=None, window=None) -> FewSetsReport:
    """sum_j sum_I 2^(-eps j) |F(I,j)|, optionally with the L^p functional.

    The functional uses the lattice maximal function on a bounded window
    (a lower bound for the full strong maximal function there).
    """
    eps = as_fraction(eps)
    lo_sum, hi_sum = Fraction(0), Fraction(0)
    coeff = {}
    for (I, j), F in fsets.items():
        lo, hi = power_bracket(Fraction(2), -eps * j)
        coeff[(I, j)] = hi
        lo_sum += lo * F.measure
        hi_sum += hi * F.measure
    if n is None or p is None or not fsets:
        return FewSetsReport(lo_sum, hi_sum, shadow)
    total = None
    for key, F in fsets.items():
        M = lattice_maximal_function(StepFunction.indicator(F), cell, window)
        term = StepFunction(M.dim, M.coords, (M.values ** n) * coeff[key], _canon=True)
        total = term if total is None else total + term
    return FewSetsReport(lo_sum, hi_sum, shadow, total.lp_power(p), p)


def default_window(U: RectCollection, pad: Fraction = Fraction(1)) -> list[tuple[Fraction, Fraction]]:
    """Bounding box of the shadow widened by ``pad`` times its extent on each side."""
    b = U.shadow.bbox()
    return [(lo - pad * (hi - lo), hi + pad * (hi - lo)) for lo, hi in zip(b.lo, b.hi)]
