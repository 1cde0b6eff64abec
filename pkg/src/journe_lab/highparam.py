"""Uniform embeddedness in d parameters, built coordinate by coordinate.

Stage m (axis m-1) enlarges the shadow of the current collection with the
one-coordinate shifted-grid operator, measures embeddedness along that axis,
and widens the axis-m sides to intervals of the shifted family D_1. The final
embeddedness of R is max(1, min_m beta^m(R) / 16), where beta^m is evaluated
at the largest admissible gamma (the fixed point gamma-bar).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .embedding import emb_directional, small_enlargement_1d
from .exact import as_fraction
from .geometry import Box, Region, RectCollection, dilate
from .grids import shifted_subgrids

SIXTEEN = Fraction(16)


def d1_intervals_between(inner: tuple, outer: tuple) -> list[tuple[Fraction, Fraction]]:
    """All D_1 intervals G with inner <= G <= outer (as sets), sorted by (-length, lo)."""
    a, b = inner
    c, e = outer
    if not (c <= a and b <= e):
        return []
    out = set()
    for g in shifted_subgrids(1):
        k_lo = g.scale_of_length(b - a)
        k_hi = g.scale_of_length(e - c)
        for k in range(k_lo, k_hi + 1):
            for j in g.offsets(k, a, b):
                lo, hi = g.interval(k, j)
                if lo <= a and b <= hi and c <= lo and hi <= e:
                    out.add((lo, hi))
    return sorted(out, key=lambda iv: (-(iv[1] - iv[0]), iv[0]))


def _scaled(side: tuple, factor: Fraction) -> tuple[Fraction, Fraction]:
    lo, hi = side
    c, h = (lo + hi) / 2, (hi - lo) * factor / 2
    return c - h, c + h


def _hull(s: tuple, t: tuple) -> tuple:
    return min(s[0], t[0]), max(s[1], t[1])


def widen_side(side: tuple, factor: Fraction) -> tuple | None:
    """Longest D_1 interval G with (side u factor/4 side) <= G <= factor*side, or None."""
    inner = _hull(side, _scaled(side, factor / 4))
    cands = d1_intervals_between(inner, _scaled(side, factor))
    return cands[0] if cands else None


def _sides(box: Box) -> list:
    return list(zip(box.lo, box.hi))


def _from_sides(sides) -> Box:
    return Box(tuple(s[0] for s in sides), tuple(s[1] for s in sides))


def phi(R: Box, gamma: Fraction, m: int) -> Box:
    """Sides j < m widened at level gamma (falling back to R_j), sides j >= m kept."""
    sides = _sides(R)
    for j in range(m):
        w = widen_side(sides[j], gamma)
        if w is not None:
            sides[j] = w
    return _from_sides(sides)


def emb_axis(P: Box, V: Region, axis: int) -> Fraction:
    """Embeddedness of P along one axis; 0 when P itself is not inside V."""
    if not V.contains_box(P):
        return Fraction(0)
    return emb_directional(P, V, [axis]).value


def gamma_candidates(R: Box, m: int, gamma_max: Fraction) -> list[Fraction]:
    """gamma values where the admissible D_1 widenings of sides j < m can change."""
    out = {Fraction(1), gamma_max}
    for j, (lo, hi) in enumerate(_sides(R)[:m]):
        c, w = (lo + hi) / 2, hi - lo
        reach = _scaled((lo, hi), gamma_max)
        pts = set()
        for g in shifted_subgrids(1):
            k_hi = g.scale_of_length(reach[1] - reach[0])
            for k in range(g.scale_of_length(w / 4) - 1, k_hi + 1):
                for jj in g.offsets(k, reach[0], reach[1]):
                    pts.update(g.interval(k, jj))
        for x in pts:
            for mult in (2, 8):
                gam = mult * abs(x - c) / w
                if 1 < gam < gamma_max:
                    out.add(gam)
    return sorted(out)


def beta_gamma(R: Box, gamma: Fraction, m: int, V: Region) -> Fraction:
    """beta^m_gamma(R) = emb along axis m of phi^m_gamma(R) in V^m (axis index m)."""
    return emb_axis(phi(R, gamma, m), V, m)


def gamma_bar(R: Box, m: int, V: Region, gamma_max: Fraction) -> tuple[Fraction, Fraction]:
    """Largest candidate gamma in [1, gamma_max] with beta_gamma >= gamma; returns (gamma, beta)."""
    cands = gamma_candidates(R, m, gamma_max)
    pieces = list(cands)
    pieces += [(a + b) / 2 for a, b in zip(cands, cands[1:])]
    values = {g: beta_gamma(R, g, m, V) for g in pieces}
    # interior crossings: beta constant on an open piece (a, b) and a < beta < b
    for a, b in zip(cands, cands[1:]):
        v = values[(a + b) / 2]
        if a < v < b:
            values[v] = beta_gamma(R, v, m, V)
    best = None
    for g in sorted(values):
        if values[g] >= g:
            best = g
    if best is None:
        best = Fraction(1)
        values.setdefault(best, beta_gamma(R, best, m, V))
    return best, values[best]


@dataclass
class UniformEmbedding:
    depth: int
    V: Region
    stages: list  # per stage: dict with V^m, collection U^m, shadow measures
    emb: dict  # original box -> Fraction
    iota: dict  # original box -> axis index (0-based)
    beta: dict  # original box -> list of beta^m values
    gamma_max: dict = field(default_factory=dict)  # (box, m) -> gamma_m(R)

    def containment_failures(self) -> list:
        """Rectangles R with emb(R) * R not inside V."""
        bad = []
        for R, e in self.emb.items():
            if not self.V.contains_box(dilate(R, [e] * R.dim)):
                bad.append(R)
        return bad


def uniform_embed_construct(U: RectCollection, depth: int) -> UniformEmbedding:
    if U.dim < 2:
        raise ValueError("the construction needs d >= 2")
    d = U.dim
    originals = [r.box for r in U]
    current = list(originals)  # U^{m-1} as a list of boxes
    stages = []
    beta = {R: [] for R in originals}
    gmax = {}
    for m in range(d):
        sh = Region.from_boxes(current, d)
        Vm = small_enlargement_1d(current, depth, m)
        # beta^m for every original rectangle
        for R in originals:
            if m == 0:
                b = emb_axis(R, Vm, 0)
            else:
                g = min(beta[R])
                gmax[(R, m)] = g
                _, b = gamma_bar(R, m, Vm, g)
            beta[R].append(b)
        # next collection: widen side m by every admissible D_1 interval
        nxt = []
        for P in current:
            e = emb_axis(P, Vm, m)
            sides = _sides(P)
            inner = _hull(sides[m], _scaled(sides[m], e / 4))
            gammas = d1_intervals_between(inner, _scaled(sides[m], e))
            if not gammas:
                nxt.append(P)
            for G in gammas:
                s2 = list(sides)
                s2[m] = G
                nxt.append(_from_sides(s2))
        stages.append({"V": Vm, "shadow": sh.measure, "V_measure": Vm.measure, "size": len(current)})
        current = list(dict.fromkeys(nxt))
    V = stages[-1]["V"]
    emb, iota = {}, {}
    for R in originals:
        bs = beta[R]
        low = min(bs)
        emb[R] = max(Fraction(1), low / SIXTEEN)
        iota[R] = bs.index(low)
    return UniformEmbedding(depth, V, stages, emb, iota, beta, gmax)


def beta_monotonicity_violations(R: Box, m: int, V: Region, gamma_max: Fraction, samples: int = 16) -> list:
    """(g1, g2, b1, b2) with g1 < g2 but beta_g1 < beta_g2 on a sampled gamma grid."""
    gamma_max = as_fraction(gamma_max)
    if gamma_max <= 1:
        return []
    grid = [1 + (gamma_max - 1) * Fraction(i, samples) for i in range(samples + 1)]
    vals = [beta_gamma(R, g, m, V) for g in grid]
    return [(grid[i], grid[i + 1], vals[i], vals[i + 1]) for i in range(samples) if vals[i] < vals[i + 1]]
