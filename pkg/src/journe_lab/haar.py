"""Product Haar coefficients and product BMO norms of dyadic step functions.

Haar functions are unnormalized: h_I = -1 on the left half of I and +1 on the
right half, so <h_I, h_I> = |I|. The product BMO norm squared is the Carleson
norm of alpha(R) = <b, h_R>^2 and BMO(rec) is its rectangular norm.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable

import numpy as np

from .carleson import (
    CarlesonWeight,
    CmReport,
    RestrictedRatio,
    carleson_family,
    cm_norm,
    cm_rec_norm,
    cm_restricted_ratio,
)
from .exact import as_fraction, two_adic_valuation
from .geometry import Box, DyadicInterval, DyadicRect, GeometryError, Region, StepFunction, _merge

__all__ = [
    "HaarSpectrum",
    "haar_coeff",
    "haar_function",
    "spectrum",
    "bmo_norms",
    "BmoReport",
    "carleson_family",
    "coefficient_function",
    "carleson_function",
    "bmo_projection_check",
    "rect_oscillation",
    "normalized_rec_sum",
]


class HaarError(GeometryError):
    pass


def _halves(I: DyadicInterval) -> tuple:
    left, right = I.children()
    return ((left.lo, left.hi, -1), (right.lo, right.hi, 1))


def haar_coeff(b: StepFunction, R: DyadicRect) -> Fraction:
    """<b, h_R> = sum over the 2^d sub-boxes of sign * mass, exactly."""
    if b.is_zero:
        return Fraction(0)
    total = Fraction(0)
    for combo in product(*(_halves(s) for s in R.sides)):
        sign = 1
        for c in combo:
            sign *= c[2]
        total += sign * b.mass_in_box(Box(tuple(c[0] for c in combo), tuple(c[1] for c in combo)))
    return total


def haar_function(R: DyadicRect, coeff=1) -> list[tuple[Box, Fraction]]:
    """coeff * h_R as signed pieces (value, box)."""
    coeff = as_fraction(coeff)
    out = []
    for combo in product(*(_halves(s) for s in R.sides)):
        sign = 1
        for c in combo:
            sign *= c[2]
        out.append((Box(tuple(c[0] for c in combo), tuple(c[1] for c in combo)), sign * coeff))
    return out


def coefficient_function(coeffs: dict, dim: int) -> StepFunction:
    """sum c_R h_R / |R| as a signed step function."""
    pieces = []
    for R, c in coeffs.items():
        pieces.extend(haar_function(R, as_fraction(c) / R.measure))
    if not pieces:
        return StepFunction(dim)
    coords = [sorted({x for bx, _ in pieces for x in (bx.lo[a], bx.hi[a])}) for a in range(dim)]
    index = [{x: i for i, x in enumerate(c)} for c in coords]
    vals = np.full(tuple(len(c) - 1 for c in coords), Fraction(0), dtype=object)
    for bx, v in pieces:
        vals[tuple(slice(index[a][bx.lo[a]], index[a][bx.hi[a]]) for a in range(dim))] += v
    return StepFunction(dim, coords, vals)


@dataclass(frozen=True)
class HaarSpectrum:
    dim: int
    coeffs: tuple  # sorted ((DyadicRect, Fraction), ...), nonzero only
    scales: tuple  # per axis (kmin, kmax) of the enumerated window

    def as_dict(self) -> dict:
        return dict(self.coeffs)

    def weight(self) -> CarlesonWeight:
        return CarlesonWeight.from_map({R: c * c for R, c in self.coeffs}, self.dim)

    def restrict(self, keep: Iterable) -> "HaarSpectrum":
        keep = set(keep)
        return HaarSpectrum(self.dim, tuple((R, c) for R, c in self.coeffs if R in keep), self.scales)


def _axis_window(coords, extra: int) -> tuple[int, int]:
    vals = [two_adic_valuation(x) for x in coords if x != 0]
    if any(v is None for v in vals):
        raise HaarError("Haar analysis needs dyadic breakpoints")
    width = coords[-1] - coords[0]
    kmin = min(vals + [two_adic_valuation(width)]) + 1
    kmax = kmin
    while Fraction(2) ** kmax < width:
        kmax += 1
    return kmin, kmax + 1 + extra


def spectrum(b, extra: int = 0, cap: int = 200_000) -> HaarSpectrum:
    """All nonzero <b, h_R> over a finite window of scales.

    On each axis the window runs from the finest scale at which b can vary
    inside an interval up to the first scale exceeding the support width (plus
    ``extra``). Intervals finer than the window see b constant along that axis,
    so their coefficients vanish. Coarser intervals are truncated; their
    coefficients vanish when b has mean zero along each axis.
    """
    dim = b.dim
    src = b
    if src.is_zero:
        return HaarSpectrum(dim, (), ())
    windows = [_axis_window(c, extra) for c in src.coords]
    per_axis = []
    for a, (kmin, kmax) in enumerate(windows):
        lo, hi = src.coords[a][0], src.coords[a][-1]
        ivs = []
        for k in range(kmin, kmax + 1):
            L = Fraction(2) ** k
            for j in range((lo / L).__floor__(), -((-hi / L).__floor__())):
                ivs.append(DyadicInterval(k, j))
        per_axis.append(ivs)
    total = 1
    for p in per_axis:
        total *= len(p)
    if total > cap:
        from .grids import CapExceeded

        raise CapExceeded(f"spectrum window of {total} rectangles exceeds cap")
    out = []
    for sides in product(*per_axis):
        R = DyadicRect(sides)
        c = haar_coeff(b, R)
        if c:
            out.append((R, c))
    return HaarSpectrum(dim, tuple(sorted(out)), tuple(windows))


@dataclass(frozen=True)
class BmoReport:
    bmo_sq: CmReport
    rec_sq: CmReport

    @property
    def ratio(self) -> Fraction:
        """BMO(rec)^2 / BMO^2"""
        return self.rec_sq.value / self.bmo_sq.value if self.bmo_sq.value else Fraction(0)


def bmo_norms(b, cap: int = 18, extra: int = 0, spec: HaarSpectrum | None = None) -> BmoReport:
    spec = spectrum(b, extra) if spec is None else spec
    alpha = spec.weight()
    if not alpha.entries:
        z = CmReport("exact", Fraction(0), ())
        return BmoReport(z, CmReport("rec", Fraction(0), ()))
    return BmoReport(cm_norm(alpha, cap), cm_rec_norm(alpha))


def carleson_function(n: int) -> StepFunction:
    """b = sum over the staircase of h_R / |R|, whose squared coefficients are 1 there."""
    return coefficient_function({R: Fraction(1) for R in carleson_family(n).support}, 2)


def bmo_projection_check(spec: HaarSpectrum, V: Region, emb_of, mu, eps, cap: int = 18) -> RestrictedRatio:
    """||projection onto {mu <= emb < 2 mu}||_BMO^2 / (mu^(2 eps) ||b||_BMO(rec)^2), bracketed."""
    return cm_restricted_ratio(spec.weight(), V, emb_of, mu, 2 * as_fraction(eps), cap)


# ------------------------------------------------- oscillation cross-check


def rect_oscillation(b: StepFunction, R0: DyadicRect) -> Fraction:
    """Mean over R0 of |b - avg_I b - avg_J b + avg_{IxJ} b|^2 (2-D, four-term form)."""
    if R0.dim != 2:
        raise HaarError("the oscillation form is two-dimensional")
    bx = R0.box
    coords = [_merge(b.coords[a] if not b.is_zero else (), (bx.lo[a], bx.hi[a])) for a in range(2)]
    vals = b.on_grid(coords)
    sl = []
    for a in range(2):
        c = coords[a]
        sl.append(slice(c.index(bx.lo[a]), c.index(bx.hi[a])))
    v = vals[sl[0], sl[1]]
    wx = np.array([y - x for x, y in zip(coords[0][sl[0]], coords[0][sl[0].start + 1 : sl[0].stop + 1])], dtype=object)
    wy = np.array([y - x for x, y in zip(coords[1][sl[1]], coords[1][sl[1].start + 1 : sl[1].stop + 1])], dtype=object)
    lx, ly = bx.hi[0] - bx.lo[0], bx.hi[1] - bx.lo[1]
    avg_x = (v * wx[:, None]).sum(axis=0) / lx  # function of y
    avg_y = (v * wy[None, :]).sum(axis=1) / ly  # function of x
    avg = (avg_x * wy).sum() / ly
    D = v - avg_x[None, :] - avg_y[:, None] + avg
    return Fraction((D * D * np.multiply.outer(wx, wy)).sum()) / (lx * ly)


def normalized_rec_sum(spec: HaarSpectrum, R0: DyadicRect) -> Fraction:
    """|R0|^-1 sum_{R inside R0} <b, h_R>^2 / |R| (the L^2-normalized coefficient form)."""
    return sum((c * c / R.measure for R, c in spec.coeffs if R0.contains(R)), Fraction(0)) / R0.measure
