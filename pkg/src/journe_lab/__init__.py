"""Exact-arithmetic constructions around Journe's covering lemma.

Dyadic and shifted grids, maximal-operator superlevel sets, enlarged sets,
embeddedness, covering decompositions and product Carleson norms, all over
exact rationals.
"""

from .carleson import CarlesonWeight, cm_ell_norm, cm_norm, cm_rec_norm
from .geometry import Box, DyadicInterval, DyadicRect, Region, RectCollection, StepFunction

__version__ = "0.1.0"

__all__ = [
    "Box",
    "CarlesonWeight",
    "DyadicInterval",
    "DyadicRect",
    "RectCollection",
    "Region",
    "StepFunction",
    "cm_ell_norm",
    "cm_norm",
    "cm_rec_norm",
]
