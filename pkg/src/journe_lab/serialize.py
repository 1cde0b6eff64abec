"""JSON I/O for collections, regions, step functions and weights.

Dyadic coordinates travel as ``[mantissa, exponent]`` pairs; any other
rational travels as a ``"p/q"`` string.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .exact import DyadicRational, as_fraction, fmt_rational
from .geometry import Box, DyadicRect, GeometryError, Region, RectCollection, StepFunction


def coord_to_json(x: Fraction):
    x = Fraction(x)
    try:
        return DyadicRational.from_fraction(x).to_json()
    except ValueError:
        return fmt_rational(x)


def coord_from_json(v) -> Fraction:
    if isinstance(v, list):
        return DyadicRational.from_json(v).to_fraction()
    if isinstance(v, str):
        return as_fraction(v)
    if isinstance(v, int):
        return Fraction(v)
    raise GeometryError(f"bad coordinate {v!r}")


def rect_to_json(r) -> dict:
    b = r.box
    return {"lo": [coord_to_json(x) for x in b.lo], "hi": [coord_to_json(x) for x in b.hi]}


def rect_from_json(obj: dict, dyadic: bool = True):
    b = Box(tuple(coord_from_json(v) for v in obj["lo"]), tuple(coord_from_json(v) for v in obj["hi"]))
    if dyadic:
        try:
            return DyadicRect.from_box(b)
        except GeometryError:
            return b
    return b


def collection_to_json(U: RectCollection) -> dict:
    return {"dim": U.dim, "rects": [rect_to_json(r) for r in U]}


def collection_from_json(obj: dict) -> RectCollection:
    return RectCollection([rect_from_json(r) for r in obj["rects"]], dim=int(obj["dim"]))


def region_to_json(W: Region) -> dict:
    return {"dim": W.dim, "rects": [rect_to_json(b) for b in W.boxes()]}


def region_from_json(obj: dict) -> Region:
    return Region.from_boxes([rect_from_json(r, dyadic=False) for r in obj["rects"]], int(obj["dim"]))


def step_to_json(f: StepFunction) -> dict:
    return {"dim": f.dim, "pieces": [{"rect": rect_to_json(b), "value": fmt_rational(v)} for b, v in f.pieces()]}


def step_from_json(obj: dict) -> StepFunction:
    dim = int(obj["dim"])
    pieces = [(rect_from_json(p["rect"], dyadic=False), as_fraction(str(p["value"]))) for p in obj["pieces"]]
    return StepFunction.from_pieces(pieces, dim)


def dumps(obj) -> str:
    """Canonical text form: sorted keys, compact separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def load_file(path: str):
    with open(path) as fh:
        return json.load(fh)


def save_file(path: str, obj) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(obj))
