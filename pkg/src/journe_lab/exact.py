"""Exact scalar helpers: dyadic rationals, rational parsing, certified roots."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from math import gcd

Rational = Fraction


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, DyadicRational):
        return x.to_fraction()
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, float):
        raise TypeError("floats are not accepted in exact code paths")
    return Fraction(x)


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"``, ``"p"`` or ``"a.b"`` into an exact Fraction."""
    text = text.strip()
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational: {text!r}") from exc


def fmt_rational(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def pow2(k: int) -> Fraction:
    return Fraction(2**k) if k >= 0 else Fraction(1, 2 ** (-k))


def two_adic_valuation(x: Fraction) -> int | None:
    """Largest k with x in 2^k Z, or None when x is not dyadic (or is zero)."""
    x = Fraction(x)
    if x == 0:
        return None
    den = x.denominator
    if den & (den - 1):
        return None
    num = abs(x.numerator)
    v = (num & -num).bit_length() - 1
    return v - (den.bit_length() - 1)


@total_ordering
@dataclass(frozen=True)
class DyadicRational:
    """mantissa * 2**exponent, canonical with odd mantissa (or zero mantissa, exponent 0)."""

    mantissa: int
    exponent: int = 0

    def __post_init__(self):
        m, e = self.mantissa, self.exponent
        if m == 0:
            e = 0
        else:
            tz = (m & -m).bit_length() - 1
            m >>= tz
            e += tz
        object.__setattr__(self, "mantissa", m)
        object.__setattr__(self, "exponent", e)

    @classmethod
    def from_fraction(cls, x: Fraction) -> "DyadicRational":
        x = Fraction(x)
        if x == 0:
            return cls(0, 0)
        den = x.denominator
        if den & (den - 1):
            raise ValueError(f"{x} is not a dyadic rational")
        return cls(x.numerator, -(den.bit_length() - 1))

    def to_fraction(self) -> Fraction:
        return self.mantissa * pow2(self.exponent)

    def __lt__(self, other):
        return self.to_fraction() < as_fraction(other)

    def __eq__(self, other):
        if isinstance(other, DyadicRational):
            return (self.mantissa, self.exponent) == (other.mantissa, other.exponent)
        try:
            return self.to_fraction() == as_fraction(other)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash(self.to_fraction())

    def to_json(self) -> list:
        return [_json_int(self.mantissa), _json_int(self.exponent)]

    @classmethod
    def from_json(cls, pair) -> "DyadicRational":
        m, e = pair
        return cls(int(m), int(e))


def _json_int(n: int):
    # integers beyond 64 bits travel as decimal strings
    if -(2**63) <= n < 2**63:
        return n
    return str(n)


def iroot(n: int, q: int) -> int:
    """floor(n ** (1/q)) for n >= 0."""
    if n < 0:
        raise ValueError("negative radicand")
    if n < 2 or q == 1:
        return n
    x = 1 << ((n.bit_length() + q - 1) // q)
    while True:
        y = ((q - 1) * x + n // x ** (q - 1)) // q
        if y >= x:
            break
        x = y
    while x**q > n:
        x -= 1
    while (x + 1) ** q <= n:
        x += 1
    return x


def root_bracket(x: Fraction, q: int, bits: int = 64) -> tuple[Fraction, Fraction]:
    """Rationals lo <= x**(1/q) <= hi with hi - lo <= 2**-bits (relative to scale)."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("negative base")
    if q == 1 or x == 0:
        return x, x
    scale = 1 << bits
    # x^(1/q) * scale = (x * scale^q)^(1/q)
    num = x.numerator * scale**q
    lo_int = iroot(num // x.denominator, q)
    lo = Fraction(lo_int, scale)
    if lo**q == x:
        return lo, lo
    return lo, Fraction(lo_int + 1, scale)


def power_bracket(base: Fraction, eps: Fraction, bits: int = 64) -> tuple[Fraction, Fraction]:
    """Certified bracket of base**eps for base > 0 and rational eps (any sign)."""
    base, eps = Fraction(base), Fraction(eps)
    if base <= 0:
        raise ValueError("base must be positive")
    p, q = eps.numerator, eps.denominator
    if p < 0:
        base, p = 1 / base, -p
    lo, hi = root_bracket(base**p, q, bits)
    return lo, hi


def lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b
