"""Regression ledger: frozen empirical constants with provenance.

A constant is written once (on a run with ``freeze=True``) and then only read.
A passing run never rewrites an entry; a failing metric can only be raised by
an explicit re-freeze.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from fractions import Fraction
from math import ceil

from .exact import fmt_rational, parse_rational

GRID = 2**20  # frozen constants are rounded up to this grid


class LedgerMissing(KeyError):
    pass


def round_up(x: Fraction) -> Fraction:
    return Fraction(ceil(Fraction(x) * GRID), GRID)


@dataclass(frozen=True)
class LedgerCheck:
    key: str
    observed: Fraction
    constant: Fraction | None
    frozen_now: bool

    @property
    def passed(self) -> bool:
        return self.constant is not None and self.observed <= self.constant


class RegressionLedger:
    def __init__(self, path: str | None = None, entries: dict | None = None):
        self.path = path
        self.entries = dict(entries or {})

    @classmethod
    def load(cls, path: str) -> "RegressionLedger":
        if not os.path.exists(path):
            return cls(path, {})
        with open(path) as fh:
            return cls(path, json.load(fh).get("constants", {}))

    def save(self, path: str | None = None) -> None:
        path = path or self.path
        if path is None:
            raise ValueError("no ledger path")
        with open(path, "w") as fh:
            json.dump({"version": 1, "constants": self.entries}, fh, sort_keys=True, indent=1)
            fh.write("\n")

    @staticmethod
    def key(suite: str, metric: str) -> str:
        return f"{suite}/{metric}"

    def constant(self, key: str) -> Fraction | None:
        e = self.entries.get(key)
        return None if e is None else parse_rational(e["value"])

    def check(self, key: str, observed, freeze: bool = False, provenance: dict | None = None) -> LedgerCheck:
        observed = Fraction(observed)
        const = self.constant(key)
        if const is not None and observed <= const:
            return LedgerCheck(key, observed, const, False)
        if not freeze:
            if const is None:
                raise LedgerMissing(f"no frozen constant for {key}; run once with --freeze")
            return LedgerCheck(key, observed, const, False)
        value = round_up(observed)
        self.entries[key] = {
            "value": fmt_rational(value),
            "observed": fmt_rational(observed),
            "frozen_at": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
            **(provenance or {}),
        }
        return LedgerCheck(key, observed, value, True)


def default_path() -> str:
    """The ledger shipped with the package."""
    return os.path.join(os.path.dirname(__file__), "data", "ledger.json")
