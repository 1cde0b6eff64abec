"""Verification suites over seeded corpora.

Each suite returns a :class:`SuiteResult` holding exact-property violations
and ratio metrics. Ratio metrics are compared against the regression ledger
by :func:`run_suite`.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

import numpy as np

from .carleson import (
    CarlesonWeight,
    carleson_family,
    cm_ell_norm,
    cm_norm,
    cm_rec_norm,
    dilate_step,
    dilate_weight,
    jn_lp,
    t_alpha_apply,
    weak_instance_check,
)
from .corpus import (
    incomparable_collection,
    random_rect,
    random_step,
    random_union_1d,
    random_weight,
    rng_for,
    uniform_collection,
)
from .embedding import (
    EmbSpec,
    breakpoints,
    emb_directional,
    emb_uniform,
    four_translate_check,
    small_enlargement,
)
from .exact import fmt_rational
from .geometry import Box, DyadicInterval, DyadicRect, Region, RectCollection, StepFunction, dilate
from .grids import DyadicGrid, delta, shifted_cover, shifted_subgrids, verify_grid_property
from .highparam import beta_monotonicity_violations, uniform_embed_construct
from .journe import (
    IncomparabilityError,
    bb_empty_check,
    default_window,
    enlargement_for,
    f_sets,
    good_bad_decompose,
    insertion_private_fractions,
    journe_sum,
    packing_sweep,
    pipher_sum,
    standard_reduction,
)
from .ledger import LedgerMissing, RegressionLedger
from .maximal import small_weak_check, weak_type_check

CSV_HEADER = "#journe-lab v1"


@dataclass
class SuiteResult:
    name: str
    seed: int
    checks: int = 0
    violations: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)  # metric -> observed maximum
    rows: list = field(default_factory=list)
    seconds: float = 0.0

    def observe(self, metric: str, value) -> None:
        value = Fraction(value)
        if metric not in self.metrics or value > self.metrics[metric]:
            self.metrics[metric] = value

    def fail(self, what) -> None:
        self.violations.append(what)

    @property
    def exact_ok(self) -> bool:
        return not self.violations


# ------------------------------------------------------------- 1: grids


def suite_grids(seed: int = 0, depths=(1, 2, 3), scales=range(-6, 7), offsets=range(-64, 65)) -> SuiteResult:
    res = SuiteResult("grids", seed)
    for depth in depths:
        for g in shifted_subgrids(depth):
            v = verify_grid_property(g, scales, offsets)
            res.checks += 1
            res.rows.append({"grid": g.label(), "violations": len(v)})
            for x in v:
                res.fail((g.label(), x))
    return res


# --------------------------------------------------------- 2: shifted cover


def suite_cover(seed: int = 0, depths=(1, 2, 3), scales=range(-6, 7), offsets=range(-64, 65)) -> SuiteResult:
    res = SuiteResult("cover", seed)
    for depth in depths:
        dl = Fraction(1, 2**depth + 1)
        for k in scales:
            for j in offsets:
                I = DyadicInterval(k, j)
                for t, w in zip((1, -1), shifted_cover(I, depth)):
                    res.checks += 1
                    want = (I.lo + t * dl * I.length, I.hi + t * dl * I.length)
                    if w.reconstruct() != want or w.grid.depth != depth:
                        res.fail((depth, k, j, t))
    return res


# ------------------------------------------------------- 3: weak type one


def suite_weak_type(seed: int = 0, instances: int = 1000, levels: int = 5) -> SuiteResult:
    res = SuiteResult("weak-type", seed)
    grids = [DyadicGrid()] + [g for d in (1, 2, 3) for g in shifted_subgrids(d)]
    for i in range(instances):
        rng = rng_for(seed, i)
        f = random_step(rng, 1, int(rng.integers(1, 6)), 4, -2)
        while f.is_zero:  # redraw from the same stream so every instance counts
            f = random_step(rng, 1, int(rng.integers(1, 6)), 4, -2)
        g = grids[int(rng.integers(0, len(grids)))]
        for _ in range(levels):
            lam = Fraction(int(rng.integers(1, 9)), int(rng.integers(1, 5)))
            r = weak_type_check(g, f, lam)
            res.checks += 1
            if not r.passed:
                res.fail((i, g.label(), fmt_rational(lam), fmt_rational(r.lhs), fmt_rational(r.rhs)))
    return res


# ------------------------------------------------------ 4: small weak type


def suite_small_weak(seed: int = 0, instances: int = 200, depths=range(2, 7)) -> SuiteResult:
    """kappa / (delta depth) per depth; kappa is also expected to decrease in depth."""
    res = SuiteResult("small-weak", seed)
    for i in range(instances):
        rng = rng_for(seed, i)
        U = random_union_1d(rng, int(rng.integers(1, 6)))
        ks = []
        for d in depths:
            r = small_weak_check(U, d)
            res.checks += 1
            ks.append(r.kappa)
            res.observe("kappa_over_delta_depth", r.kappa / (delta(d) * d))
            res.rows.append({"instance": i, "depth": d, "kappa": fmt_rational(r.kappa)})
            if not r.within_bound:
                res.fail((i, d, "kappa above the per-subgrid weak bound"))
        for a, b in zip(ks, ks[1:]):
            if a > 0 and not b < a or a == 0 and b != 0:
                res.fail((i, "kappa not decreasing", [fmt_rational(k) for k in ks]))
    return res


# --------------------------------------------------------------- 5: packing


def suite_packing(seed: int = 0, instances: int = 500, max_n: int = 100, extent: int = 8) -> SuiteResult:
    res = SuiteResult("packing", seed)
    for i in range(instances):
        rng = rng_for(seed, i)
        n = int(rng.integers(1, max_n + 1))
        U = incomparable_collection(rng, n, 2, 0, extent - 2, extent)
        amb = U.shadow
        for pr in packing_sweep(U, amb):
            res.checks += 1
            if not pr.passed:
                res.fail((i, pr.I, pr.k, fmt_rational(pr.total), fmt_rational(pr.bound)))
    return res


# -------------------------------------------------------------- 6: good/bad


THETA = Fraction(8, 9)


def suite_good_bad(seed: int = 0, instances: int = 200, mus=(2, 4, 8), n: int = 10) -> SuiteResult:
    res = SuiteResult("good-bad", seed)
    spec = EmbSpec("uniform")
    for i in range(instances):
        rng = rng_for(seed, i)
        U = uniform_collection(rng, n, 2, 0, 3, 5)
        V = enlargement_for("uniform", U)
        for mu in mus:
            for cls in standard_reduction(U, V, spec, mu):
                r = bb_empty_check(cls, THETA)
                res.checks += 1
                if not r.passed:
                    res.fail((i, mu, r.counterexample))
                dec = good_bad_decompose(cls, THETA)
                for frac in insertion_private_fractions(cls, dec):
                    if frac < 1 - THETA:
                        res.fail((i, mu, "private fraction", fmt_rational(frac)))
    return res


# ---------------------------------------------------------- 7: Journe sums


JOURNE_VARIANTS = ("classic", "uniform", "redux", "pipher-rect")


def suite_journe(seed: int = 0, instances: int = 500, subsets: int = 50, eps=Fraction(1, 2),
                 max_n: int = 12) -> SuiteResult:
    res = SuiteResult("journe", seed)
    for i in range(instances):
        rng = rng_for(seed, i)
        extent = 3 if i % 2 else 2
        U = incomparable_collection(rng, int(rng.integers(1, max_n + 1)), 2, 0, extent - 1, extent)
        cache: dict = {}
        Vs = {v: enlargement_for(v, U) for v in JOURNE_VARIANTS}
        picks = [np.ones(len(U), dtype=bool)] + [rng.random(len(U)) < 0.5 for _ in range(subsets - 1)]
        for mask in picks:
            Up = RectCollection([r for r, keep in zip(U, mask) if keep], 2)
            if not len(Up):
                continue
            for v in JOURNE_VARIANTS:
                rep = journe_sum(Up, Vs[v], v, eps, cache)
                res.checks += 1
                res.observe(f"ratio_upper:{v}", rep.ratio_upper)
        res.rows.append({"instance": i, "n_rects": len(U)})
    return res


# ---------------------------------------------------- 8: small enlargement


def suite_small_enlargement(seed: int = 0, instances: int = 100, depths=(2, 3, 4)) -> SuiteResult:
    res = SuiteResult("small-enlargement", seed)
    for i in range(instances):
        rng = rng_for(seed, i)
        U = uniform_collection(rng, int(rng.integers(1, 6)), 2, -1, 2, 3)
        depth = depths[i % len(depths)]
        se = small_enlargement(U, depth)
        res.observe("excess_over_delta_depth", se.excess / (se.delta * depth))
        R = U[int(rng.integers(0, len(U)))]
        res.checks += 1
        if not four_translate_check(R, se):
            res.fail((i, depth, repr(R)))
        res.rows.append({"instance": i, "depth": depth, "excess": fmt_rational(se.excess)})
    return res


# ------------------------------------------------------- 9: Carleson norms


def _scaled_weight(rng, n: int, dim: int) -> CarlesonWeight:
    U = uniform_collection(rng, n, dim, -1, 1, 2)
    return CarlesonWeight.from_map({r: r.measure * Fraction(int(rng.integers(1, 5)), 4) for r in U}, dim)


def suite_carleson(seed: int = 0, instances: int = 100, max_gen: int = 16, cap: int = 16) -> SuiteResult:
    """CM(rec) <= CM(1) <= ... <= CM(d) = CM, heuristic <= exact, witnesses re-evaluate."""
    from .carleson import collection_ratio

    res = SuiteResult("carleson", seed)
    for i in range(instances):
        rng = rng_for(seed, i)
        dim = 2 if i % 4 else 3
        a = _scaled_weight(rng, int(rng.integers(1, (max_gen if dim == 2 else 10) + 1)), dim)
        if len(a.generators()) > max_gen:
            continue
        exact = cm_norm(a, cap)
        chain = [cm_rec_norm(a)] + [cm_ell_norm(a, l, cap) for l in range(1, dim + 1)]
        heur = cm_norm(a, mode="heuristic")
        res.checks += 1
        vals = [c.value for c in chain]
        if any(x > y for x, y in zip(vals, vals[1:])) or vals[-1] != exact.value:
            res.fail((i, "chain", [fmt_rational(v) for v in vals], fmt_rational(exact.value)))
        if heur.value > exact.value:
            res.fail((i, "heuristic above exact"))
        for rep in chain + [exact, heur]:
            if collection_ratio(a, rep.witness) != rep.value:
                res.fail((i, "witness", rep.mode))
        res.rows.append({"instance": i, "dim": dim, "cm": fmt_rational(exact.value), "rec": fmt_rational(vals[0])})
    stair = staircase_values(6)
    res.checks += 1
    if stair[0][1:] != (Fraction(2, 3), Fraction(1, 2)) or stair[1][1:] != (Fraction(3, 8), Fraction(1, 4)):
        res.fail(("staircase values", [(n, fmt_rational(a), fmt_rational(b)) for n, a, b in stair[:2]]))
    ratios = [rec / cm for _, cm, rec in stair]
    if any(not b < a for a, b in zip(ratios, ratios[1:])):
        res.fail(("staircase ratio not strictly decreasing", [fmt_rational(r) for r in ratios]))
    return res


def staircase_values(nmax: int = 6) -> list[tuple[int, Fraction, Fraction]]:
    return [(n, cm_norm(carleson_family(n)).value, cm_rec_norm(carleson_family(n)).value) for n in range(1, nmax + 1)]


# ------------------------------------------------------ 10: John-Nirenberg


def suite_john_nirenberg(seed: int = 0, instances: int = 100, p: int = 2) -> SuiteResult:
    from .geometry import rect

    res = SuiteResult("john-nirenberg", seed)
    single = jn_lp(carleson_family(0), [rect((0, 0), (0, 0))], p)
    res.checks += 1
    if single.ratio_power != 1 or single.lhs != single.rhs:
        res.fail(("single rectangle", fmt_rational(single.ratio_power)))
    for i in range(instances):
        rng = rng_for(seed, i)
        a = _scaled_weight(rng, int(rng.integers(1, 13)), 2)
        rep = jn_lp(a, a.support, p)
        res.checks += 1
        res.observe("ratio_upper", rep.ratio_upper)
    return res


# ------------------------------------------------- 11: weak-type instance


def suite_weak_instance(seed: int = 0, instances: int = 50, p: int = 2, levels=(1, 2)) -> SuiteResult:
    """Normalized superlevel measures, plus the dilation relabeling.

    Checked exactly: T_beta (f o D) = (T_alpha f) o D with beta(R) = alpha(2^L R)
    and D(x) = 2^L x, and CM(beta) = 2^(L d) CM(alpha). The literal claim
    CM(beta) = CM(alpha) is checked too and reported as a violation when false.
    """
    res = SuiteResult("weak-instance", seed)
    for i in range(instances):
        rng = rng_for(seed, i)
        a = _scaled_weight(rng, int(rng.integers(1, 9)), 2)
        R = a.support[int(rng.integers(0, len(a.support)))]
        tests = [random_step(rng, 2, 4, 2, -1), StepFunction.indicator(Region.from_boxes([R.box], 2))]
        tests = [f for f in tests if not f.is_zero]
        rep = None
        for f in tests:
            rep = weak_instance_check(a, f, p, cm=None if rep is None else rep.cm)
            res.observe(f"superlevel_measure_p{p}", rep.measure)
        f = tests[0]
        Tf = t_alpha_apply(a, f)
        for L in levels:
            b = dilate_weight(a, L)
            lhs = t_alpha_apply(b, dilate_step(f, L))
            res.checks += 1
            if lhs != dilate_step(Tf, L):
                res.fail((i, L, "operator identity"))
            cb = cm_norm(b).value
            if cb != rep.cm * Fraction(2) ** (L * a.dim):
                res.fail((i, L, "CM scaling law"))
            if cb != rep.cm:
                res.fail((i, L, "CM not invariant", fmt_rational(rep.cm), fmt_rational(cb)))
    return res


# ----------------------------------------------------------- 12: few, 3-D


def suite_few(seed: int = 0, instances: int = 100, eps=Fraction(1, 2)) -> SuiteResult:
    res = SuiteResult("few-3d", seed)
    for i in range(instances):
        rng = rng_for(seed, i)
        U = incomparable_collection(rng, int(rng.integers(1, 9)), 3, -1, 0, 1)
        V = enlargement_for("few", U)
        fs = f_sets(U, V, 0)
        rep = pipher_sum(fs, eps, U.shadow.measure, 2, 2, Fraction(1, 2), default_window(U, Fraction(1, 2)))
        res.checks += 1
        res.observe("ratio_upper", rep.ratio_upper)
        res.observe("lp_ratio_power_upper", rep.lp_ratio_power_upper)
    return res


# ------------------------------------------------- 13: uniform high-param


def suite_uniform_high(seed: int = 0, instances: int = 100, depth: int = 2, samples: int = 8) -> SuiteResult:
    res = SuiteResult("uniform-high", seed)
    for i in range(instances):
        rng = rng_for(seed, i)
        dim = 3 if i % 2 else 2
        U = uniform_collection(rng, int(rng.integers(1, 6)), dim, -1, 0, 1)
        ue = uniform_embed_construct(U, depth)
        for R in ue.containment_failures():
            res.fail((i, "containment", repr(R)))
        res.checks += len(ue.emb)
        res.observe("V_over_shadow", ue.V.measure / U.shadow.measure)
        for (R, m), gmax in sorted(ue.gamma_max.items(), key=lambda kv: (kv[0][1], kv[0][0].lo)):
            for v in beta_monotonicity_violations(R, m, ue.stages[m]["V"], gmax, samples):
                res.fail((i, "beta increases", m, repr(R), [fmt_rational(x) for x in v]))
    return res


# ------------------------------------------------------ 14: emb solver


def _random_v(rng, R: DyadicRect) -> Region:
    boxes = [R.box]
    for _ in range(int(rng.integers(1, 5))):
        lo = [Fraction(int(rng.integers(-8, 24)), 4) for _ in range(2)]
        hi = [x + Fraction(int(rng.integers(1, 16)), 4) for x in lo]
        boxes.append(Box(tuple(lo), tuple(hi)))
    return Region.from_boxes(boxes, 2)


def suite_emb_solver(seed: int = 0, instances: int = 1000) -> SuiteResult:
    """Solver value versus a scan of every multiple of the breakpoints' common step."""
    res = SuiteResult("emb-solver", seed)
    for i in range(instances):
        rng = rng_for(seed, i)
        R = random_rect(rng, 2, -1, 1, 2)
        V = _random_v(rng, R)
        axes = [0, 1] if i % 3 == 0 else [int(rng.integers(0, 2))]
        got = emb_directional(R, V, axes).value
        bps = breakpoints(R, V, axes)
        step = Fraction(1, lcm(*(b.denominator for b in bps)))
        top = bps[-1] + 1
        lam = lambda mu: [mu if a in axes else Fraction(1) for a in range(2)]
        passing, mu = [], Fraction(1)
        while mu <= top:
            if V.contains_box(dilate(R, lam(mu))):
                passing.append(mu)
            mu += step
        res.checks += 1
        nxt = [b for b in bps if b > got]
        if not V.contains_box(dilate(R, lam(got))):
            res.fail((i, "no containment at reported value"))
        if nxt and V.contains_box(dilate(R, lam(nxt[0]))):
            res.fail((i, "containment at next breakpoint"))
        if max(passing) != got or any(m > got for m in passing):
            res.fail((i, "scan disagrees", fmt_rational(got), fmt_rational(max(passing))))
    return res


# --------------------------------------------------------- BMO projection


def suite_bmo(seed: int = 0, instances: int = 40, mus=(1, 2, 4), eps=Fraction(1, 2), cap: int = 14) -> SuiteResult:
    """Emb-bucket projections of random sparse Haar spectra in the plane."""
    from .haar import HaarSpectrum, bmo_projection_check

    res = SuiteResult("bmo", seed)
    for i in range(instances):
        rng = rng_for(seed, i)
        U = uniform_collection(rng, int(rng.integers(1, 11)), 2, -1, 1, 2)
        coeffs = tuple(sorted((R, Fraction(int(rng.integers(1, 4)) * int(rng.choice([-1, 1])), 2)) for R in set(U)))
        spec = HaarSpectrum(2, coeffs, ())
        V = enlargement_for("classic", U)
        for mu in mus:
            rep = bmo_projection_check(spec, V, lambda R: emb_directional(R, V, [0]).value, mu, eps, cap)
            res.checks += 1
            if rep.cm_restricted > cm_norm(spec.weight(), cap).value:
                res.fail((i, mu, "restriction increased the norm"))
            res.observe("ratio_upper", rep.upper)
    return res


# ------------------------------------------------------------- registry

SUITES = {
    "grids": suite_grids,
    "cover": suite_cover,
    "weak-type": suite_weak_type,
    "small-weak": suite_small_weak,
    "packing": suite_packing,
    "good-bad": suite_good_bad,
    "journe": suite_journe,
    "small-enlargement": suite_small_enlargement,
    "carleson": suite_carleson,
    "john-nirenberg": suite_john_nirenberg,
    "weak-instance": suite_weak_instance,
    "few-3d": suite_few,
    "uniform-high": suite_uniform_high,
    "emb-solver": suite_emb_solver,
    "bmo": suite_bmo,
}

# reduced corpus sizes used by the test suite and by `suite --quick`
QUICK = {
    "grids": dict(scales=range(-3, 4), offsets=range(-16, 17)),
    "cover": dict(scales=range(-3, 4), offsets=range(-16, 17)),
    "weak-type": dict(instances=100),
    "small-weak": dict(instances=40),
    "packing": dict(instances=60, max_n=40),
    "good-bad": dict(instances=40),
    "journe": dict(instances=40, subsets=10),
    "small-enlargement": dict(instances=30),
    "carleson": dict(instances=30),
    "john-nirenberg": dict(instances=40),
    "weak-instance": dict(instances=20),
    "few-3d": dict(instances=40),
    "uniform-high": dict(instances=30),
    "emb-solver": dict(instances=300),
    "bmo": dict(instances=15),
}


@dataclass
class SuiteRun:
    result: SuiteResult
    ledger_checks: list
    missing: list

    @property
    def exit_code(self) -> int:
        if self.missing:
            return 2
        if self.result.violations or any(not c.passed for c in self.ledger_checks):
            return 1
        return 0

    def csv(self) -> str:
        lines = [CSV_HEADER, "suite,seed,kind,key,observed,constant,status"]
        r = self.result
        lines.append(f"{r.name},{r.seed},checks,exact,{r.checks},,{'ok' if r.exact_ok else 'violated'}")
        for c in self.ledger_checks:
            status = "frozen" if c.frozen_now else ("ok" if c.passed else "exceeded")
            lines.append(f"{r.name},{r.seed},metric,{c.key},{fmt_rational(c.observed)},"
                         f"{fmt_rational(c.constant) if c.constant is not None else ''},{status}")
        for m in self.missing:
            lines.append(f"{r.name},{r.seed},metric,{m},,,missing")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        r = self.result
        return {
            "suite": r.name,
            "seed": r.seed,
            "checks": r.checks,
            "violations": [repr(v) for v in r.violations],
            "metrics": {k: fmt_rational(v) for k, v in sorted(r.metrics.items())},
            "ledger": [
                {"key": c.key, "observed": fmt_rational(c.observed),
                 "constant": None if c.constant is None else fmt_rational(c.constant),
                 "passed": c.passed, "frozen_now": c.frozen_now}
                for c in self.ledger_checks
            ],
            "missing": self.missing,
            "exit_code": self.exit_code,
        }


def run_suite(name: str, seed: int = 0, ledger: RegressionLedger | None = None, freeze: bool = False,
              quick: bool = False, **overrides) -> SuiteRun:
    """Run a suite and compare its metrics with the ledger.

    With ``freeze`` a missing or exceeded constant is written (rounded up).
    The caller is responsible for saving the ledger.
    """
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    kwargs = dict(QUICK[name]) if quick else {}
    kwargs.update(overrides)
    t0 = time.perf_counter()
    res = SUITES[name](seed=seed, **kwargs)
    res.seconds = time.perf_counter() - t0
    checks, missing = [], []
    if ledger is not None:
        for metric, value in sorted(res.metrics.items()):
            key = RegressionLedger.key(name, metric)
            try:
                checks.append(ledger.check(key, value, freeze, {"seed": seed, "quick": quick}))
            except LedgerMissing:
                missing.append(key)
    return SuiteRun(res, checks, missing)
