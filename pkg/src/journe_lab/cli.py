"""Command line harness: generators, verifiers, norms and seeded suites.

Exit codes: 0 pass, 1 property violation, 2 usage or cap error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import sys
from fractions import Fraction

import numpy as np

from . import serialize as ser
from .carleson import CarlesonWeight, cm_ell_norm, cm_norm, cm_rec_norm
from .corpus import GenConfig, InfeasibleConfig, gen_collection, rng_for
from .embedding import EmbSpec, EnlargementSpec, emb, enlarged_set
from .exact import fmt_rational, parse_rational
from .geometry import DyadicInterval, GeometryError, RectCollection
from .grids import CapExceeded, DyadicGrid, GridFamily, NoWitness, shifted_cover, shifted_subgrids, verify_grid_property
from .haar import bmo_norms
from .highparam import uniform_embed_construct
from .journe import (
    enlargement_for,
    f_sets,
    good_bad_decompose,
    journe_sum,
    pipher_sum,
    replay,
)
from .ledger import RegressionLedger, default_path
from .maximal import MaximalQuery, superlevel
from .suites import CSV_HEADER, SUITES, run_suite

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2
VERIFY_VARIANTS = ("classic", "uniform", "redux", "pipher-rect", "few", "uniform-high")


class UsageError(Exception):
    pass


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _range(spec: str) -> range:
    try:
        a, b = spec.split("..")
        return range(int(a), int(b) + 1)
    except ValueError as exc:
        raise UsageError(f"expected kmin..kmax, got {spec!r}") from exc


def _ledger(args) -> RegressionLedger:
    return RegressionLedger.load(args.ledger or default_path())


# ------------------------------------------------------------- commands


def cmd_gen(args) -> int:
    cfg = GenConfig(args.mode, args.n, args.dim, args.kmin, args.kmax, args.extent, args.seed, args.index)
    obj = gen_collection(cfg)
    _emit(args, ser.dumps(obj.to_json() if isinstance(obj, CarlesonWeight) else ser.collection_to_json(obj)))
    return EXIT_OK


def _verify_rows(U: RectCollection, args, ledger: RegressionLedger):
    eps = parse_rational(args.epsilon)
    variant = args.variant
    rng = rng_for(args.seed, 0)
    picks = [np.ones(len(U), dtype=bool)] + [rng.random(len(U)) < 0.5 for _ in range(max(args.subsets, 1) - 1)]
    rows, exact_fail = [], False
    V = None
    if variant in ("classic", "uniform", "redux", "pipher-rect", "few"):
        V = enlargement_for(variant, U)
    ue = uniform_embed_construct(U, args.depth) if variant == "uniform-high" else None
    if ue is not None and ue.containment_failures():
        exact_fail = True
    cache: dict = {}
    key = {"few": "few-3d/ratio_upper", "uniform-high": "uniform-high/V_over_shadow"}.get(
        variant, f"journe/ratio_upper:{variant}")
    const = ledger.constant(key)
    for mask in picks:
        Up = RectCollection([r for r, keep in zip(U, mask) if keep], U.dim)
        if not len(Up):
            continue
        shadow = Up.shadow.measure
        if variant == "few":
            rep = pipher_sum(f_sets(Up, V, 0), eps, shadow)
            lhs, ratio = rep.sum_upper, rep.ratio_upper
        elif variant == "uniform-high":
            lhs, ratio = ue.V.measure, ue.V.measure / U.shadow.measure
        else:
            rep = journe_sum(Up, V, variant, eps, cache)
            lhs, ratio = rep.lhs_upper, rep.ratio_upper
        ok = not exact_fail and (const is None or ratio <= const)
        rows.append([args.seed, variant, len(Up), fmt_rational(eps), fmt_rational(lhs), fmt_rational(shadow),
                     fmt_rational(ratio), "true" if ok else "false"])
    return rows


def cmd_verify(args) -> int:
    U = ser.collection_from_json(ser.load_file(args.input))
    rows = _verify_rows(U, args, _ledger(args))
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["seed", "variant", "n_rects", "epsilon", "lhs_upper", "shadow", "ratio_upper", "pass"])
    w.writerows(rows)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(buf.getvalue())
    else:
        _emit(args, buf.getvalue())
    return EXIT_OK if all(r[-1] == "true" for r in rows) else EXIT_VIOLATION


def cmd_decompose(args) -> int:
    U = ser.collection_from_json(ser.load_file(args.input))
    theta = parse_rational(args.theta)
    res = good_bad_decompose(U, theta)
    trace = {"theta": fmt_rational(theta), "input_sha256": _digest(U), "trace": res.trace}
    if args.trace:
        ser.save_file(args.trace, trace)
    _emit(args, ser.dumps(_result_json(res)))
    return EXIT_OK


def _digest(U: RectCollection) -> str:
    return hashlib.sha256(ser.dumps(ser.collection_to_json(U)).encode()).hexdigest()


def _result_json(res) -> dict:
    return {"good": ser.collection_to_json(res.good), "bad": [ser.collection_to_json(b) for b in res.bad]}


def cmd_replay(args) -> int:
    U = ser.collection_from_json(ser.load_file(args.input))
    rec = ser.load_file(args.trace)
    if rec.get("input_sha256") not in (None, _digest(U)):
        raise UsageError("trace was recorded for a different input")
    try:
        res = replay(U, rec["trace"])
    except (ValueError, IndexError, KeyError) as exc:
        raise UsageError(f"trace/input mismatch: {exc}") from exc
    _emit(args, ser.dumps(_result_json(res)))
    return EXIT_OK


def cmd_cm(args) -> int:
    alpha = CarlesonWeight.from_json(ser.load_file(args.alpha))
    if args.mode == "rec":
        rep = cm_rec_norm(alpha)
    elif args.mode.startswith("ell:"):
        rep = cm_ell_norm(alpha, int(args.mode[4:]), args.cap)
    else:
        rep = cm_norm(alpha, args.cap, args.mode)
    out = {"mode": rep.mode, "value": fmt_rational(rep.value),
           "witness": [ser.rect_to_json(r) for r in rep.witness]}
    _emit(args, ser.dumps(out))
    return EXIT_OK


def cmd_bmo(args) -> int:
    b = ser.step_from_json(ser.load_file(args.input))
    rep = bmo_norms(b, args.cap, args.extra)
    out = {"bmo_sq": fmt_rational(rep.bmo_sq.value), "bmo_rec_sq": fmt_rational(rep.rec_sq.value),
           "ratio": fmt_rational(rep.ratio),
           "witness": [ser.rect_to_json(r) for r in rep.bmo_sq.witness]}
    _emit(args, ser.dumps(out))
    return EXIT_OK


def cmd_grids(args) -> int:
    if args.action == "check":
        grids = [DyadicGrid()] if args.depth == 0 else shifted_subgrids(args.depth)
        offsets = range(-args.offsets, args.offsets + 1)
        lines = []
        for g in grids:
            for v in verify_grid_property(g, _range(args.scales), offsets):
                lines.append(f"{g.label()}\t{v.kind}\t{v.first}\t{v.second}")
        _emit(args, "".join(x + "\n" for x in lines))
        return EXIT_VIOLATION if lines else EXIT_OK
    I = DyadicInterval(args.k, args.j)
    try:
        left, right = shifted_cover(I, args.depth)
    except NoWitness as exc:
        _emit(args, f"no witness: {exc}\n")
        return EXIT_VIOLATION
    ok = all(w.reconstruct() == w.interval for w in (left, right))
    out = [{"grid": w.grid.label(), "k": w.k, "j": w.j, "interval": [fmt_rational(x) for x in w.interval]}
           for w in (left, right)]
    _emit(args, ser.dumps(out))
    return EXIT_OK if ok else EXIT_VIOLATION


def _family(text: str, dim: int) -> GridFamily:
    if text == "dyadic":
        return GridFamily.dyadic(dim)
    kind, _, arg = text.partition(":")
    if kind == "shifted" and arg:
        return GridFamily.shifted_union(int(arg), dim)
    if kind == "lattice" and arg:
        return GridFamily.lattice(parse_rational(arg), dim)
    raise UsageError(f"unknown family {text!r}")


def cmd_maximal(args) -> int:
    obj = ser.load_file(args.input)
    w = ser.step_from_json(obj) if "pieces" in obj else ser.region_from_json(obj)
    q = MaximalQuery(_family(args.family, w.dim), w, parse_rational(args.lam))
    _emit(args, ser.dumps(ser.region_to_json(superlevel(q, cap=args.cap * 250_000))))
    return EXIT_OK


def cmd_embed(args) -> int:
    U = ser.collection_from_json(ser.load_file(args.input))
    fam, lam, iters = args.enl.split(",")
    V = enlarged_set(U, EnlargementSpec(_family(fam, U.dim), parse_rational(lam), int(iters)))
    if args.variant == "uniform":
        spec = EmbSpec("uniform")
    elif args.variant == "pair":
        spec = EmbSpec("pair", (0, 1))
    elif args.variant.startswith("dir:"):
        spec = EmbSpec("directional", tuple(int(a) for a in args.variant[4:].split("+")))
    else:
        raise UsageError(f"unknown variant {args.variant!r}")
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rect_id", "emb", "mu"])
    for i, R in enumerate(U):
        r = emb(R, spec, V)
        w.writerow([i, fmt_rational(r.value), " ".join(fmt_rational(m) for m in r.mu)])
    _emit(args, buf.getvalue())
    return EXIT_OK


def cmd_ledger(args) -> int:
    led = _ledger(args)
    if args.action == "show":
        _emit(args, ser.dumps({"path": led.path, "constants": led.entries}))
        return EXIT_OK
    # set: explicit manual override, recorded as such
    led.entries[args.key] = {"value": fmt_rational(parse_rational(args.value)), "manual": True}
    led.save()
    return EXIT_OK


def cmd_suite(args) -> int:
    led = _ledger(args)
    run = run_suite(args.name, args.seed, led, args.freeze, args.quick)
    if args.freeze and any(c.frozen_now for c in run.ledger_checks):
        led.save()
    if args.json:
        ser.save_file(args.json, run.to_json())
    _emit(args, run.csv())
    for v in run.result.violations[:20]:
        print(f"violation: {v!r}", file=sys.stderr)
    if run.missing:
        print("ledger constants missing; run once with --freeze", file=sys.stderr)
    return run.exit_code


# --------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    def global_flags(suppress: bool) -> argparse.ArgumentParser:
        # subcommands accept the global flags too; SUPPRESS keeps them from
        # overwriting values given before the subcommand name
        kw = {"default": argparse.SUPPRESS} if suppress else {}
        g = argparse.ArgumentParser(add_help=False)
        g.add_argument("--seed", type=int, **(kw or {"default": 0}))
        g.add_argument("--out", help="output file (default stdout)", **(kw or {"default": None}))
        g.add_argument("--freeze", action="store_true", help="write missing or exceeded ledger constants", **kw)
        g.add_argument("--cap", type=int, help="exact-mode size cap", **(kw or {"default": 20}))
        g.add_argument("--ledger", help="ledger path (default: packaged ledger)", **(kw or {"default": None}))
        return g

    common = global_flags(True)
    p = argparse.ArgumentParser(prog="journe-lab", parents=[global_flags(False)], description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate a seeded collection or weight")
    g.add_argument("--mode", default="uniform", choices=["uniform", "incomparable", "staircase", "carleson"])
    g.add_argument("--n", type=int, default=8)
    g.add_argument("--dim", type=int, default=2)
    g.add_argument("--kmin", type=int, default=0)
    g.add_argument("--kmax", type=int, default=3)
    g.add_argument("--extent", type=int, default=4)
    g.add_argument("--index", type=int, default=0)
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("verify", parents=[common], help="Journe-type sums on a collection")
    v.add_argument("--variant", required=True, choices=VERIFY_VARIANTS)
    v.add_argument("--epsilon", default="1/2")
    v.add_argument("--input", required=True)
    v.add_argument("--subsets", type=int, default=1)
    v.add_argument("--depth", type=int, default=2, help="shifted-grid depth for uniform-high")
    v.add_argument("--report", default=None)
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("decompose", parents=[common], help="good/bad decomposition with trace")
    d.add_argument("--theta", default="8/9")
    d.add_argument("--input", required=True)
    d.add_argument("--trace", default=None)
    d.set_defaults(func=cmd_decompose)

    r = sub.add_parser("replay", parents=[common], help="replay a decomposition trace")
    r.add_argument("--input", required=True)
    r.add_argument("--trace", required=True)
    r.set_defaults(func=cmd_replay)

    c = sub.add_parser("cm", parents=[common], help="Carleson measure norms")
    c.add_argument("--alpha", required=True)
    c.add_argument("--mode", default="exact", help="exact | greedy | heuristic | rec | ell:k")
    c.set_defaults(func=cmd_cm)

    b = sub.add_parser("bmo", parents=[common], help="product BMO norms of a step function")
    b.add_argument("--input", required=True)
    b.add_argument("--extra", type=int, default=0, help="extra coarse scales in the Haar window")
    b.set_defaults(func=cmd_bmo)

    gr = sub.add_parser("grids", parents=[common], help="grid property and shifted covers")
    gr.add_argument("action", choices=["check", "cover"])
    gr.add_argument("--depth", type=int, default=1, help="0 checks the standard dyadic grid")
    gr.add_argument("--scales", default="-6..6")
    gr.add_argument("--offsets", type=int, default=64)
    gr.add_argument("--k", type=int, default=0)
    gr.add_argument("--j", type=int, default=0)
    gr.set_defaults(func=cmd_grids)

    m = sub.add_parser("maximal", parents=[common], help="maximal-operator superlevel sets")
    m.add_argument("action", choices=["superlevel"])
    m.add_argument("--family", default="dyadic", help="dyadic | shifted:d | lattice:cell")
    m.add_argument("--lambda", dest="lam", required=True)
    m.add_argument("--input", required=True)
    m.set_defaults(func=cmd_maximal)

    e = sub.add_parser("embed", parents=[common], help="embeddedness report")
    e.add_argument("action", choices=["report"])
    e.add_argument("--variant", default="uniform", help="uniform | dir:j[+k] | pair")
    e.add_argument("--enl", default="dyadic,1/2,1", help="family,lambda,iterations")
    e.add_argument("--input", required=True)
    e.set_defaults(func=cmd_embed)

    lg = sub.add_parser("ledger", parents=[common], help="inspect or set regression constants")
    lg.add_argument("action", choices=["show", "set"])
    lg.add_argument("--key")
    lg.add_argument("--value")
    lg.set_defaults(func=cmd_ledger)

    s = sub.add_parser("suite", parents=[common], help="run a seeded verification suite")
    s.add_argument("name", choices=list(SUITES))
    s.add_argument("--quick", action="store_true", help="reduced corpus")
    s.add_argument("--json", default=None, help="also write a JSON report")
    s.set_defaults(func=cmd_suite)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.command == "ledger" and args.action == "set" and (args.key is None or args.value is None):
        print("ledger set needs --key and --value", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, InfeasibleConfig, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GeometryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
