"""Command-line front end.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage error,
3 resource budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time

from .errors import (
    ConsistencyError,
    GluingHypothesisError,
    NotNumericalSemigroup,
    PnCurvesError,
    ResourceBudgetExceeded,
)
from .exactalg import is_prime
from .report import Report

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3
SUITES = ("skew", "central", "extension", "hilbert", "cartier", "inertia", "twist")


class UsageError(Exception):
    pass


def _emit(args, payload: dict, lines: list) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=False))
    else:
        for line in lines:
            print(line)


def _prime(value: str) -> int:
    p = int(value)
    if not is_prime(p):
        raise UsageError(f"{p} is not prime")
    return p


def _level(value) -> int:
    n = int(value)
    if n < 0:
        raise UsageError("n must be >= 0")
    return n


# ---------------------------------------------------------------------------
# semigroup / curve / search-max


def cmd_semigroup(args) -> int:
    from .numsemigroup import from_generators, is_symmetric

    try:
        S = from_generators(args.generators)
    except (NotNumericalSemigroup, ValueError) as exc:
        raise UsageError(str(exc)) from None
    rec = {
        "conductor": S.conductor,
        "genus": S.genus,
        "multiplicity": S.multiplicity,
        "min_generators": list(S.minimal_generators()),
        "gaps": S.gaps,
        "symmetric": is_symmetric(S),
    }
    lines = [f"{k:<15} {v}" for k, v in rec.items()]
    _emit(args, rec, lines)
    return EXIT_OK


def cmd_curve(args) -> int:
    from .curvemodel import curve_invariants

    p, n = _prime(args.p), _level(args.n)
    rec = curve_invariants(p, n).to_dict()
    lines = [f"{k:<15} {v}" for k, v in rec.items() if k != "flags"]
    lines += [f"flag            {f}" for f in rec["flags"]]
    _emit(args, rec, lines)
    return EXIT_OK


def cmd_search_max(args) -> int:
    from .curvemodel import search_maximal_semigroup, search_soundness
    from .numsemigroup import gamma_pn, invariant_formulas

    p, n = _prime(args.p), _level(args.n)
    c = invariant_formulas(p, n).c
    bound = args.bound if args.bound is not None else 2 * c
    if bound < 2 * c:
        raise UsageError(f"--bound must be at least 2c = {2 * c}")
    S = search_maximal_semigroup(p, n, bound, max_rank=args.max_rank)
    bad = search_soundness(p, n, S)
    same = S == gamma_pn(p, n)
    rec = {
        "p": p, "n": n, "bound": bound,
        "min_generators": list(S.minimal_generators()),
        "conductor": S.conductor,
        "equals_gamma_pn": same,
        "unsound_gaps": bad,
        "note": "reproduction of a guessed pattern, not a maximality proof",
    }
    lines = [f"{k:<15} {v}" for k, v in rec.items()]
    _emit(args, rec, lines)
    return EXIT_OK if same and not bad else EXIT_FAIL


# ---------------------------------------------------------------------------
# verify


def suite_skew(p: int, n: int, seed: int, samples: int = 40, max_rank: int = 10**6) -> Report:
    from .exactalg import random_element
    from .skewpoly import SkewPoly, is_unit_skew, matmul, matrix_rep, skew_inverse, skew_mul
    from .ugroup import universal_ring

    report = Report("skew")
    rng = random.Random(seed)
    level = max(n, 1)
    ring = universal_ring(p, level, ("l",), max_rank=max_rank)
    cell = {"p": p, "n": level}

    def rand_skew(unit=False):
        deg = rng.randrange(0, 3)
        cs = [random_element(ring, rng, density=0.3) for _ in range(deg + 1)]
        if unit:
            cs[0] = cs[0] - ring.const(cs[0].constant_term()) + ring.const(rng.randrange(1, p))
            for i in range(1, len(cs)):
                cs[i] = cs[i] - ring.const(cs[i].constant_term())
        return SkewPoly(ring, cs)

    with report.timed(cell, "associativity") as box:
        ok = True
        for _ in range(samples):
            a, b, c = rand_skew(), rand_skew(), rand_skew()
            ok &= skew_mul(skew_mul(a, b), c) == skew_mul(a, skew_mul(b, c))
        box["passed"] = ok
        box["detail"] = f"{samples} triples"
    with report.timed(cell, "two-sided inverse") as box:
        ok = True
        for _ in range(samples):
            a = rand_skew(unit=True)
            ok &= is_unit_skew(a)
            skew_inverse(a)  # checks both products internally
        box["passed"] = ok
        box["detail"] = f"{samples} units"
    with report.timed(cell, "matrix_rep homomorphism") as box:
        ok = True
        for _ in range(samples):
            a, b = rand_skew(), rand_skew()
            d = rng.randrange(2, 5)
            ok &= matrix_rep(skew_mul(a, b), d) == matmul(matrix_rep(a, d), matrix_rep(b, d))
        box["passed"] = ok
        box["detail"] = f"{samples} pairs"
    return report


def suite_central(p: int, n: int, max_rank: int) -> Report:
    from .ugroup import commutator_formula_check, verify_central_series

    report = Report("central")
    if n < 1:
        return report
    report.extend(verify_central_series(p, n, max_rank=max_rank))
    for s in range(1, n):
        with report.timed({"p": p, "n": n, "s": s}, "commutator formula") as box:
            box["passed"] = commutator_formula_check(p, n, s, max_rank=max_rank)
    return report


def suite_extension(p: int, n: int) -> Report:
    from .curvemodel import check_extension_ga, check_extension_un
    from .numsemigroup import gamma_pn

    report = Report("extension")
    S = gamma_pn(p, n)
    for name, fn in (("U_n extends", lambda: check_extension_un(p, n, S)),
                     ("G_a extends", lambda: check_extension_ga(p, S))):
        with report.timed({"p": p, "n": n}, name) as box:
            v = fn()
            box["passed"] = v.passed
            box["detail"] = f"generators {list(v.checked)}" if v.passed else f"fails at (d, s) = {v.witness}"
    return report


def suite_hilbert(p: int, n: int) -> Report:
    from .curvemodel import default_hilbert_degree, hilbert_series_check

    report = Report("hilbert")
    N = default_hilbert_degree(p, n)
    with report.timed({"p": p, "n": n, "N": N}, "Hilbert series") as box:
        box["passed"] = hilbert_series_check(p, n, N)
    return report


def suite_cartier(p: int, n: int) -> Report:
    from .curvemodel import cartier_check

    report = Report("cartier")
    if n >= 1:
        with report.timed({"p": p, "n": n}, "Cartier divisor") as box:
            box["passed"] = cartier_check(p, n)
    return report


def suite_inertia(p: int, n: int) -> Report:
    from .curvemodel import inertia_check

    report = Report("inertia")
    if n >= 1:
        with report.timed({"p": p, "n": n}, "inertia ideal") as box:
            box["passed"] = inertia_check(p, n)
    return report


def suite_twist(p: int) -> Report:
    from . import twistforms as tw

    report = Report("twist")
    checks = [
        ("Russell level 1", lambda: tw.verify_russell_level1(p)),
        ("level 1 control breaks", lambda: tw.russell_level1_control(p)),
        ("Russell level 2", lambda: tw.verify_russell_level2(p)),
        ("level 2 control breaks", lambda: tw.russell_level2_control(p)),
        ("U_2 torsor action", lambda: tw.verify_torsor_action(p)),
        ("torsor control breaks", lambda: tw.torsor_action_control(p)),
    ]
    for name, fn in checks:
        with report.timed({"p": p}, name) as box:
            box["passed"] = fn()
    return report


def run_suite(name: str, p: int, n: int, seed: int, max_rank: int) -> Report:
    if name == "skew":
        return suite_skew(p, n, seed, max_rank=max_rank)
    if name == "central":
        return suite_central(p, n, max_rank)
    if name == "extension":
        return suite_extension(p, n)
    if name == "hilbert":
        return suite_hilbert(p, n)
    if name == "cartier":
        return suite_cartier(p, n)
    if name == "inertia":
        return suite_inertia(p, n)
    if name == "twist":
        return suite_twist(p)
    raise UsageError(f"unknown suite {name!r}")


def cmd_verify(args) -> int:
    p = _prime(args.p)
    suite = args.suite
    if suite != "all" and suite not in SUITES:
        raise UsageError(f"unknown suite {suite!r}; choose from all, {', '.join(SUITES)}")
    if args.n is None and suite != "twist":
        raise UsageError("n is required for this suite")
    n = _level(args.n) if args.n is not None else 0
    names = SUITES if suite == "all" else (suite,)
    total = Report(suite)
    t0 = time.perf_counter()
    for name in names:
        total.extend(run_suite(name, p, n, args.seed, args.max_rank))
    payload = total.to_dict()
    payload["elapsed"] = round(time.perf_counter() - t0, 6)
    _emit(args, payload, total.lines())
    return EXIT_OK if total.passed else EXIT_FAIL


# ---------------------------------------------------------------------------
# skew / twist


def _parse_ring(p: int, spec: str):
    from .exactalg import monomial_ring

    degs = []
    for item in filter(None, (s.strip() for s in spec.split(","))):
        name, _, d = item.partition(":")
        if not d:
            raise UsageError(f"ring variable {item!r} needs the form name:exponent")
        degs.append((name.strip(), int(d)))
    return monomial_ring(p, degs)


def cmd_skew(args) -> int:
    from .skewpoly import is_nilpotent_skew, is_unit_skew, matrix_rep, parse_skew, skew_inverse, skew_mul

    p = _prime(args.p)
    ring = _parse_ring(p, args.ring)
    try:
        a = parse_skew(args.expr, ring)
        b = parse_skew(args.times, ring) if args.times else None
    except (PnCurvesError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    rec = {"input": str(a), "additive": a.additive_str(),
           "unit": is_unit_skew(a), "nilpotent": is_nilpotent_skew(a)}
    if b is not None:
        rec["product"] = str(skew_mul(a, b))
    if args.inverse:
        rec["inverse"] = str(skew_inverse(a)) if rec["unit"] else None
    if args.matrix:
        rec["matrix"] = [[str(x) for x in row] for row in matrix_rep(a, args.matrix)]
    lines = []
    for k, v in rec.items():
        if k == "matrix":
            lines.append("matrix")
            lines += ["  [" + ", ".join(row) + "]" for row in v]
        else:
            lines.append(f"{k:<10} {v}")
    _emit(args, rec, lines)
    return EXIT_OK


def cmd_twist(args) -> int:
    from .twistforms import additive_gcd, dense_str, is_ga_twist, russell_form

    p = _prime(args.p)
    if args.level not in (1, 2):
        raise UsageError("level must be 1 or 2")
    f = russell_form(p, args.level)
    rec = {
        "p": p, "level": args.level,
        "Phi": f.phi.to_str("u"), "Psi": f.psi.to_str("v"),
        "gcd": dense_str(additive_gcd(f.phi, f.psi), f.base),
        "is_ga_twist": is_ga_twist(f.phi, f.psi),
    }
    _emit(args, rec, [f"{k:<12} {v}" for k, v in rec.items()])
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="machine-readable output")
    common.add_argument("--max-rank", type=int, default=argparse.SUPPRESS,
                        help="budget for universal ring ranks (default 10^6)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for sampled checks")

    parser = argparse.ArgumentParser(prog="pncurves", description="Exact checks for the curves X_{p,n}.")
    parser.add_argument("--json", action="store_true", default=False)
    parser.add_argument("--max-rank", type=int, default=10**6)
    parser.add_argument("--seed", type=int, default=20240601)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("semigroup", parents=[common], help="invariants of a numerical semigroup")
    sp.add_argument("generators", type=int, nargs="+")
    sp.set_defaults(func=cmd_semigroup)

    sp = sub.add_parser("curve", parents=[common], help="invariants of X_{p,n}")
    sp.add_argument("p")
    sp.add_argument("n")
    sp.set_defaults(func=cmd_curve)

    sp = sub.add_parser("verify", parents=[common], help="run a verification suite")
    sp.add_argument("p")
    sp.add_argument("n", nargs="?")
    sp.add_argument("--suite", default="all", help=f"all, {', '.join(SUITES)}")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("search-max", parents=[common], help="removal fixpoint for the largest extendable semigroup")
    sp.add_argument("p")
    sp.add_argument("n")
    sp.add_argument("--bound", type=int, default=None)
    sp.set_defaults(func=cmd_search_max)

    sp = sub.add_parser("skew", parents=[common], help="skew polynomial arithmetic")
    sp.add_argument("p")
    sp.add_argument("expr", help="e.g. '1 + l*F + m*F^2'")
    sp.add_argument("--ring", default="l:4", help="nilpotent variables, e.g. 'l:4,m:2'")
    sp.add_argument("--times", default=None, help="right factor for a product")
    sp.add_argument("--inverse", action="store_true")
    sp.add_argument("--matrix", type=int, default=0, help="print the truncated matrix of this size")
    sp.set_defaults(func=cmd_skew)

    sp = sub.add_parser("twist", parents=[common], help="Russell forms")
    tsub = sp.add_subparsers(dest="twist_command", required=True)
    tf = tsub.add_parser("form", parents=[common], help="print Phi, Psi and their gcd")
    tf.add_argument("p")
    tf.add_argument("level", type=int)
    tf.set_defaults(func=cmd_twist)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, ValueError, GluingHypothesisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ResourceBudgetExceeded, MemoryError) as exc:
        print(f"resource budget exceeded: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ConsistencyError as exc:
        print(f"consistency failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
