"""Command-line front end.

Exit codes: 0 success, 1 a check or verification failed, 2 usage or
parse error, 3 a resource bound was exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from decimal import Decimal, InvalidOperation
from fractions import Fraction

from . import bcstudy, criteria
from . import measure as ms
from . import verify as vf
from .algebraic import AlgebraicNumber, PolynomialError, frac_str, isolate_real_roots, mahler_measure, parse_polynomial, real_root
from .config import Config, load_config
from .entropy import cond_entropy, pow2, scale_entropy
from .measure import EnumerationBoundExceeded, MeasureError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# argument parsing helpers


def exact_number(text: str) -> Fraction:
    """Exact rational from "3", "1/2", "0.25" or "1e50"."""
    text = text.strip()
    try:
        if "/" in text:
            return Fraction(text)
        return Fraction(Decimal(text))
    except (ValueError, InvalidOperation, ZeroDivisionError) as exc:
        raise UsageError(f"not a number: {text!r}") from exc


def exact_int(text: str) -> int:
    q = exact_number(text)
    if q.denominator != 1:
        raise UsageError(f"not an integer: {text!r}")
    return q.numerator


def parse_lambda(text: str, lo: str | None = None, hi: str | None = None) -> AlgebraicNumber:
    """A rational such as "1/2", or a polynomial whose root in (0, 1) is meant.

    Without a bracket the largest root in (0, 1) is taken.
    """
    try:
        q = exact_number(text)
    except UsageError:
        q = None
    if q is not None:
        return AlgebraicNumber.rational(q)
    P = parse_polynomial(text)
    if lo is not None and hi is not None:
        return real_root(P, exact_number(lo), exact_number(hi))
    roots = [r for r in isolate_real_roots(P, Fraction(0), Fraction(1)) if 0 < float(r) < 1]
    if not roots:
        raise UsageError(f"{text} has no root in (0, 1)")
    return max(roots, key=float)


def parse_sigmas(text: str) -> list:
    """Log-scales from "a:b" inclusive integer ranges and single numbers."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part:
            a, b = (exact_int(x) for x in part.split(":", 1))
            step = 1 if b >= a else -1
            out += list(range(a, b + step, step))
        else:
            out.append(float(exact_number(part)))
    if not out:
        raise UsageError("no scales given")
    return out


def _emit(payload, fmt: str, out, rows=None) -> None:
    if fmt == "csv" and rows is not None:
        w = csv.writer(out, lineterminator="\n")
        for row in rows:
            w.writerow(row)
    else:
        out.write(json.dumps(payload, sort_keys=True, indent=2, default=str))
        out.write("\n")


# ---------------------------------------------------------------------------
# commands


def cmd_mahler(args, config: Config, out) -> int:
    P = parse_polynomial(args.poly, primitive=False)
    enc = mahler_measure(P, bits=args.bits, config=config)
    payload = {
        "poly": P.to_list(),
        "lo": frac_str(enc.lo),
        "hi": frac_str(enc.hi),
        "approx": float(enc.midpoint()),
        "precision_bits": enc.precision_bits,
        "exact": enc.is_exact(),
    }
    rows = [["poly", "lo", "hi", "approx"], [str(P), frac_str(enc.lo), frac_str(enc.hi), repr(float(enc.midpoint()))]]
    _emit(payload, config.output_format, out, rows)
    return EXIT_OK


def _measure_from_args(args, config: Config):
    if args.measure and args.level:
        raise UsageError("give either --measure or --level, not both")
    if args.measure:
        return ms.load(args.measure)
    if args.level:
        parts = args.level.split(",")
        if len(parts) != 3:
            raise UsageError("--level expects lambda,p,l")
        lam = parse_lambda(parts[0], args.root_lo, args.root_hi)
        return ms.level_measure_top(lam, exact_number(parts[1]), exact_int(parts[2]), config)
    raise UsageError("give --measure FILE or --level lambda,p,l")


def cmd_entropy(args, config: Config, out) -> int:
    m = _measure_from_args(args, config)
    sigmas = parse_sigmas(args.scales)
    rows = [["sigma", "entropy", "cond_entropy", "abs_error"]]
    items = []
    for s in sigmas:
        h = scale_entropy(m, pow2(s), config)
        c = cond_entropy(m, pow2(s), pow2(s + 1), config)
        err = max(h.abs_error, c.abs_error)
        rows.append([repr(float(s)), repr(h.value), repr(c.value), repr(err)])
        items.append({"sigma": s, "entropy": h.value, "cond_entropy": c.value, "abs_error": err})
    _emit({"atoms": len(m), "profile": items}, config.output_format, out, rows)
    return EXIT_OK


def cmd_verify(args, config: Config, out) -> int:
    rules = [r.strip() for r in args.rules.split(",") if r.strip()] if args.rules else list(vf.RULES)
    for r in rules:
        vf.get_rule(r)
    reports, summary = vf.run_suite(rules, n_instances=args.n, seed=config.seed, threads=config.threads, jsonl_path=args.jsonl, repro_dir=args.repro_dir)
    per_rule = {}
    for rep in reports:
        st = per_rule.setdefault(rep.rule_id, {"max_margin": None, "min_margin": None})
        if rep.vacuous:
            continue
        st["max_margin"] = rep.margin if st["max_margin"] is None else max(st["max_margin"], rep.margin)
        st["min_margin"] = rep.margin if st["min_margin"] is None else min(st["min_margin"], rep.margin)
    for rule_id, st in summary.per_rule.items():
        st.update(per_rule.get(rule_id, {}))
    rows = [["rule", "total", "passed", "vacuous", "failed", "min_margin", "max_margin"]]
    for rule_id, st in summary.per_rule.items():
        rows.append([rule_id, st["total"], st["passed"], st["vacuous"], st["failed"], repr(st["min_margin"]), repr(st["max_margin"])])
    payload = summary.to_json()
    payload["seed"] = config.seed
    _emit(payload, config.output_format, out, rows)
    return EXIT_FAIL if summary.failed else EXIT_OK


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError("missing " + ", ".join("--" + n.replace("_", "-") for n in missing))


def cmd_check(args, config: Config, out) -> int:
    c = args.criterion
    if c == "rational":
        _need(args, "a", "b", "p")
        rep = criteria.rational_condition(exact_int(args.a), exact_int(args.b), exact_number(args.p), config)
    elif c == "explicit":
        _need(args, "poly", "p")
        lam = parse_lambda(args.poly, args.root_lo, args.root_hi)
        rep = criteria.explicit_condition(lam, exact_number(args.p), config)
    elif c == "nth-root":
        _need(args, "n", "k", "p")
        rep = criteria.nth_root_condition(exact_int(args.n), exact_int(args.k), exact_number(args.p), config)
    elif c == "sparse":
        _need(args, "poly", "n", "p")
        rep = criteria.sparse_poly_family(parse_polynomial(args.poly, primitive=False), exact_int(args.n), exact_number(args.p), config)
    elif c == "mahler-bounds":
        _need(args, "poly")
        res = criteria.mahler_upper_bounds(parse_polynomial(args.poly, primitive=False), config)
        _emit(res.to_json(), "json", out)
        return EXIT_OK if res.holds else EXIT_FAIL
    elif c == "gaussian":
        _need(args, "p")
        v = criteria.gaussian_entropy_gap(exact_number(args.p))
        _emit({"value": v.value, "abs_error": v.abs_error, "positive": v.value - v.abs_error > 0}, "json", out)
        return EXIT_OK
    elif c == "batch":
        _need(args, "csv")
        with open(args.csv) as fh:
            reps = criteria.batch_explicit(fh.read(), config)
        _emit([r.to_json() for r in reps], "json", out)
        return EXIT_OK if all(r.passed for r in reps) else EXIT_FAIL
    else:
        raise UsageError(f"unknown criterion {c!r}")
    payload = rep.to_json()
    rows = [["criterion", "subject", "p", "verdict", "bits"], [rep.criterion, rep.subject, payload["p"], rep.verdict.value, rep.bits]]
    _emit(payload, config.output_format, out, rows)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_study(args, config: Config, out) -> int:
    lam = parse_lambda(args.lam, args.root_lo, args.root_hi)
    p = exact_number(args.p)
    if args.lmax > config.enumeration_bound:
        raise EnumerationBoundExceeded(f"lmax {args.lmax} exceeds the enumeration bound {config.enumeration_bound}")
    if args.decay:
        res = bcstudy.decay_profile(lam, p, args.lmax, args.nmax, config=config)
        rows = [["n", "cond_entropy"]] + [[-s, repr(v)] for s, v in zip(res.profile.grid, res.profile.values)]
        _emit(res.to_json(), config.output_format, out, rows)
        return EXIT_OK
    if args.separation:
        rows = [["l", "atoms", "min_gap", "rate", "log_mahler"]]
        items = []
        for l in range(2, args.lmax + 1):
            rep = bcstudy.separation_check(lam, p, l, config)
            d = rep.details
            rows.append([l, d["atoms"], repr(d["min_gap"][0]), repr(d["rate"]), repr(d["log_mahler"][1])])
            items.append({"l": l, **d, "in_window": rep.passed, "applies": rep.hypothesis_satisfied})
        _emit({"levels": items}, config.output_format, out, rows)
        return EXIT_OK
    est = bcstudy.h_estimate(lam, p, args.lmax, config)
    if config.output_format == "csv":
        out.write(est.to_csv())
        return EXIT_OK
    payload = est.to_json()
    if len(est.levels) >= 3:
        payload["bounds"] = bcstudy.h_bounds_check(est).to_json()
    _emit(payload, "json", out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bcentropy", description="Entropy tools for Bernoulli convolutions.")
    parser.add_argument("--precision", type=int, default=None, help="working precision in bits")
    parser.add_argument("--format", choices=["json", "csv"], default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--enumeration-bound", type=int, default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mahler", help="certified Mahler measure enclosure")
    p.add_argument("--poly", required=True)
    p.add_argument("--bits", type=int, default=None)
    p.set_defaults(func=cmd_mahler)

    p = sub.add_parser("entropy", help="entropy at a list of dyadic scales")
    p.add_argument("--measure", help="measure JSON file")
    p.add_argument("--level", help="lambda,p,l for the level-l Bernoulli measure")
    p.add_argument("--scales", default="-10:-1", help="log2 scales, e.g. -10:-1 or -3,-2.5")
    p.add_argument("--root-lo")
    p.add_argument("--root-hi")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("verify", help="run the inequality suite")
    p.add_argument("--rules", help="comma separated rule ids (default: all)")
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--jsonl")
    p.add_argument("--repro-dir")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("check", help="explicit absolute-continuity criteria")
    p.add_argument("--criterion", required=True, choices=["rational", "explicit", "nth-root", "sparse", "mahler-bounds", "gaussian", "batch"])
    for name in ("a", "b", "p", "n", "k", "poly", "csv"):
        p.add_argument(f"--{name}")
    p.add_argument("--root-lo")
    p.add_argument("--root-hi")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("study", help="finite-level Bernoulli convolution studies")
    p.add_argument("--lambda", dest="lam", required=True)
    p.add_argument("--p", default="1/2")
    p.add_argument("--lmax", type=int, required=True)
    p.add_argument("--nmax", type=int, default=10)
    p.add_argument("--root-lo")
    p.add_argument("--root-hi")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--h", action="store_true", help="entropy per level (default)")
    mode.add_argument("--separation", action="store_true")
    mode.add_argument("--decay", action="store_true")
    p.set_defaults(func=cmd_study)
    return parser


def _glue_negative_values(argv: list) -> list:
    """Turn "--opt -3:-1" into "--opt=-3:-1" so argparse does not see a flag."""
    out = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and re.match(r"^-\d", tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    argv = _glue_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        config = load_config(
            precision_bits=args.precision,
            output_format=args.format,
            seed=args.seed,
            threads=args.threads,
            enumeration_bound=args.enumeration_bound,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    buf = io.StringIO()
    try:
        code = args.func(args, config, buf)
    except (EnumerationBoundExceeded, MemoryError) as exc:
        print(f"resource bound exceeded: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (UsageError, PolynomialError, MeasureError, vf.UnknownRule, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out.write(buf.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())
