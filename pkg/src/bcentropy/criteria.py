"""Certified checks of explicit absolute-continuity conditions.

Every threshold is evaluated with outward-rounded interval arithmetic and
compared against an interval for the quantity it bounds.  A verdict is
PASS or FAIL only when the two intervals are disjoint; otherwise the
precision is doubled up to ``max_bits`` and UNKNOWN is returned if they
still overlap.  Logarithms are base 2 unless written ``ln``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import gcd

import numpy as np
from mpmath.ctx_iv import MPIntervalContext
from scipy import integrate, special

from .algebraic import (
    AlgebraicNumber,
    IntPolynomial,
    MahlerEnclosure,
    Pm1Status,
    as_polynomial,
    frac_str,
    isolate_real_roots,
    mahler_measure,
    parse_polynomial,
    pm1_root_search,
    real_root,
)
from .config import DEFAULT, Config
from .entropy import EntropyValue

SMALL = Fraction(1, 10**37)
P_RANGE = (Fraction(1, 4), Fraction(3, 4))
MAX_BITS = 4096


class Verdict(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    UNKNOWN = "UNKNOWN"


# ---------------------------------------------------------------------------
# interval helpers


def _ctx(bits: int) -> MPIntervalContext:
    ctx = MPIntervalContext()
    ctx.prec = bits
    return ctx


def _iv(ctx, q):
    q = Fraction(q)
    if q.denominator == 1:
        return ctx.mpf(q.numerator)
    return ctx.mpf(q.numerator) / ctx.mpf(q.denominator)


def _hull(ctx, lo, hi):
    """Interval containing the rationals lo <= hi."""
    return ctx.mpf([_iv(ctx, lo).a, _iv(ctx, hi).b])


def _mpf_to_fraction(raw) -> Fraction:
    sign, man, exp, _ = raw
    if not man and exp:
        raise ArithmeticError("non-finite interval endpoint")
    v = Fraction(int(man)) * (Fraction(2) ** int(exp))
    return -v if sign else v


def _ends(x) -> tuple:
    a, b = x._mpi_
    return _mpf_to_fraction(a), _mpf_to_fraction(b)


def _is_pow2(q: Fraction) -> int | None:
    """Exponent e with q == 2^e, else None."""
    n, d = q.numerator, q.denominator
    if n <= 0:
        return None
    if d == 1 and n & (n - 1) == 0:
        return n.bit_length() - 1
    if n == 1 and d & (d - 1) == 0:
        return -(d.bit_length() - 1)
    return None


def _log2(ctx, x):
    """log2 of an interval; exact when x is a degenerate power of two."""
    lo, hi = _ends(x)
    if lo == hi:
        e = _is_pow2(lo)
        if e is not None:
            return ctx.mpf(e)
    return ctx.log(x) / ctx.log(2)


def _enclosure(x) -> tuple:
    return tuple(frac_str(v) for v in _ends(x))


def _decide(build, bits: int, max_bits: int = MAX_BITS):
    """Evaluate build(ctx) -> (small, large) until small < large is settled.

    Returns (verdict, small_iv, large_iv, bits_used) with PASS meaning the
    strict inequality small < large holds.
    """
    while True:
        ctx = _ctx(bits)
        small, large = build(ctx)
        s_lo, s_hi = _ends(small)
        l_lo, l_hi = _ends(large)
        if s_hi < l_lo:
            return Verdict.PASS, small, large, bits
        if s_lo >= l_hi:
            return Verdict.FAIL, small, large, bits
        if bits >= max_bits:
            return Verdict.UNKNOWN, small, large, bits
        bits *= 2


def _explicit_threshold(ctx, M):
    """10^-37 / (log(M + 1) (log log(M + 2))^3)."""
    one, two = ctx.mpf(1), ctx.mpf(2)
    return _iv(ctx, SMALL) / (_log2(ctx, M + one) * _log2(ctx, _log2(ctx, M + two)) ** 3)


# ---------------------------------------------------------------------------
# reports


@dataclass
class CriterionReport:
    criterion: str
    subject: str
    p: Fraction | None
    verdict: Verdict
    mahler: tuple | None = None
    threshold: tuple | None = None
    gap: tuple | None = None
    bits: int = 0
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS

    def to_json(self) -> dict:
        return {
            "criterion": self.criterion,
            "subject": self.subject,
            "p": None if self.p is None else frac_str(self.p),
            "verdict": self.verdict.value,
            "mahler": self.mahler,
            "threshold": self.threshold,
            "gap": self.gap,
            "bits": self.bits,
            "notes": self.notes,
        }


def _p_ok(p) -> tuple:
    p = Fraction(p)
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    return p, P_RANGE[0] <= p <= P_RANGE[1]


def _combine(verdict: Verdict, applicable: bool | None) -> Verdict:
    """Inequality verdict, downgraded when the side conditions fail or are open."""
    if verdict is not Verdict.PASS:
        return verdict
    if applicable is None:
        return Verdict.UNKNOWN
    return Verdict.PASS if applicable else Verdict.FAIL


def _pm1_degree(config: Config) -> int:
    # two halves of 3^h sign vectors each must fit in the memory budget
    h = int(math.log(config.pm1_memory_budget, 3) + 1e-9)
    return max(1, min(config.pm1_degree_bound, 2 * h))


def _is_non_unit(P: IntPolynomial) -> bool:
    return abs(P.leading) != 1 or abs(P.coeffs[0]) != 1


def _pm1_applicability(lam: AlgebraicNumber, config: Config) -> tuple:
    """(applicable, note); applicable is None when only a bounded search ran."""
    P = lam.minpoly
    if _is_non_unit(P):
        return True, {"pm1": "not a unit, so no {-1,0,1} polynomial vanishes at lam"}
    res = pm1_root_search(lam, _pm1_degree(config), config)
    note = {"pm1": res.to_json()}
    if res.status is Pm1Status.FOUND:
        return False, note
    if res.status is Pm1Status.BOUND_EXCEEDED:
        return None, note
    if res.unconditional:
        return True, note
    note["pm1_scope"] = f"verified up to degree {res.degree_bound}"
    return None, note


# ---------------------------------------------------------------------------
# criteria


def _in_unit_interval(lam: AlgebraicNumber) -> bool:
    q = lam.exact
    if q is not None:
        return 0 < q < 1
    # an irrational root is never 0 or 1, so refinement terminates
    bits = 64
    while True:
        lo, hi = lam.refine(bits)
        if lo > 0 and hi < 1:
            return True
        if hi < 0 or lo > 1:
            return False
        bits *= 2


def explicit_condition(lam: AlgebraicNumber, p, config: Config = DEFAULT, max_bits: int = MAX_BITS) -> CriterionReport:
    """1 - lam < 10^-37 / (log(M + 1) (log log(M + 2))^3), with side conditions.

    The {-1,0,1} hypothesis is settled unconditionally for non-units and
    rationals; otherwise only a bounded search is possible and a passing
    inequality is reported UNKNOWN with the searched degree.
    """
    if not _in_unit_interval(lam):
        raise ValueError("lam must lie in (0, 1)")
    p, p_in = _p_ok(p)
    bits = config.precision_bits
    enc = mahler_measure(lam.minpoly, bits=bits, config=config)
    q = lam.exact

    def build(ctx):
        nonlocal enc
        if ctx.prec > enc.precision_bits:
            enc = mahler_measure(lam.minpoly, bits=ctx.prec, config=config)
        M = _hull(ctx, enc.lo, enc.hi)
        thr = _explicit_threshold(ctx, M)
        if q is not None:
            gap = _iv(ctx, 1 - q)
        else:
            lo, hi = lam.refine(ctx.prec)
            gap = _hull(ctx, 1 - hi, 1 - lo)
        return gap, thr

    verdict, gap, thr, used = _decide(build, bits, max_bits)
    notes = {"p_in_range": p_in}
    applicable = p_in
    if verdict is Verdict.PASS and p_in:
        applicable, pm1_note = _pm1_applicability(lam, config)
        notes.update(pm1_note)
    return CriterionReport(
        "explicit",
        f"root of {lam.minpoly} near {float(lam):.17g}",
        p,
        _combine(verdict, applicable),
        (frac_str(enc.lo), frac_str(enc.hi)),
        _enclosure(thr),
        _enclosure(gap),
        used,
        notes,
    )


def _rational_holds(a: int, b: int, bits: int, max_bits: int = MAX_BITS):
    def build(ctx):
        B = ctx.mpf(b)
        rhs = _iv(ctx, SMALL) * B / (_log2(ctx, B + 1) * _log2(ctx, _log2(ctx, B + 2)) ** 3)
        return ctx.mpf(a), rhs

    return _decide(build, bits, max_bits)


def rational_condition(a: int, b: int, p, config: Config = DEFAULT) -> CriterionReport:
    """lam = 1 - a/b: a < 10^-37 b / (log(b + 1) (log log(b + 2))^3), using M <= b."""
    a, b = int(a), int(b)
    if not 0 < a < b:
        raise ValueError("need 0 < a < b")
    if gcd(a, b) != 1:
        raise ValueError("a and b must be coprime")
    p, p_in = _p_ok(p)
    verdict, lhs, rhs, used = _rational_holds(a, b, config.precision_bits)
    notes = {
        "p_in_range": p_in,
        # rational roots of {-1,0,1} polynomials are 0 or +-1
        "pm1": "rational in (0, 1), so no {-1,0,1} polynomial vanishes at lam",
    }
    return CriterionReport(
        "rational",
        f"1 - {a}/{b}",
        p,
        _combine(verdict, p_in),
        (str(b), str(b)),
        _enclosure(rhs),
        (str(a), str(a)),
        used,
        notes,
    )


def rational_boundary(a: int = 1, lo: int = 2, hi: int = 10**60, config: Config = DEFAULT) -> int:
    """Smallest b in (lo, hi] for which the rational inequality holds.

    Requires it to fail at lo and hold at hi; the left side of the
    inequality is fixed and the right side increases with b.
    """
    bits = config.precision_bits

    def holds(b):
        v = _rational_holds(a, b, bits)[0]
        if v is Verdict.UNKNOWN:
            raise ArithmeticError(f"undecided at b = {b}")
        return v is Verdict.PASS

    if holds(lo) or not holds(hi):
        raise ValueError("bracket must fail at lo and hold at hi")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if holds(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _nth_root_threshold(ctx, n: int):
    """10^37 ln(n) log(n + 1) (log log(n + 2))^3."""
    N = ctx.mpf(n)
    return ctx.mpf(10) ** 37 * ctx.log(N) * _log2(ctx, N + 1) * _log2(ctx, _log2(ctx, N + 2)) ** 3


def nth_root_threshold(n: int, config: Config = DEFAULT, max_bits: int = MAX_BITS) -> int:
    """Least integer k with k > 10^37 ln(n) log(n + 1) (log log(n + 2))^3."""
    if n < 2:
        raise ValueError("n must be at least 2")
    bits = config.precision_bits
    while True:
        lo, hi = _ends(_nth_root_threshold(_ctx(bits), n))
        if math.floor(lo) == math.floor(hi):
            return math.floor(lo) + 1
        if bits >= max_bits:
            raise ArithmeticError("threshold straddles an integer at maximum precision")
        bits *= 2


def nth_root_condition(n: int, k: int, p, config: Config = DEFAULT) -> CriterionReport:
    """lam = n^(-1/k): k > 10^37 ln(n) log(n + 1) (log log(n + 2))^3.

    This is the linearised form of the explicit condition, using
    n^(-1/k) > 1 - ln(n)/k and M_lam <= n.
    """
    n, k = int(n), int(k)
    if n < 2 or k < 1:
        raise ValueError("need n >= 2 and k >= 1")
    p, p_in = _p_ok(p)

    def build(ctx):
        return _nth_root_threshold(ctx, n), ctx.mpf(k)

    verdict, thr, _, used = _decide(build, config.precision_bits)
    notes = {
        "p_in_range": p_in,
        "mahler_note": f"M(n^(-1/k)) <= M(1/n) = {n}",
        "pm1": "n^(-1/k) is not a unit, since its k-th power 1/n is not an algebraic integer unit",
        "k_star": nth_root_threshold(n, config),
    }
    return CriterionReport(
        "nth-root",
        f"{n}^(-1/{k})",
        p,
        _combine(verdict, p_in),
        ("1", str(n)),
        _enclosure(thr),
        (str(k), str(k)),
        used,
        notes,
    )


@dataclass
class MahlerBounds:
    poly: IntPolynomial
    mahler: MahlerEnclosure
    l1: int
    l2_squared: int
    linf: int
    degree: int
    checks: dict

    @property
    def holds(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> dict:
        return {
            "poly": self.poly.to_list(),
            "mahler": self.mahler.to_json(),
            "l1": self.l1,
            "l2": math.sqrt(self.l2_squared),
            "l2_squared": self.l2_squared,
            "linf": self.linf,
            "sqrt_d1_linf": math.sqrt(self.degree + 1) * self.linf,
            "checks": self.checks,
            "holds": self.holds,
        }


def mahler_upper_bounds(P, config: Config = DEFAULT) -> MahlerBounds:
    """M <= l2 <= min(l1, sqrt(d + 1) linf), compared as exact squares.

    The first link is only refuted when the lower end of the Mahler
    enclosure provably exceeds l2.
    """
    P = as_polynomial(P, primitive=False)
    if P.is_zero():
        raise ValueError("P must be nonzero")
    enc = mahler_measure(P, config=config)
    l1, l2sq, linf, d = P.l1(), P.l2_squared(), P.linf(), P.degree
    checks = {
        "mahler_le_l2": enc.lo**2 <= l2sq,
        "l2_le_l1": l2sq <= l1 * l1,
        "l2_le_sqrt_d1_linf": l2sq <= (d + 1) * linf * linf,
    }
    return MahlerBounds(P, enc, l1, l2sq, linf, d, checks)


def dobrowolski_lower(n: int, bits: int = 64) -> tuple:
    """Enclosure (lo, hi) of 1 + (1/1200) (log log n / log n)^3."""
    if n < 3:
        raise ValueError("n must be at least 3")
    e = _is_pow2(Fraction(n))
    f = None if e is None else _is_pow2(Fraction(e))
    if f is not None:
        v = 1 + Fraction(f, e) ** 3 / 1200
        return v, v
    ctx = _ctx(bits)
    L = _log2(ctx, ctx.mpf(n))
    val = 1 + (_log2(ctx, L) / L) ** 3 / 1200
    return _ends(val)


def _sparse_parts(Q: IntPolynomial) -> dict:
    c = Q.coeffs
    return {
        "all_even": all(x % 2 == 0 for x in c),
        "constant_not_div4": c[0] % 4 != 0,
        "constant_nonzero": c[0] != 0,
    }


def _sparse_holds(l1: int, n: int, d: int, bits: int, max_bits: int = MAX_BITS):
    def build(ctx):
        L = ctx.mpf(l1)
        lhs = ctx.exp(ctx.log(L) / ctx.mpf(n - d))
        rhs = 1 + _iv(ctx, SMALL) / (_log2(ctx, L + 1) * _log2(ctx, _log2(ctx, L + 2))) ** 3
        return lhs, rhs

    return _decide(build, bits, max_bits)


def sparse_poly_family(Q, n: int, p, config: Config = DEFAULT, isolate_up_to: int = 64) -> CriterionReport:
    """x^n + Q(x): l1(Q)^(1/(n - d)) < 1 + 10^-37 (log(l1 + 1) log log(l1 + 2))^-3.

    The root x0 > 1 lies in (1, l1(Q)^(1/(n - d))]; for n up to
    ``isolate_up_to`` it is also isolated exactly.  lam is 1/x0.

    With every coefficient of Q even, x^n + Q(x) is monic and congruent to
    x^n mod 2, so each monic factor has an even constant term and no root
    is a unit.  That settles the {-1,0,1} hypothesis without irreducibility;
    4 not dividing Q(0) adds irreducibility, reported but not required.
    """
    Q = as_polynomial(Q, primitive=False)
    n = int(n)
    d = Q.degree
    if Q(1) >= 0:
        raise ValueError("need Q(1) < 0")
    if n <= d:
        raise ValueError("need n > deg Q")
    p, p_in = _p_ok(p)
    verdict, lhs, rhs, used = _sparse_holds(Q.l1(), n, d, config.precision_bits)
    eis = _sparse_parts(Q)
    notes = {"p_in_range": p_in, **eis, "root_bracket": ["1", frac_str(_ends(lhs)[1])]}
    non_unit = eis["all_even"] and eis["constant_nonzero"]
    applicable = (True if non_unit else None) if p_in else False
    notes["irreducible_by_eisenstein"] = eis["all_even"] and eis["constant_not_div4"]
    if not non_unit:
        notes["pm1"] = "odd coefficient in Q: the non-unit argument does not apply"
    if n <= isolate_up_to:
        coeffs = list(Q.coeffs) + [0] * (n + 1 - len(Q.coeffs))
        coeffs[n] += 1
        P = IntPolynomial(tuple(coeffs))
        hi = _ends(lhs)[1]
        roots = [r for r in isolate_real_roots(P, Fraction(1), hi) if float(r) > 1]
        notes["roots_above_1"] = [float(r) for r in roots]
    return CriterionReport(
        "sparse",
        f"x^{n} + ({Q})",
        p,
        _combine(verdict, applicable),
        ("1", str(Q.l1())),
        _enclosure(rhs),
        _enclosure(lhs),
        used,
        notes,
    )


def sparse_threshold(Q, hi: int = 10**45, config: Config = DEFAULT) -> int:
    """Least n > deg Q for which the sparse-family inequality holds."""
    Q = as_polynomial(Q, primitive=False)
    d, l1 = Q.degree, Q.l1()
    bits = config.precision_bits

    def holds(n):
        v = _sparse_holds(l1, n, d, bits)[0]
        if v is Verdict.UNKNOWN:
            raise ArithmeticError(f"undecided at n = {n}")
        return v is Verdict.PASS

    lo = d + 1
    if holds(lo):
        return lo
    if not holds(hi):
        raise ValueError("inequality fails at the upper end of the bracket")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if holds(mid):
            hi = mid
        else:
            lo = mid
    return hi


def shape_condition(lam: AlgebraicNumber, c: float, eps: float, config: Config = DEFAULT) -> bool:
    """Exploratory: 1 - lam < c min(log M, (log M)^(-1 - eps)) for a user-chosen c.

    The constant in the general theorem is not explicit; nothing here
    certifies absolute continuity.
    """
    enc = mahler_measure(lam.minpoly, config=config)
    lm = math.log2(float(enc.hi))
    if lm <= 0:
        return False
    return 1 - float(lam) < c * min(lm, lm ** (-1 - eps))


def batch_explicit(source, config: Config = DEFAULT) -> list:
    """Run explicit_condition on CSV rows (polynomial, p[, lo, hi]).

    Without an isolating bracket the largest real root in (0, 1) is used.
    ``source`` is CSV text or an iterable of rows.
    """
    rows = csv.reader(io.StringIO(source)) if isinstance(source, str) else source
    out = []
    for row in rows:
        if not row or row[0].startswith("#") or row[0].strip() == "polynomial":
            continue
        P = parse_polynomial(row[0].strip())
        p = Fraction(row[1].strip())
        if len(row) >= 4:
            lam = real_root(P, Fraction(row[2].strip()), Fraction(row[3].strip()))
        else:
            roots = [r for r in isolate_real_roots(P, Fraction(0), Fraction(1)) if 0 < float(r) < 1]
            if not roots:
                raise ValueError(f"{row[0]} has no root in (0, 1)")
            lam = max(roots, key=float)
        out.append(explicit_condition(lam, p, config))
    return out


# ---------------------------------------------------------------------------
# Gaussian mixture entropy gap

_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)


def _log_mixture(x, p: float, j: float):
    """ln(p g(x + j) + (1 - p) g(x - j)) for the standard normal density g."""
    a = math.log(p) - 0.5 * (x + j) ** 2
    b = math.log1p(-p) - 0.5 * (x - j) ** 2
    return np.logaddexp(a, b) - _HALF_LOG_2PI


def _neg_entropy_integrand(x, p, j):
    lg = _log_mixture(x, p, j)
    return math.exp(lg) * lg / math.log(2)


def _tail_bound(a: float) -> float:
    """Bound on 2 * int_a^inf g(y) (-log2 g(y)) dy."""
    q = 0.5 * special.erfc(a / math.sqrt(2))
    phi = math.exp(-0.5 * a * a - _HALF_LOG_2PI)
    second_moment = a * phi + q
    return 2 * (second_moment / 2 + _HALF_LOG_2PI * q) / math.log(2)


def gaussian_entropy_gap(p, half_width: float = 12.0, epsabs: float = 1e-13, limit: int = 200) -> EntropyValue:
    """int g_1 log g_1 - int g_sqrt2 log g_sqrt2 with g_j = p g(. + j) + (1 - p) g(. - j).

    Integrated over [-(half_width + sqrt 2), half_width + sqrt 2]; the error
    adds both quadrature estimates and a Gaussian tail bound for each term.
    """
    p = float(Fraction(p))
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    L = half_width + math.sqrt(2)
    total, err = 0.0, 0.0
    for j, sign in ((1.0, 1.0), (math.sqrt(2), -1.0)):
        pts = [-j, 0.0, j]
        res = integrate.quad(_neg_entropy_integrand, -L, L, args=(p, j), points=pts, epsabs=epsabs, epsrel=1e-12, limit=limit, full_output=1)
        val, e = res[0], res[1]
        if len(res) > 3 and e > 1e-8:
            raise ArithmeticError(f"quadrature did not converge for j = {j}: {res[3]}")
        total += sign * val
        # outside [-L, L] the mixture is below g(|x| - j) and -f log f is increasing there
        err += e + _tail_bound(L - j)
    return EntropyValue(total, err)
