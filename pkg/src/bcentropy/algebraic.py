"""Integer polynomials, certified real roots and Mahler measure enclosures.

Everything reported here is either exact or an enclosure with rational
endpoints.  Floating point (mpmath) is used only to find candidate roots;
inclusion radii are then computed in exact Gaussian-rational arithmetic.
"""

from __future__ import annotations

import math
import re
import threading
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import mpmath
import numpy as np
import sympy

from .config import DEFAULT, Config

_X = sympy.Symbol("x")


class PolynomialError(ValueError):
    """Raised for malformed, zero or constant polynomial input."""


class PrecisionExhausted(RuntimeError):
    """A certified answer could not be reached within the precision limit."""


@dataclass(frozen=True)
class IntPolynomial:
    coeffs: tuple  # constant term first

    def __post_init__(self):
        c = [int(v) for v in self.coeffs]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> int:
        return self.coeffs[-1]

    def is_zero(self) -> bool:
        return self.coeffs == (0,)

    def content(self) -> int:
        g = 0
        for c in self.coeffs:
            g = math.gcd(g, c)
        return g

    def primitive(self) -> "IntPolynomial":
        g = self.content()
        if g == 0:
            raise PolynomialError("zero polynomial")
        if self.leading < 0:
            g = -g
        return IntPolynomial(tuple(c // g for c in self.coeffs))

    def reversed(self) -> "IntPolynomial":
        return IntPolynomial(tuple(reversed(self.coeffs)))

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def sign_at(self, q: Fraction) -> int:
        """Sign of P(q), evaluated in integers."""
        q = Fraction(q)
        n, d = q.numerator, q.denominator
        acc = 0
        dp = 1
        # homogenised Horner: sum c_k n^k d^(deg-k)
        for c in reversed(self.coeffs):
            acc = acc * n + c * dp
            dp *= d
        # acc = P(q) * d^deg with d > 0
        return (acc > 0) - (acc < 0)

    def l1(self) -> int:
        return sum(abs(c) for c in self.coeffs)

    def l2_squared(self) -> int:
        return sum(c * c for c in self.coeffs)

    def linf(self) -> int:
        return max(abs(c) for c in self.coeffs)

    def to_sympy(self) -> sympy.Poly:
        return sympy.Poly(list(reversed(self.coeffs)), _X, domain="ZZ")

    @classmethod
    def from_sympy(cls, p) -> "IntPolynomial":
        p = sympy.Poly(p, _X)
        return cls(tuple(int(c) for c in reversed(p.all_coeffs())))

    def __str__(self):
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if k == 0:
                body = str(a)
            else:
                mono = "x" if k == 1 else f"x^{k}"
                body = mono if a == 1 else f"{a}{mono}"
            terms.append((sign, body))
        if not terms:
            return "0"
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out

    def to_list(self) -> list:
        return list(self.coeffs)


_TERM = re.compile(r"^(\d+)?(?:(x)(?:\^(\d+))?)?$")


def parse_polynomial(text: str, primitive: bool = True) -> IntPolynomial:
    """Parse "[c0,c1,...]" or a sum of integer multiples of powers of x.

    By default the result is the primitive part with positive leading
    coefficient; ``primitive=False`` keeps the coefficients as written.
    """
    if not isinstance(text, str):
        raise PolynomialError("polynomial text must be a string")
    s = text.replace("−", "-").replace(" ", "").replace("**", "^").replace("*", "")
    if not s:
        raise PolynomialError("empty polynomial")
    if s.startswith("["):
        if not s.endswith("]"):
            raise PolynomialError(f"unterminated coefficient list: {text!r}")
        body = s[1:-1]
        try:
            coeffs = [int(tok) for tok in body.split(",")] if body else []
        except ValueError as exc:
            raise PolynomialError(f"bad coefficient in {text!r}") from exc
        if not coeffs:
            raise PolynomialError("empty coefficient list")
    else:
        pieces = re.findall(r"[+-]?[^+-]+", s)
        if "".join(pieces) != s or not pieces:
            raise PolynomialError(f"cannot parse {text!r}")
        found = {}
        for piece in pieces:
            sign = -1 if piece[0] == "-" else 1
            body = piece.lstrip("+-")
            m = _TERM.match(body)
            if not body or m is None or (m.group(1) is None and m.group(2) is None):
                raise PolynomialError(f"bad term {piece!r} in {text!r}")
            coef = int(m.group(1)) if m.group(1) else 1
            if m.group(2) is None:
                power = 0
            else:
                power = int(m.group(3)) if m.group(3) else 1
            found[power] = found.get(power, 0) + sign * coef
        coeffs = [0] * (max(found) + 1)
        for k, v in found.items():
            coeffs[k] = v
    p = IntPolynomial(tuple(coeffs))
    if p.is_zero():
        raise PolynomialError("zero polynomial")
    if primitive:
        p = p.primitive()
    if p.degree < 1:
        raise PolynomialError("constant polynomial has no roots")
    return p


def as_polynomial(p, primitive: bool = True) -> IntPolynomial:
    if isinstance(p, IntPolynomial):
        return p
    if isinstance(p, str):
        return parse_polynomial(p, primitive)
    return IntPolynomial(tuple(p))


def irreducible_factors(P: IntPolynomial) -> tuple[int, list]:
    """Content and [(irreducible factor, multiplicity)] over the integers."""
    content, facs = P.to_sympy().factor_list()
    out = []
    for f, m in facs:
        g = IntPolynomial.from_sympy(f)
        if g.leading < 0:
            g = IntPolynomial(tuple(-c for c in g.coeffs))
            content = -content if m % 2 else content
        out.append((g, int(m)))
    out.sort(key=lambda fm: (fm[0].degree, fm[0].coeffs))
    return int(content), out


# ---------------------------------------------------------------------------
# real algebraic numbers


class AlgebraicNumber:
    """A real root of an irreducible integer polynomial, held by an isolating interval."""

    def __init__(self, minpoly: IntPolynomial, lo, hi):
        self.minpoly = minpoly
        self.lo = Fraction(lo)
        self.hi = Fraction(hi)
        if self.lo > self.hi:
            raise ValueError("empty isolating interval")
        self._best = (self.lo, self.hi)
        self._cache: dict[int, tuple] = {}
        self._lock = threading.Lock()
        self.refinement_steps = 0
        if minpoly.degree == 1:
            q = Fraction(-minpoly.coeffs[0], minpoly.coeffs[1])
            if not self.lo <= q <= self.hi:
                raise ValueError("interval misses the rational root")
            self._best = (q, q)

    @classmethod
    def rational(cls, q) -> "AlgebraicNumber":
        q = Fraction(q)
        return cls(IntPolynomial((-q.numerator, q.denominator)), q, q)

    @property
    def degree(self) -> int:
        return self.minpoly.degree

    @property
    def exact(self) -> Fraction | None:
        if self.minpoly.degree == 1:
            return self._best[0]
        return None

    def refine(self, bits: int) -> tuple:
        """Enclosure of width at most 2^-bits; cached and nested across calls."""
        if bits < 1:
            raise ValueError("bits must be positive")
        with self._lock:
            hit = self._cache.get(bits)
            if hit is not None:
                return hit
            lo, hi = self._best
            target = Fraction(1, 1 << bits)
            if hi - lo > target:
                s_lo = self.minpoly.sign_at(lo)
                while hi - lo > target:
                    mid = (lo + hi) / 2
                    s_mid = self.minpoly.sign_at(mid)
                    self.refinement_steps += 1
                    if s_mid == 0:
                        lo = hi = mid
                        break
                    if s_mid == s_lo:
                        lo = mid
                    else:
                        hi = mid
                self._best = (lo, hi)
            self._cache[bits] = self._best
            return self._best

    def approx(self, bits: int = 64) -> Fraction:
        lo, hi = self.refine(bits)
        return (lo + hi) / 2

    def __float__(self):
        return float(self.approx(60))

    def same_root(self, other: "AlgebraicNumber") -> bool:
        if self.minpoly != other.minpoly:
            return False
        a_lo, a_hi = self._best
        b_lo, b_hi = other._best
        if max(a_lo, b_lo) > min(a_hi, b_hi):
            return False
        if self.degree == 1:
            return True
        lo, hi = min(a_lo, b_lo), max(a_hi, b_hi)
        return self.minpoly.to_sympy().count_roots(sympy.Rational(lo), sympy.Rational(hi)) == 1

    def __eq__(self, other):
        return isinstance(other, AlgebraicNumber) and self.same_root(other)

    def __hash__(self):
        return hash(self.minpoly)

    def __repr__(self):
        return f"AlgebraicNumber({self.minpoly}, ~{float(self):.12g})"

    def power_vectors(self, n: int) -> list:
        return power_vectors(self.minpoly, n)


def power_vectors(f: IntPolynomial, n: int) -> list:
    """Coordinates of 1, x, ..., x^(n-1) in the basis 1..x^(d-1) of Q[x]/(f)."""
    d = f.degree
    a = f.leading
    tail = [Fraction(-c, a) for c in f.coeffs[:-1]]  # x^d = sum tail_i x^i
    out = []
    v = [Fraction(0)] * d
    if d:
        v[0] = Fraction(1)
    for _ in range(n):
        out.append(tuple(v))
        top = v[-1]
        v = [Fraction(0)] + v[:-1]
        if top:
            v = [vi + top * ti for vi, ti in zip(v, tail)]
    return out


def isolate_real_roots(P, lo=None, hi=None) -> list:
    """One AlgebraicNumber per distinct real root of P in the closed range [lo, hi]."""
    P = as_polynomial(P)
    if P.is_zero():
        raise PolynomialError("zero polynomial")
    _, facs = irreducible_factors(P)
    roots = []
    for f, _m in facs:
        if f.degree == 1:
            q = Fraction(-f.coeffs[0], f.coeffs[1])
            if (lo is None or q >= lo) and (hi is None or q <= hi):
                roots.append(AlgebraicNumber(f, q, q))
            continue
        kw = {}
        if lo is not None:
            kw["inf"] = sympy.Rational(Fraction(lo).numerator, Fraction(lo).denominator)
        if hi is not None:
            kw["sup"] = sympy.Rational(Fraction(hi).numerator, Fraction(hi).denominator)
        for (a, b), _mult in f.to_sympy().intervals(**kw):
            a, b = Fraction(int(a.p), int(a.q)), Fraction(int(b.p), int(b.q))
            roots.append(AlgebraicNumber(f, a, b))
    # separate overlapping intervals coming from different factors
    bits = 8
    while True:
        roots.sort(key=lambda r: r._best)
        clash = any(roots[i]._best[1] >= roots[i + 1]._best[0] for i in range(len(roots) - 1))
        if not clash:
            break
        for r in roots:
            r.refine(bits)
        bits *= 2
    return roots


def real_root(P, lo, hi) -> AlgebraicNumber:
    """The unique root of P in [lo, hi]; error if there is not exactly one."""
    roots = isolate_real_roots(P, lo, hi)
    if len(roots) != 1:
        raise ValueError(f"expected one root in [{lo}, {hi}], found {len(roots)}")
    return roots[0]


# ---------------------------------------------------------------------------
# complex roots and Mahler measure


@dataclass(frozen=True)
class MahlerEnclosure:
    lo: Fraction
    hi: Fraction
    precision_bits: int

    def contains(self, x) -> bool:
        if isinstance(x, Fraction) or isinstance(x, int):
            return self.lo <= x <= self.hi
        x = mpmath.mpf(x)
        return mpmath.mpf(self.lo.numerator) / self.lo.denominator <= x <= mpmath.mpf(self.hi.numerator) / self.hi.denominator

    def relative_width(self) -> Fraction:
        return (self.hi - self.lo) / self.lo

    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def is_exact(self) -> bool:
        return self.lo == self.hi

    def to_json(self) -> dict:
        return {"lo": frac_str(self.lo), "hi": frac_str(self.hi), "precision_bits": self.precision_bits}


def frac_str(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def _isqrt_bounds(num: int, den: int, q: int) -> tuple:
    """Rational bounds lo <= sqrt(num/den) <= hi with denominators 2^q."""
    scaled_floor = (num << (2 * q)) // den
    s = math.isqrt(scaled_floor)
    lo = Fraction(s, 1 << q)
    hi = Fraction(s + 1, 1 << q)
    return lo, hi


def _reciprocal_kind(f: IntPolynomial) -> int:
    r = f.reversed().coeffs
    if r == f.coeffs:
        return 1
    if r == tuple(-c for c in f.coeffs):
        return -1
    return 0


def _chebyshev_transform(f: IntPolynomial) -> IntPolynomial:
    """T with f(x) = x^m T(x + 1/x) for a palindromic f of degree 2m."""
    m = f.degree // 2
    c = f.coeffs
    D_prev = [2]  # x^0 + x^0
    D_cur = [0, 1]  # x + 1/x
    total = [c[m]]

    def add(acc, poly, k):
        if len(acc) < len(poly):
            acc += [0] * (len(poly) - len(acc))
        for i, v in enumerate(poly):
            acc[i] += k * v

    for k in range(1, m + 1):
        add(total, D_cur, c[m + k])
        nxt = [0] + D_cur
        for i, v in enumerate(D_prev):
            nxt[i] -= v
        D_prev, D_cur = D_cur, nxt
    return IntPolynomial(tuple(total))


def _circle_count_irreducible(f: IntPolynomial) -> int:
    if f.degree == 1:
        return 1 if abs(f.coeffs[0]) == abs(f.coeffs[1]) else 0
    if _reciprocal_kind(f) != 1 or f.degree % 2:
        return 0
    T = _chebyshev_transform(f)
    return 2 * int(T.to_sympy().count_roots(-2, 2))


def unit_circle_root_count(P) -> int:
    """Number of roots of P on the unit circle, with multiplicity."""
    P = as_polynomial(P)
    _, facs = irreducible_factors(P)
    return sum(m * _circle_count_irreducible(f) for f, m in facs)


@dataclass
class _CertifiedRoot:
    re: float
    im: float
    mod_lo: Fraction
    mod_hi: Fraction
    side: int  # -1 inside, 0 on the circle, +1 outside


def _gauss_int_pow_eval(coeffs, A, B, k):
    """P_hom(A + iB) = sum c_j (A+iB)^j 2^(k(e-j)) as a Gaussian integer."""
    hr, hi = coeffs[-1], 0
    w = 1 << k
    wp = w
    for c in reversed(coeffs[:-1]):
        hr, hi = hr * A - hi * B + c * wp, hr * B + hi * A
        wp *= w
    return hr, hi


def _certify_roots(f: IntPolynomial, circle: int, bits: int, max_prec: int = 1 << 14):
    """Inclusion disks for every root of a square-free f.

    Disks are Gerschgorin disks of the matrix diag(z) - 1 W^T, whose
    eigenvalues are exactly the roots of f (W are the Weierstrass
    corrections); pairwise disjoint disks hold one root each.
    """
    e = f.degree
    a = f.leading
    prec = max(bits + 2 * e + 40, 96)
    while prec <= max_prec:
        with mpmath.workprec(prec + 20):
            try:
                approx = mpmath.polyroots(
                    [mpmath.mpf(c) for c in reversed(f.coeffs)],
                    maxsteps=200 + 20 * e,
                    extraprec=prec + 40,
                )
            except mpmath.libmp.NoConvergence:
                prec *= 2
                continue
            k = prec
            pts = [
                (int(mpmath.nint(mpmath.re(z) * (mpmath.mpf(2) ** k))), int(mpmath.nint(mpmath.im(z) * (mpmath.mpf(2) ** k))))
                for z in approx
            ]
        if len(set(pts)) < e:
            prec *= 2
            continue
        q = prec + 16
        radii = []
        ok = True
        for i, (A, B) in enumerate(pts):
            pr, pi = _gauss_int_pow_eval(f.coeffs, A, B, k)
            qr, qi = 1, 0
            for j, (C, D) in enumerate(pts):
                if j != i:
                    dr, di = A - C, B - D
                    qr, qi = qr * dr - qi * di, qr * di + qi * dr
            num = (pr * pr + pi * pi) * e * e
            den = (qr * qr + qi * qi) * a * a * (1 << (2 * k))
            if den == 0:
                ok = False
                break
            radii.append(_isqrt_bounds(num, den, q)[1])
        if not ok:
            prec *= 2
            continue
        scale = Fraction(1, 1 << k)
        disjoint = True
        for i in range(e):
            for j in range(i + 1, e):
                dr = (pts[i][0] - pts[j][0])
                di = (pts[i][1] - pts[j][1])
                dist2 = Fraction(dr * dr + di * di, 1 << (2 * k))
                if dist2 <= (radii[i] + radii[j]) ** 2:
                    disjoint = False
                    break
            if not disjoint:
                break
        if not disjoint:
            prec *= 2
            continue
        roots = []
        for (A, B), rho in zip(pts, radii):
            m_lo, m_hi = _isqrt_bounds(A * A + B * B, 1 << (2 * k), q)
            lo, hi = max(m_lo - rho, Fraction(0)), m_hi + rho
            side = 1 if lo > 1 else (-1 if hi < 1 else 0)
            roots.append(_CertifiedRoot(float(A * scale), float(B * scale), lo, hi, side))
        if sum(1 for r in roots if r.side == 0) == circle:
            return roots, prec
        prec *= 2
    raise PrecisionExhausted("root moduli could not be separated from 1")


def _round_down(q: Fraction, bits: int) -> Fraction:
    if q <= 0:
        return q
    shift = bits - (q.numerator.bit_length() - q.denominator.bit_length())
    if shift <= 0:
        return q
    return Fraction((q.numerator << shift) // q.denominator, 1 << shift)


def _round_up(q: Fraction, bits: int) -> Fraction:
    if q <= 0:
        return q
    shift = bits - (q.numerator.bit_length() - q.denominator.bit_length())
    if shift <= 0:
        return q
    return Fraction(-((-(q.numerator << shift)) // q.denominator), 1 << shift)


def _factor_mahler(f: IntPolynomial, bits: int):
    """Enclosure of M(f) and the (inside, on, outside) root census of irreducible f."""
    if f.degree == 1:
        a, b = abs(f.coeffs[1]), abs(f.coeffs[0])
        m = Fraction(max(a, b))
        side = (1, 0, 0) if b < a else ((0, 1, 0) if a == b else (0, 0, 1))
        return m, m, side
    circle = _circle_count_irreducible(f)
    a = abs(f.leading)
    if circle == f.degree:
        return Fraction(a), Fraction(a), (0, circle, 0)
    work = bits + 4
    while True:
        roots, _ = _certify_roots(f, circle, work)
        out = [r for r in roots if r.side == 1]
        lo, hi = Fraction(a), Fraction(a)
        for r in out:
            lo = _round_down(lo * r.mod_lo, work + 24)
            hi = _round_up(hi * r.mod_hi, work + 24)
        census = (sum(r.side == -1 for r in roots), circle, len(out))
        if not out:
            return Fraction(a), Fraction(a), census
        if hi <= lo * (1 + Fraction(1, 1 << (bits + 1))):
            return lo, hi, census
        work *= 2


def mahler_measure(P, bits: int | None = None, config: Config = DEFAULT) -> MahlerEnclosure:
    """Enclosure of |a| prod_{|z|>1} |z| with hi/lo <= 1 + 2^(1-bits)."""
    P = as_polynomial(P)
    if P.is_zero():
        raise PolynomialError("the zero polynomial has no Mahler measure")
    bits = config.precision_bits if bits is None else bits
    if P.degree < 1:
        c = Fraction(abs(P.coeffs[0]))
        return MahlerEnclosure(c, c, bits)
    content, facs = irreducible_factors(P)
    total = sum(m for _, m in facs)
    per = bits + max(1, total).bit_length() + 2
    lo = hi = Fraction(abs(content))
    for f, m in facs:
        flo, fhi, _ = _factor_mahler(f, per)
        lo *= flo**m
        hi *= fhi**m
    if lo != hi:
        lo = _round_down(lo, bits + 16)
        hi = _round_up(hi, bits + 16)
    return MahlerEnclosure(lo, hi, bits)


def root_census(P, bits: int = 64) -> tuple:
    """Certified counts (inside, on, outside) of the unit circle, with multiplicity."""
    P = as_polynomial(P)
    _, facs = irreducible_factors(P)
    ins = on = out = 0
    for f, m in facs:
        _, _, (i, o, u) = _factor_mahler(f, bits)
        ins += m * i
        on += m * o
        out += m * u
    return ins, on, out


# ---------------------------------------------------------------------------
# {-1,0,1} relations


class Pm1Status(str, Enum):
    FOUND = "FOUND"
    NOT_FOUND = "NOT_FOUND"
    BOUND_EXCEEDED = "BOUND_EXCEEDED"


@dataclass(frozen=True)
class Pm1Result:
    status: Pm1Status
    degree_bound: int
    witness: IntPolynomial | None = None
    # True when NOT_FOUND holds for every degree, not just up to the bound
    unconditional: bool = False

    def to_json(self) -> dict:
        return {
            "status": self.status.value,
            "degree_bound": self.degree_bound,
            "witness": None if self.witness is None else self.witness.to_list(),
            "unconditional": self.unconditional,
        }


def _integer_power_rows(f: IntPolynomial, n: int) -> list:
    vecs = power_vectors(f, n)
    den = 1
    for v in vecs:
        for c in v:
            den = den * c.denominator // math.gcd(den, c.denominator)
    return [tuple(int(c * den) for c in v) for v in vecs]


def _sign_table(h: int) -> np.ndarray:
    """All vectors of {-1,0,1}^h, one per row, with the zero vector in row 0."""
    if h == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grid = np.indices((3,) * h).reshape(h, -1).T
    grid = (grid + 1) % 3 - 1  # digit 0 -> 0, 1 -> 1, 2 -> -1
    return grid[:, ::-1].astype(np.int64)


def _row_degrees(signs: np.ndarray) -> np.ndarray:
    """Index of the last nonzero entry per row, -1 for the zero row."""
    if signs.shape[1] == 0:
        return np.full(signs.shape[0], -1)
    nz = signs != 0
    last = signs.shape[1] - 1 - np.argmax(nz[:, ::-1], axis=1)
    return np.where(nz.any(axis=1), last, -1)


def _collisions(low: np.ndarray, high: np.ndarray):
    """Pairs (i, j) with low[i] == high[j], found by a joint lexicographic sort."""
    both = np.vstack([low, high])
    label = np.concatenate([np.zeros(len(low), np.int64), np.ones(len(high), np.int64)])
    index = np.concatenate([np.arange(len(low)), np.arange(len(high))])
    order = np.lexsort(both.T[::-1])
    srt = both[order]
    same = np.all(srt[1:] == srt[:-1], axis=1)
    starts = np.flatnonzero(np.concatenate([[True], ~same]))
    ends = np.concatenate([starts[1:], [len(srt)]])
    for s, e in zip(starts, ends):
        if e - s < 2:
            continue
        run = order[s:e]
        lows = index[run][label[run] == 0]
        highs = index[run][label[run] == 1]
        if len(lows) and len(highs):
            yield lows, highs


def pm1_root_search(x: AlgebraicNumber, degree_bound: int, config: Config = DEFAULT) -> Pm1Result:
    """Look for a nonzero {-1,0,1} polynomial of degree < degree_bound vanishing at x.

    Meet in the middle on exact coordinate vectors modulo the minimal
    polynomial: low-half sums are matched against negated high-half sums.
    """
    if degree_bound < 1:
        raise ValueError("degree_bound must be positive")
    if degree_bound > config.pm1_degree_bound:
        raise ValueError(f"degree_bound exceeds the configured maximum {config.pm1_degree_bound}")
    q = x.exact
    if q is not None:
        # a {-1,0,1} polynomial with nonzero lowest coefficient has unit
        # leading and constant coefficients, so its rational roots are +-1
        if q == 0:
            return Pm1Result(Pm1Status.FOUND, degree_bound, IntPolynomial((0, 1)))
        if abs(q) == 1 and degree_bound >= 2:
            return Pm1Result(Pm1Status.FOUND, degree_bound, IntPolynomial((-int(q), 1)))
        return Pm1Result(Pm1Status.NOT_FOUND, degree_bound, None, unconditional=abs(q) != 1)
    h_low = degree_bound // 2
    h_high = degree_bound - h_low
    if 3 ** max(h_low, h_high) > config.pm1_memory_budget:
        return Pm1Result(Pm1Status.BOUND_EXCEEDED, degree_bound)
    rows = _integer_power_rows(x.minpoly, degree_bound)
    if sum(max(abs(c) for c in r) for r in rows) >= 1 << 62:
        return Pm1Result(Pm1Status.BOUND_EXCEEDED, degree_bound)
    mat = np.array(rows, dtype=np.int64)
    low_signs = _sign_table(h_low)
    high_signs = _sign_table(h_high)
    low = low_signs @ mat[:h_low]
    high = -(high_signs @ mat[h_low:])
    low_deg = _row_degrees(low_signs)
    high_deg = _row_degrees(high_signs)
    best = None
    for lows, highs in _collisions(low, high):
        hd = high_deg[highs]
        if hd.min() < 0:
            # the run holds the value zero: a nonzero low vector alone is a relation
            cand_low = lows[low_deg[lows] >= 0]
            if len(cand_low):
                i = int(cand_low[np.argmin(low_deg[cand_low])])
                cand = (int(low_deg[i]), i, 0)
                best = cand if best is None or cand < best else best
            nonzero = highs[hd >= 0]
        else:
            nonzero = highs
        if len(nonzero):
            j = int(nonzero[np.argmin(high_deg[nonzero])])
            i = int(lows[0])
            cand = (h_low + int(high_deg[j]), i, j)
            best = cand if best is None or cand < best else best
    if best is None:
        return Pm1Result(Pm1Status.NOT_FOUND, degree_bound)
    _, i, j = best
    b = [int(c) for c in low_signs[i]] + [int(c) for c in high_signs[j]]
    while b[-1] == 0:
        b.pop()
    if b[-1] < 0:
        b = [-c for c in b]
    return Pm1Result(Pm1Status.FOUND, degree_bound, IntPolynomial(tuple(b)))
