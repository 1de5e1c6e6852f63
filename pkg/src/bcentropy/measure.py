"""Finitely supported measures with exact positions and exact masses.

A measure stores its atoms over two common denominators.  Position ``i``
is ``keys[i] / den`` (rational owner) or ``sum_j keys[i][j] * lam^j / den``
(algebraic owner ``lam``), and its mass is ``weights[i] / wden``.  Atoms
are sorted by value and pairwise distinct, so equality of measures is
equality of these tuples.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .algebraic import AlgebraicNumber, IntPolynomial, as_polynomial, frac_str, power_vectors, real_root
from .config import DEFAULT, Config


class MeasureError(ValueError):
    pass


class EnumerationBoundExceeded(RuntimeError):
    pass


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


@dataclass(frozen=True)
class AlgebraicPos:
    coeffs: tuple  # rational coordinates in the basis 1, lam, ..., lam^(d-1)
    owner: AlgebraicNumber

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))

    def __float__(self):
        return float(sum(float(c) * float(self.owner) ** j for j, c in enumerate(self.coeffs)))


@dataclass(frozen=True)
class Interval:
    """Real interval with optional open ends; None means unbounded."""

    lo: Fraction | None
    hi: Fraction | None
    lo_closed: bool = True
    hi_closed: bool = True

    @classmethod
    def closed(cls, lo, hi):
        return cls(Fraction(lo), Fraction(hi), True, True)

    @classmethod
    def half_open(cls, lo, hi):
        """(lo, hi], the shape of the level intervals."""
        return cls(Fraction(lo), Fraction(hi), False, True)

    @classmethod
    def everything(cls):
        return cls(None, None)

    def contains_sign(self, cmp_lo: int, cmp_hi: int) -> bool:
        """Membership from the signs of x - lo and x - hi."""
        if self.lo is not None and (cmp_lo < 0 or (cmp_lo == 0 and not self.lo_closed)):
            return False
        if self.hi is not None and (cmp_hi > 0 or (cmp_hi == 0 and not self.hi_closed)):
            return False
        return True


class DiscreteMeasure:
    __slots__ = ("owner", "den", "keys", "weights", "wden", "_numeric")

    def __init__(self, keys, weights, den=1, wden=1, owner: AlgebraicNumber | None = None, _sorted=False):
        if owner is not None and owner.degree == 1:
            raise MeasureError("rational owners must be folded into rational positions")
        keys = list(keys)
        weights = [int(w) for w in weights]
        if len(keys) != len(weights):
            raise MeasureError("keys and weights differ in length")
        if any(w <= 0 for w in weights):
            raise MeasureError("masses must be positive")
        if den <= 0 or wden <= 0:
            raise MeasureError("denominators must be positive")
        self.owner = owner
        self._numeric = {}
        if not _sorted:
            merged: dict = {}
            for k, w in zip(keys, weights):
                merged[k] = merged.get(k, 0) + w
            keys = list(merged)
            weights = [merged[k] for k in keys]
        # reduce the common denominators
        g = den
        for k in keys:
            if g == 1:
                break
            if owner is None:
                g = math.gcd(g, k)
            else:
                for c in k:
                    g = math.gcd(g, c)
        if g > 1:
            if owner is None:
                keys = [k // g for k in keys]
            else:
                keys = [tuple(c // g for c in k) for k in keys]
            den //= g
        gw = wden
        for w in weights:
            if gw == 1:
                break
            gw = math.gcd(gw, w)
        if gw > 1:
            weights = [w // gw for w in weights]
            wden //= gw
        self.den = den
        self.wden = wden
        if owner is None:
            if not _sorted:
                order = sorted(range(len(keys)), key=keys.__getitem__)
                keys = [keys[i] for i in order]
                weights = [weights[i] for i in order]
        else:
            keys = [tuple(k) for k in keys]
            if not _sorted:
                order = _algebraic_order(keys, owner, den)
                keys = [keys[i] for i in order]
                weights = [weights[i] for i in order]
        self.keys = tuple(keys)
        self.weights = tuple(weights)
        if sum(self.weights) > self.wden:
            raise MeasureError("total mass exceeds 1")

    # -- basic views -------------------------------------------------------

    def __len__(self):
        return len(self.keys)

    @property
    def n_atoms(self) -> int:
        return len(self.keys)

    @property
    def is_rational(self) -> bool:
        return self.owner is None

    def total_weight(self) -> int:
        return sum(self.weights)

    def total_mass(self) -> Fraction:
        return Fraction(self.total_weight(), self.wden)

    def masses(self) -> list:
        return [Fraction(w, self.wden) for w in self.weights]

    def positions(self) -> list:
        if self.owner is None:
            return [Fraction(k, self.den) for k in self.keys]
        return [AlgebraicPos(tuple(Fraction(c, self.den) for c in k), self.owner) for k in self.keys]

    def atoms(self) -> list:
        return list(zip(self.positions(), self.masses()))

    def float_positions(self) -> np.ndarray:
        if self.owner is None:
            return np.array([k / self.den for k in self.keys], dtype=float)
        return np.array([float(s) for s in self.shadow_positions(64)], dtype=float)

    def is_integer_supported(self) -> bool:
        return self.owner is None and self.den == 1

    def __eq__(self, other):
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        if (self.owner is None) != (other.owner is None):
            return False
        if self.owner is not None and not self.owner.same_root(other.owner):
            return False
        return (self.keys, self.weights, self.den, self.wden) == (other.keys, other.weights, other.den, other.wden)

    def __hash__(self):
        return hash((self.keys, self.weights, self.den, self.wden))

    def __repr__(self):
        head = ", ".join(f"({float(p):.6g}, {m})" for p, m in self.atoms()[:6])
        more = "" if len(self) <= 6 else f", ... {len(self)} atoms"
        return f"DiscreteMeasure([{head}{more}])"

    def _with(self, keys, weights, den=None, wden=None, _sorted=False) -> "DiscreteMeasure":
        return DiscreteMeasure(
            keys,
            weights,
            self.den if den is None else den,
            self.wden if wden is None else wden,
            self.owner,
            _sorted=_sorted,
        )

    # -- certified numerics ------------------------------------------------

    def shadow_positions(self, bits: int) -> list:
        """Rationals within 2^-bits of each position (exact for rational owners)."""
        if self.owner is None:
            return [Fraction(k, self.den) for k in self.keys]
        hit = self._numeric.get(bits)
        if hit is None:
            ints = _algebraic_shadow(self.keys, self.owner, self.den, bits)
            hit = [Fraction(v, 1 << bits) for v in ints]
            self._numeric[bits] = hit
        return hit

    def shadow(self, bits: int) -> tuple:
        """(rational measure, delta): atoms moved by at most delta."""
        if self.owner is None:
            return self, Fraction(0)
        pos = self.shadow_positions(bits)
        return from_atoms(zip(pos, self.masses())), Fraction(1, 1 << bits)


# ---------------------------------------------------------------------------
# algebraic position numerics


def _power_enclosures(owner: AlgebraicNumber, d: int, bits: int) -> tuple:
    """Integers A_j <= lam^j 2^bits <= B_j for j < d."""
    lo, hi = owner.refine(bits + 4 * d + 8)
    A, B = [], []
    scale = 1 << bits
    for j in range(d):
        if lo >= 0:
            a, b = lo**j, hi**j
        elif hi <= 0:
            a, b = sorted((lo**j, hi**j))
        else:
            vals = [lo**j, hi**j, Fraction(0)]
            a, b = min(vals), max(vals)
        A.append(math.floor(a * scale))
        B.append(math.ceil(b * scale))
    return A, B


def _algebraic_enclosures(keys, owner, den, bits):
    """(mid, rad) with |value * den * 2^bits - mid| <= rad for each key."""
    d = owner.degree
    A, B = _power_enclosures(owner, d, bits)
    out = []
    for k in keys:
        mid = 0
        rad = 0
        for c, a, b in zip(k, A, B):
            mid += c * a
            rad += abs(c) * (b - a)
        out.append((mid, rad))
    return out


def _algebraic_shadow(keys, owner, den, bits) -> list:
    """Integers s with |value - s 2^-bits| <= 2^-bits."""
    guard = 8
    while True:
        enc = _algebraic_enclosures(keys, owner, den, bits + guard)
        limit = den << (guard - 1)
        if all(rad <= limit for _, rad in enc):
            shift = 1 << guard
            out = []
            for mid, _ in enc:
                # round mid / (den 2^guard) to the nearest integer
                num = 2 * mid + den * shift
                out.append(num // (2 * den * shift))
            return out
        guard *= 2


def _algebraic_order(keys, owner, den) -> list:
    """Indices sorting the keys by value, certified by disjoint enclosures."""
    n = len(keys)
    if n < 2:
        return list(range(n))
    bits = 64
    while True:
        enc = _algebraic_enclosures(keys, owner, den, bits)
        order = sorted(range(n), key=lambda i: enc[i][0])
        ok = True
        for i, j in zip(order, order[1:]):
            if enc[i][0] + enc[i][1] >= enc[j][0] - enc[j][1]:
                ok = False
                break
        if ok:
            return order
        bits *= 2
        if bits > 1 << 16:
            raise MeasureError("could not separate atoms; is the owner polynomial irreducible?")


def compare_to_rational(m: DiscreteMeasure, index: int, q: Fraction) -> int:
    """Sign of position[index] - q, exact."""
    q = Fraction(q)
    if m.owner is None:
        v = Fraction(m.keys[index], m.den)
        return (v > q) - (v < q)
    k = m.keys[index]
    if all(c == 0 for c in k[1:]):
        v = Fraction(k[0], m.den)
        return (v > q) - (v < q)
    bits = 64
    while True:
        (mid, rad), = _algebraic_enclosures([k], m.owner, m.den, bits)
        target = q * m.den * (1 << bits)
        if mid - rad > target:
            return 1
        if mid + rad < target:
            return -1
        bits *= 2


def vector_enclosure(vec, owner: AlgebraicNumber, den: int, bits: int) -> tuple:
    """Rational enclosure of sum vec_j lam^j / den."""
    (mid, rad), = _algebraic_enclosures([vec], owner, den, bits)
    s = den << bits
    return Fraction(mid - rad, s), Fraction(mid + rad, s)


# ---------------------------------------------------------------------------
# constructors


def _split_rational(pos_list) -> tuple:
    """Common denominator and integer numerators of a list of rationals."""
    fr = [Fraction(p) for p in pos_list]
    den = 1
    for f in fr:
        den = _lcm(den, f.denominator)
    return [f.numerator * (den // f.denominator) for f in fr], den


def _split_vectors(vecs) -> tuple:
    fr = [[Fraction(c) for c in v] for v in vecs]
    den = 1
    for v in fr:
        for c in v:
            den = _lcm(den, c.denominator)
    return [tuple(c.numerator * (den // c.denominator) for c in v) for v in fr], den


def from_atoms(atoms: Iterable, owner: AlgebraicNumber | None = None) -> DiscreteMeasure:
    """Build from (position, mass) pairs; algebraic positions are coordinate vectors."""
    atoms = list(atoms)
    if owner is not None and owner.degree == 1:
        q = owner.exact
        atoms = [(_eval_vector(p, q), m) for p, m in atoms]
        owner = None
    masses = [Fraction(m) for _, m in atoms]
    if any(m < 0 for m in masses):
        raise MeasureError("negative mass")
    kept = [(p, m) for (p, _), m in zip(atoms, masses) if m > 0]
    wnum, wden = _split_rational([m for _, m in kept]) if kept else ([], 1)
    if owner is None:
        pos = [p.coeffs[0] if isinstance(p, AlgebraicPos) else p for p, _ in kept]
        keys, den = _split_rational(pos) if kept else ([], 1)
    else:
        d = owner.degree
        vecs = []
        for p, _ in kept:
            if isinstance(p, AlgebraicPos):
                v = list(p.coeffs)
            elif isinstance(p, (list, tuple)):
                v = list(p)
            else:
                v = [p]
            if len(v) > d:
                raise MeasureError("coordinate vector longer than the owner degree")
            vecs.append(v + [0] * (d - len(v)))
        keys, den = _split_vectors(vecs) if kept else ([], 1)
    return DiscreteMeasure(keys, wnum, den, wden, owner)


def _eval_vector(p, q: Fraction):
    if isinstance(p, AlgebraicPos):
        p = p.coeffs
    if isinstance(p, (list, tuple)):
        return sum((Fraction(c) * q**j for j, c in enumerate(p)), Fraction(0))
    return Fraction(p)


def dirac(x=0, owner: AlgebraicNumber | None = None) -> DiscreteMeasure:
    return from_atoms([(x, 1)], owner)


def bernoulli_pair(center=0, distance=1, mass=1, owner: AlgebraicNumber | None = None) -> DiscreteMeasure:
    """Two atoms of mass mass/2 at center -+ distance/2."""
    distance = Fraction(distance)
    mass = Fraction(mass)
    if distance <= 0:
        raise MeasureError("distance must be positive")
    if not 0 < mass <= 1:
        raise MeasureError("mass must lie in (0, 1]")
    half = distance / 2
    if owner is None or owner.degree == 1:
        c = _eval_vector(center, owner.exact) if owner is not None else Fraction(center)
        return from_atoms([(c - half, mass / 2), (c + half, mass / 2)])
    if isinstance(center, AlgebraicPos):
        v = list(center.coeffs)
    elif isinstance(center, (list, tuple)):
        v = [Fraction(c) for c in center]
    else:
        v = [Fraction(center)]
    v = v + [Fraction(0)] * (owner.degree - len(v))
    lo = [v[0] - half] + v[1:]
    hi = [v[0] + half] + v[1:]
    return from_atoms([(lo, mass / 2), (hi, mass / 2)], owner)


def uniform_on_integers(lo: int, hi: int) -> DiscreteMeasure:
    """Normalised counting measure on [lo, hi] cap Z."""
    n = hi - lo + 1
    if n < 1:
        raise MeasureError("empty range")
    return DiscreteMeasure(list(range(lo, hi + 1)), [1] * n, 1, n, None, _sorted=True)


def integer_measure(weights: dict, total: int | None = None) -> DiscreteMeasure:
    """Measure on Z with mass weights[n] / total (total defaults to the sum)."""
    items = sorted((int(k), int(w)) for k, w in weights.items() if w)
    t = sum(w for _, w in items) if total is None else int(total)
    return DiscreteMeasure([k for k, _ in items], [w for _, w in items], 1, t, None, _sorted=True)


# ---------------------------------------------------------------------------
# algebra


def _common_owner(a: DiscreteMeasure, b: DiscreteMeasure):
    if a.owner is None and b.owner is None:
        return None
    if a.owner is None or b.owner is None or not a.owner.same_root(b.owner):
        raise MeasureError("measures have different owners")
    return a.owner


def _rebase(m: DiscreteMeasure, den: int) -> list:
    f = den // m.den
    if f == 1:
        return list(m.keys)
    if m.owner is None:
        return [k * f for k in m.keys]
    return [tuple(c * f for c in k) for k in m.keys]


_LIMB = 20


def _limbs(ks, ws, k0, n_limbs) -> np.ndarray:
    """Rows of base-2^20 digits of the dense weight vector."""
    out = np.zeros((n_limbs, ks[-1] - k0 + 1), dtype=np.int64)
    idx = np.asarray(ks, dtype=np.int64) - k0
    mask = (1 << _LIMB) - 1
    for i in range(n_limbs):
        shift = _LIMB * i
        out[i, idx] = [(w >> shift) & mask for w in ws]
    return out


def _convolve_dense(ka, wa, kb, wb) -> tuple:
    """Exact dense convolution; big weights are split into 20-bit limbs."""
    lo = ka[0] + kb[0]
    if max(wa) * max(wb) * min(len(ka), len(kb)) < 1 << 62:
        a = np.zeros(ka[-1] - ka[0] + 1, dtype=np.int64)
        b = np.zeros(kb[-1] - kb[0] + 1, dtype=np.int64)
        a[np.array(ka) - ka[0]] = wa
        b[np.array(kb) - kb[0]] = wb
        c = np.convolve(a, b)
        nz = np.flatnonzero(c)
        return [int(i) + lo for i in nz], [int(v) for v in c[nz]]
    na = -(-max(wa).bit_length() // _LIMB)
    nb = -(-max(wb).bit_length() // _LIMB)
    A = _limbs(ka, wa, ka[0], na)
    B = _limbs(kb, wb, kb[0], nb)
    # each limb product is below 2^40; callers keep lengths under 2^22
    width = A.shape[1] + B.shape[1] - 1
    total = np.zeros(width, dtype=object)
    for s in range(na + nb - 1):
        part = np.zeros(width, dtype=object)
        for i in range(max(0, s - nb + 1), min(na, s + 1)):
            part += np.convolve(A[i], B[s - i]).astype(object)
        total += part * (1 << (_LIMB * s))
    nz = np.flatnonzero(total)
    return [int(i) + lo for i in nz], [int(v) for v in total[nz]]


def convolve(a: DiscreteMeasure, b: DiscreteMeasure) -> DiscreteMeasure:
    """Law of X + Y for independent X ~ a, Y ~ b, with exact merging of equal sums."""
    owner = _common_owner(a, b)
    den = _lcm(a.den, b.den)
    ka, kb = _rebase(a, den), _rebase(b, den)
    wden = a.wden * b.wden
    if not ka or not kb:
        return DiscreteMeasure([], [], 1, 1, owner)
    if owner is None:
        span = (ka[-1] - ka[0]) + (kb[-1] - kb[0])
        if len(ka) * len(kb) > 4096 and span < 8 * len(ka) * len(kb) and span < 1 << 22:
            keys, weights = _convolve_dense(ka, list(a.weights), kb, list(b.weights))
            return DiscreteMeasure(keys, weights, den, wden, None, _sorted=True)
        acc: dict = {}
        for x, w in zip(ka, a.weights):
            for y, v in zip(kb, b.weights):
                s = x + y
                acc[s] = acc.get(s, 0) + w * v
        return DiscreteMeasure(list(acc), list(acc.values()), den, wden, None)
    acc = {}
    for x, w in zip(ka, a.weights):
        for y, v in zip(kb, b.weights):
            s = tuple(p + q for p, q in zip(x, y))
            acc[s] = acc.get(s, 0) + w * v
    return DiscreteMeasure(list(acc), list(acc.values()), den, wden, owner)


def add(*measures: DiscreteMeasure) -> DiscreteMeasure:
    """Sum of measures (total mass must stay at most 1)."""
    if not measures:
        raise MeasureError("nothing to add")
    owner = measures[0].owner
    for m in measures[1:]:
        _common_owner(measures[0], m)
    den = 1
    wden = 1
    for m in measures:
        den = _lcm(den, m.den)
        wden = _lcm(wden, m.wden)
    keys, weights = [], []
    for m in measures:
        keys += _rebase(m, den)
        f = wden // m.wden
        weights += [w * f for w in m.weights]
    return DiscreteMeasure(keys, weights, den, wden, owner)


def scale_mass(m: DiscreteMeasure, c) -> DiscreteMeasure:
    """The measure c * m for a rational c > 0."""
    c = Fraction(c)
    if c <= 0:
        raise MeasureError("mass factor must be positive")
    return m._with(list(m.keys), [w * c.numerator for w in m.weights], wden=m.wden * c.denominator, _sorted=True)


def normalize(m: DiscreteMeasure) -> DiscreteMeasure:
    t = m.total_weight()
    if t == 0:
        raise MeasureError("cannot normalise the zero measure")
    return m._with(list(m.keys), list(m.weights), wden=t, _sorted=True)


def subtract(a: DiscreteMeasure, b: DiscreteMeasure) -> DiscreteMeasure:
    """a - b, which must be a non-negative measure."""
    owner = _common_owner(a, b)
    den = _lcm(a.den, b.den)
    wden = _lcm(a.wden, b.wden)
    acc: dict = {}
    for k, w in zip(_rebase(a, den), a.weights):
        acc[k] = acc.get(k, 0) + w * (wden // a.wden)
    for k, w in zip(_rebase(b, den), b.weights):
        acc[k] = acc.get(k, 0) - w * (wden // b.wden)
    if any(v < 0 for v in acc.values()):
        raise MeasureError("difference is not a non-negative measure")
    items = [(k, v) for k, v in acc.items() if v]
    return DiscreteMeasure([k for k, _ in items], [v for _, v in items], den, wden, owner)


def restrict(m: DiscreteMeasure, J: Interval) -> DiscreteMeasure:
    """m restricted to J, without renormalising."""
    keep = []
    for i in range(len(m)):
        c_lo = compare_to_rational(m, i, J.lo) if J.lo is not None else 1
        c_hi = compare_to_rational(m, i, J.hi) if J.hi is not None else -1
        if J.contains_sign(c_lo, c_hi):
            keep.append(i)
    return m._with([m.keys[i] for i in keep], [m.weights[i] for i in keep], _sorted=True)


def affine(m: DiscreteMeasure, scale, shift=0) -> DiscreteMeasure:
    """Push-forward under x -> scale * x + shift."""
    scale = Fraction(scale)
    shift = Fraction(shift)
    if scale == 0:
        raise MeasureError("scale must be nonzero")
    den = m.den * scale.denominator * shift.denominator
    a = scale.numerator * shift.denominator
    b = shift.numerator * m.den * scale.denominator
    if m.owner is None:
        keys = [k * a + b for k in m.keys]
        if scale < 0:
            keys.reverse()
            return m._with(keys, list(reversed(m.weights)), den=den, _sorted=True)
        return m._with(keys, list(m.weights), den=den, _sorted=True)
    keys = [tuple([k[0] * a + b] + [c * a for c in k[1:]]) for k in m.keys]
    weights = list(m.weights)
    if scale < 0:
        keys.reverse()
        weights.reverse()
    return m._with(keys, weights, den=den, _sorted=True)


def min_gap(m: DiscreteMeasure, bits: int = 64) -> tuple:
    """Enclosure (lo, hi) of the smallest distance between consecutive atoms."""
    if len(m) < 2:
        raise MeasureError("need at least two atoms")
    if m.owner is None:
        g = min(b - a for a, b in zip(m.keys, m.keys[1:]))
        q = Fraction(g, m.den)
        return q, q
    diffs = [tuple(q - p for p, q in zip(a, b)) for a, b in zip(m.keys, m.keys[1:])]
    encs = [vector_enclosure(v, m.owner, m.den, bits) for v in diffs]
    return min(e[0] for e in encs), min(e[1] for e in encs)


def diameter(m: DiscreteMeasure, bits: int = 64) -> tuple:
    if len(m) < 2:
        return Fraction(0), Fraction(0)
    if m.owner is None:
        q = Fraction(m.keys[-1] - m.keys[0], m.den)
        return q, q
    v = tuple(q - p for p, q in zip(m.keys[0], m.keys[-1]))
    return vector_enclosure(v, m.owner, m.den, bits)


# ---------------------------------------------------------------------------
# Bernoulli convolution level measures


@dataclass(frozen=True)
class LamPow:
    """The symbolic endpoint coef * lam^exponent."""

    exponent: int
    coef: Fraction = Fraction(1)


def _lam_power_sign(lam: AlgebraicNumber, n: int, end) -> int:
    """Sign of lam^n - end, with end rational or LamPow."""
    if isinstance(end, LamPow):
        coef = Fraction(end.coef)
        m = n - end.exponent
        if coef == 1 and m != 0 and lam.exact is None:
            # 0 < lam < 1 is decreasing in the exponent
            return -1 if m > 0 else 1
        if m >= 0:
            return _sign_power_minus(lam, m, coef)
        return _sign_inverse_power_minus(lam, -m, coef)
    return _sign_power_minus(lam, n, Fraction(end))


def _sign_power_minus(lam: AlgebraicNumber, n: int, q: Fraction) -> int:
    """Sign of lam^n - q."""
    if lam.exact is not None:
        v = lam.exact**n
        return (v > q) - (v < q)
    vec = power_vectors(lam.minpoly, n + 1)[n]
    if all(c == 0 for c in vec[1:]):
        v = vec[0]
        return (v > q) - (v < q)
    keys, den = _split_vectors([vec])
    bits = 64
    while True:
        lo, hi = vector_enclosure(keys[0], lam, den, bits)
        if lo > q:
            return 1
        if hi < q:
            return -1
        bits *= 2


def _sign_inverse_power_minus(lam, n, q) -> int:
    """Sign of lam^(-n) - q for lam > 0."""
    if q <= 0:
        return 1
    return -_sign_power_minus(lam, n, 1 / q)


def level_indices(lam: AlgebraicNumber, I: tuple, config: Config = DEFAULT) -> list:
    """The indices n >= 0 with lam^n in I = (lo, hi, lo_closed, hi_closed)."""
    lam = as_owner(lam)
    lo, hi, lo_closed, hi_closed = I
    if not 0 < float(lam) < 1:
        raise MeasureError("level measures need 0 < lam < 1")
    lo_val = _endpoint_float(lam, lo)
    if lo_val <= 0:
        raise MeasureError("interval must stay away from 0 for a finite index set")
    # lam^n >= lo_val fails once n exceeds this, with a safety margin
    n_stop = int(math.log(lo_val) / math.log(float(lam))) + 3
    out = []
    for n in range(max(n_stop, 0) + 1):
        s_lo = _lam_power_sign(lam, n, lo)
        s_hi = _lam_power_sign(lam, n, hi)
        if (s_lo > 0 or (s_lo == 0 and lo_closed)) and (s_hi < 0 or (s_hi == 0 and hi_closed)):
            out.append(n)
    return out


def _endpoint_float(lam, end) -> float:
    if isinstance(end, LamPow):
        return float(end.coef) * float(lam) ** end.exponent
    return float(end)


def as_owner(lam) -> AlgebraicNumber:
    if isinstance(lam, AlgebraicNumber):
        return lam
    return AlgebraicNumber.rational(Fraction(lam))


def level_measure(lam, p, I=None, config: Config = DEFAULT, indices=None) -> DiscreteMeasure:
    """Law of sum_{n: lam^n in I} xi_n lam^n, P(xi = 1) = p.

    ``I`` is (lo, hi, lo_closed, hi_closed) with rational or LamPow ends;
    the default is (lam, 1].  ``indices`` may be given directly instead.
    """
    lam = as_owner(lam)
    p = Fraction(p)
    if not 0 < p < 1:
        raise MeasureError("p must lie in (0, 1)")
    if indices is None:
        if I is None:
            I = (LamPow(1), Fraction(1), False, True)
        indices = level_indices(lam, I, config)
    indices = sorted(set(indices))
    if len(indices) > config.enumeration_bound:
        raise EnumerationBoundExceeded(f"{len(indices)} indices exceed the bound {config.enumeration_bound}")
    up, down = p.numerator, p.denominator - p.numerator
    wden = p.denominator ** len(indices)
    if not indices:
        return dirac(0)
    q = lam.exact
    if q is not None:
        top = max(indices)
        a, b = q.numerator, q.denominator
        steps = [a**n * b ** (top - n) for n in indices]
        den = b**top
        keys = {0: 1}
        for s in steps:
            nxt: dict = {}
            for k, w in keys.items():
                nxt[k + s] = nxt.get(k + s, 0) + w * up
                nxt[k - s] = nxt.get(k - s, 0) + w * down
            keys = nxt
        return DiscreteMeasure(list(keys), list(keys.values()), den, wden, None)
    vecs = power_vectors(lam.minpoly, max(indices) + 1)
    steps, den = _split_vectors([vecs[n] for n in indices])
    d = lam.degree
    keys = {(0,) * d: 1}
    for s in steps:
        nxt = {}
        for k, w in keys.items():
            plus = tuple(x + y for x, y in zip(k, s))
            minus = tuple(x - y for x, y in zip(k, s))
            nxt[plus] = nxt.get(plus, 0) + w * up
            nxt[minus] = nxt.get(minus, 0) + w * down
        keys = nxt
    return DiscreteMeasure(list(keys), list(keys.values()), den, wden, lam)


def level_measure_top(lam, p, l: int, config: Config = DEFAULT) -> DiscreteMeasure:
    """The measure on (lam^l, 1], i.e. indices 0..l-1."""
    return level_measure(lam, p, indices=range(l), config=config)


def iter_level_measures(lam, p, l_max: int, config: Config = DEFAULT):
    """Yield (l, level_measure_top(lam, p, l)) for l = 1..l_max in one pass."""
    lam = as_owner(lam)
    p = Fraction(p)
    if not 0 < p < 1:
        raise MeasureError("p must lie in (0, 1)")
    if l_max > config.enumeration_bound:
        raise EnumerationBoundExceeded(f"{l_max} levels exceed the bound {config.enumeration_bound}")
    if l_max < 1:
        return
    up, down = p.numerator, p.denominator - p.numerator
    q = lam.exact
    if q is not None:
        a, b = q.numerator, q.denominator
        top = l_max - 1
        steps = [a**n * b ** (top - n) for n in range(l_max)]
        den, owner, zero = b**top, None, 0
        add = lambda k, s: k + s  # noqa: E731
        sub = lambda k, s: k - s  # noqa: E731
    else:
        vecs = power_vectors(lam.minpoly, l_max)
        steps, den = _split_vectors(vecs[:l_max])
        owner, zero = lam, (0,) * lam.degree
        add = lambda k, s: tuple(x + y for x, y in zip(k, s))  # noqa: E731
        sub = lambda k, s: tuple(x - y for x, y in zip(k, s))  # noqa: E731
    keys = {zero: 1}
    for l, s in enumerate(steps, start=1):
        nxt: dict = {}
        for k, w in keys.items():
            kp, km = add(k, s), sub(k, s)
            nxt[kp] = nxt.get(kp, 0) + w * up
            nxt[km] = nxt.get(km, 0) + w * down
        keys = nxt
        yield l, DiscreteMeasure(list(keys), list(keys.values()), den, p.denominator**l, owner)


# ---------------------------------------------------------------------------
# random instances


def random_measure(seed: int, n_atoms: int, span=1, mass_profile: str = "uniform", denominator: int = 1 << 16) -> DiscreteMeasure:
    """Deterministic random measure with rational positions in [0, span].

    Positions are distinct multiples of span / denominator; masses are
    exact rationals summing to 1.  Profiles: uniform, dirichlet, geometric.
    """
    if n_atoms < 1:
        raise MeasureError("n_atoms must be positive")
    rng = np.random.default_rng(seed)
    span = Fraction(span)
    grid = max(denominator, n_atoms)
    slots = rng.choice(grid + 1, size=n_atoms, replace=False) if n_atoms > 1 else np.array([int(rng.integers(grid + 1))])
    positions = [span * int(s) / grid for s in slots]
    weights = _integer_weights(rng, n_atoms, mass_profile)
    return from_atoms(zip(positions, [Fraction(w, sum(weights)) for w in weights]))


def _integer_weights(rng, n: int, profile: str, resolution: int = 1 << 20) -> list:
    if profile == "uniform":
        return [1] * n
    if profile == "dirichlet":
        g = rng.gamma(1.0, size=n)
    elif profile == "sparse_dirichlet":
        g = rng.gamma(0.2, size=n)
    elif profile == "geometric":
        g = 0.7 ** np.arange(n)
        rng.shuffle(g)
    else:
        raise MeasureError(f"unknown mass profile {profile!r}")
    g = g / g.sum()
    return [max(1, int(round(x * resolution))) for x in g]


def random_integer_measure(rng, N: int, n_atoms: int | None = None, profile: str = "dirichlet", lo: int = 1) -> DiscreteMeasure:
    """Random measure on [lo, lo + N - 1] cap Z drawn from an existing Generator."""
    n_atoms = N if n_atoms is None else min(n_atoms, N)
    support = np.sort(rng.choice(N, size=n_atoms, replace=False)) + lo
    weights = _integer_weights(rng, n_atoms, profile)
    return DiscreteMeasure([int(s) for s in support], weights, 1, sum(weights), None, _sorted=True)


def near_uniform_measure(rng, N: int, eps: float, lo: int = 1, resolution: int = 1 << 16) -> DiscreteMeasure:
    """Probability measure on [lo, lo + N - 1] with masses (1 + e_n) / N, |e_n| <= eps.

    The perturbations are rounded to multiples of 1 / resolution before
    normalising, so masses are exact rationals.
    """
    if not 0 <= eps < 1:
        raise MeasureError("eps must lie in [0, 1)")
    e = rng.uniform(-eps, eps, size=N)
    weights = [max(1, int(round((1 + x) * resolution))) for x in e]
    return DiscreteMeasure(list(range(lo, lo + N)), weights, 1, sum(weights), None, _sorted=True)


# ---------------------------------------------------------------------------
# JSON


def to_json(m: DiscreteMeasure) -> dict:
    owner = None if m.owner is None else {"poly": m.owner.minpoly.to_list(), "lo": frac_str(m.owner.lo), "hi": frac_str(m.owner.hi)}
    atoms = []
    for pos, mass in m.atoms():
        if isinstance(pos, AlgebraicPos):
            if all(c.denominator == 1 for c in pos.coeffs):
                p = [int(c) for c in pos.coeffs]
            else:
                p = [frac_str(c) for c in pos.coeffs]
        else:
            p = frac_str(pos)
        atoms.append({"pos": p, "mass": frac_str(mass)})
    return {"owner": owner, "atoms": atoms}


def from_json(doc) -> DiscreteMeasure:
    if isinstance(doc, str):
        doc = json.loads(doc)
    try:
        owner_doc = doc.get("owner")
        owner = None
        if owner_doc is not None:
            if isinstance(owner_doc, dict):
                poly = as_polynomial(owner_doc["poly"])
                owner = real_root(poly, Fraction(owner_doc["lo"]), Fraction(owner_doc["hi"]))
            else:
                poly = as_polynomial(owner_doc)
                owner = real_root(poly, Fraction(0), Fraction(1))
        atoms = []
        for a in doc["atoms"]:
            p = a["pos"]
            pos = [Fraction(c) for c in p] if isinstance(p, list) else Fraction(p)
            atoms.append((pos, Fraction(a["mass"])))
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise MeasureError(f"malformed measure document: {exc}") from exc
    return from_atoms(atoms, owner)


def dump(m: DiscreteMeasure, path) -> None:
    with open(path, "w") as fh:
        json.dump(to_json(m), fh, indent=1)


def load(path) -> DiscreteMeasure:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MeasureError(f"not JSON: {exc}") from exc
    return from_json(doc)
