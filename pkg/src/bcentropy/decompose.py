"""Constructive decompositions of discrete measures.

* ``l2_l1_split`` cuts a measure on [1, N] into a part close to uniform in L2
  and a remainder of small total mass.
* ``bernoulli_extract`` peels off equal-mass pairs of atoms whose distance
  lies in [r/2, 2r] until no such pair is left.
* ``support_clusters`` groups atoms into well separated short runs, the
  setting in which H(mu; r/2 | r) = 2 H(mu; r | 2r).

All mass bookkeeping is exact; only entropies are floating point.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache

from . import measure as ms
from .entropy import EntropyValue, cond_entropy, scale_entropy, shannon
from .measure import DiscreteMeasure, MeasureError
from .report import TOLERANCE, VerificationReport, digest, leq


def _require_integer_support(m: DiscreteMeasure, N: int) -> None:
    if not m.is_integer_supported():
        raise MeasureError("measure must be supported on the integers")
    if m.keys and (m.keys[0] < 1 or m.keys[-1] > N):
        raise MeasureError(f"support must lie in [1, {N}]")


def _require_probability(m: DiscreteMeasure) -> None:
    if m.total_mass() != 1:
        raise MeasureError("a probability measure is required")


def l2_dist_sq_to_uniform(m: DiscreteMeasure, N: int) -> Fraction:
    """Exact squared L2 distance between the mass function of m and chi_N.

    chi_N is the normalised counting measure on [1, N]; m must live there.
    """
    _require_integer_support(m, N)
    inv = Fraction(1, N)
    total = sum((q - inv) ** 2 for q in m.masses())
    return total + (N - len(m)) * inv * inv


def l1_norm(m: DiscreteMeasure) -> Fraction:
    return m.total_mass()


def linf_norm(m: DiscreteMeasure) -> Fraction:
    return Fraction(max(m.weights), m.wden) if len(m) else Fraction(0)


@dataclass
class L2L1Split:
    f: DiscreteMeasure
    g: DiscreteMeasure
    N: int
    f_dist_sq: Fraction
    entropy_deficit: EntropyValue
    checks: dict = field(default_factory=dict)

    def reconstitutes(self, m: DiscreteMeasure) -> bool:
        if not len(self.g):
            return self.f == m
        if not len(self.f):
            return self.g == m
        return ms.add(self.f, self.g) == m


def _nonzero_measure(items: list, wden: int) -> DiscreteMeasure:
    items = [(k, w) for k, w in items if w]
    return DiscreteMeasure([k for k, _ in items], [w for _, w in items], 1, wden, None, _sorted=True)


def l2_l1_split(m: DiscreteMeasure, N: int) -> L2L1Split:
    """Split m = f + g with f capped at 2/N (atoms above the cap become 1/N)."""
    _require_integer_support(m, N)
    _require_probability(m)
    wden = m.wden * N
    cap = 2 * m.wden  # 2/N in units of 1/wden
    f_items, g_items = [], []
    for k, w in zip(m.keys, m.weights):
        w = w * N
        if w <= cap:
            f_items.append((k, w))
            g_items.append((k, 0))
        else:
            f_items.append((k, m.wden))
            g_items.append((k, w - m.wden))
    f = _nonzero_measure(f_items, wden)
    g = _nonzero_measure(g_items, wden)
    # zero atoms inside [1, N] still contribute (0 - 1/N)^2
    dist = l2_dist_sq_to_uniform(f, N)
    deficit = EntropyValue(math.log2(N)) - shannon(m)
    tol = deficit.abs_error + TOLERANCE
    checks = {
        "f_dist_sq": float(dist) <= 2 * deficit.value / N + tol,
        "f_sup": linf_norm(f) <= Fraction(2, N),
        "f_mass": l1_norm(f) <= 1,
        "g_mass": float(l1_norm(g)) <= 2 * deficit.value + tol,
    }
    if not all(checks.values()):
        failed = [k for k, ok in checks.items() if not ok]
        raise AssertionError(f"L2/L1 split bounds violated: {failed}")
    return L2L1Split(f, g, N, dist, deficit, checks)


def l2_entropy_bound(m: DiscreteMeasure, M: int) -> VerificationReport:
    """log M - H(m) against 2 M ||m - chi_M||_2^2."""
    _require_integer_support(m, M)
    _require_probability(m)
    lhs = EntropyValue(math.log2(M)) - shannon(m)
    rhs = 2 * M * l2_dist_sq_to_uniform(m, M)
    return leq("l2-entropy", digest(ms.to_json(m)), lhs, float(rhs), M=M)


# ---------------------------------------------------------------------------
# Bernoulli pair extraction


@dataclass(frozen=True)
class BernoulliPair:
    center: Fraction
    distance: Fraction
    mass: Fraction

    def as_measure(self) -> DiscreteMeasure:
        return ms.bernoulli_pair(self.center, self.distance, self.mass)

    def to_json(self) -> dict:
        return {"center": str(self.center), "distance": str(self.distance), "mass": str(self.mass)}


@dataclass
class BernoulliDecomposition:
    residual: DiscreteMeasure | None
    pairs: list
    band: tuple
    extracted_mass: Fraction
    mass_bound: float | None = None
    hypothesis_satisfied: bool = False

    def reconstruct(self) -> DiscreteMeasure:
        parts = [p.as_measure() for p in self.pairs]
        if self.residual is not None and len(self.residual):
            parts.append(self.residual)
        return ms.add(*parts)

    def to_json(self) -> dict:
        return {
            "residual": ms.to_json(self.residual) if self.residual is not None else None,
            "pairs": [p.to_json() for p in self.pairs],
            "band": [str(self.band[0]), str(self.band[1])],
            "extracted_mass": str(self.extracted_mass),
        }


def _in_band(d: Fraction, lo: Fraction, hi: Fraction) -> bool:
    return lo <= d <= hi


def _nearest_in_band(xs: list, lo: Fraction, hi: Fraction):
    """Index pair (i, j) of the closest in-band pair, leftmost on ties."""
    best = None
    for i, x in enumerate(xs):
        j = bisect_left(xs, x + lo, i + 1)
        if j < len(xs) and xs[j] - x <= hi:
            d = xs[j] - x
            if best is None or d < best[0]:
                best = (d, i, j)
    return best


def has_in_band_pair(positions: list, r) -> bool:
    r = Fraction(r)
    xs = sorted(Fraction(x) for x in positions)
    return _nearest_in_band(xs, r / 2, 2 * r) is not None


def bernoulli_mass_bound(h: float) -> float:
    """Lower bound h / (128 (log(1/h) + 1)) on the extractable pair mass."""
    if h <= 0:
        return 0.0
    h = min(h, 1.0)
    return h / (128 * (math.log2(1 / h) + 1))


def bernoulli_extract(m: DiscreteMeasure, r, check_bound: bool = True) -> BernoulliDecomposition:
    """Greedy extraction of Bernoulli pairs at distances in [r/2, 2r].

    At every step the closest in-band pair of surviving atoms (leftmost on
    ties) donates min(mass) from each atom.  The residual has no in-band
    pair, which is all the mass lower bound needs; that bound is asserted
    whenever its hypothesis H(m; r/2 | r) <= 1.5 H(m; r | 2r) holds.
    """
    if not m.is_rational:
        raise MeasureError("pair extraction works on rational positions; use measure.shadow first")
    r = Fraction(r)
    if r <= 0:
        raise MeasureError("scale must be positive")
    lo, hi = r / 2, 2 * r
    xs = m.positions()
    ws = list(m.weights)
    pairs = []
    while True:
        hit = _nearest_in_band(xs, lo, hi)
        if hit is None:
            break
        d, i, j = hit
        w = min(ws[i], ws[j])
        pairs.append(BernoulliPair((xs[i] + xs[j]) / 2, d, Fraction(2 * w, m.wden)))
        ws[i] -= w
        ws[j] -= w
        keep = [k for k in range(len(xs)) if ws[k]]
        xs = [xs[k] for k in keep]
        ws = [ws[k] for k in keep]
    extracted = sum((p.mass for p in pairs), Fraction(0))
    residual = ms.from_atoms([(x, Fraction(w, m.wden)) for x, w in zip(xs, ws)]) if xs else None
    out = BernoulliDecomposition(residual, pairs, (lo, hi), extracted)
    if check_bound and m.total_mass() == 1:
        h = cond_entropy(m, r, 2 * r)
        h_half = cond_entropy(m, r / 2, r)
        out.hypothesis_satisfied = h_half.value <= 1.5 * h.value
        out.mass_bound = bernoulli_mass_bound(h.value)
        if out.hypothesis_satisfied:
            slack = 4 * (h.abs_error + h_half.abs_error) + TOLERANCE
            if float(extracted) < out.mass_bound - slack:
                raise AssertionError(
                    f"extracted mass {float(extracted):.6g} below bound {out.mass_bound:.6g}"
                )
    return out


def exhaustive_extractions(m: DiscreteMeasure, r, max_atoms: int = 12) -> set:
    """All extracted masses reachable by greedy-style moves in any order.

    Each move picks any in-band pair and moves min(mass) from both atoms;
    a run ends when no in-band pair survives.  Intended as an oracle for
    small measures only.
    """
    if len(m) > max_atoms:
        raise MeasureError(f"exhaustive search is limited to {max_atoms} atoms")
    r = Fraction(r)
    lo, hi = r / 2, 2 * r
    xs = m.positions()
    n = len(xs)
    band = [(i, j) for i in range(n) for j in range(i + 1, n) if _in_band(xs[j] - xs[i], lo, hi)]

    @lru_cache(maxsize=None)
    def walk(state: tuple) -> frozenset:
        outs = set()
        for i, j in band:
            if state[i] and state[j]:
                w = min(state[i], state[j])
                nxt = list(state)
                nxt[i] -= w
                nxt[j] -= w
                outs |= {e + 2 * w for e in walk(tuple(nxt))}
        return frozenset(outs) if outs else frozenset([0])

    return {Fraction(e, m.wden) for e in walk(tuple(m.weights))}


# ---------------------------------------------------------------------------
# clustered supports


class ClusterVerdict(Enum):
    REJECT = "REJECT"


REJECT = ClusterVerdict.REJECT


def support_clusters(m: DiscreteMeasure, r0, r1):
    """Maximal runs of atoms with consecutive gaps below r1.

    Returns the runs as closed intervals when each has diameter at most r0,
    and ``REJECT`` otherwise.
    """
    r0, r1 = Fraction(r0), Fraction(r1)
    if r0 <= 0 or r1 < 4 * r0:
        raise ValueError("need r0 > 0 and r1 >= 4 r0")
    if not m.is_rational:
        raise MeasureError("clustering works on rational positions; use measure.shadow first")
    xs = m.positions()
    if not xs:
        return []
    runs = [[xs[0], xs[0]]]
    for x in xs[1:]:
        if x - runs[-1][1] < r1:
            runs[-1][1] = x
        else:
            runs.append([x, x])
    if any(b - a > r0 for a, b in runs):
        return REJECT
    return [(a, b) for a, b in runs]


def doubling_identity_gap(m: DiscreteMeasure, r) -> float:
    """|H(m; r/2 | r) - 2 H(m; r | 2r)|, zero on suitably clustered supports."""
    r = Fraction(r)
    return abs(cond_entropy(m, r / 2, r).value - 2 * cond_entropy(m, r, 2 * r).value)


def component_sandwich(nu: DiscreteMeasure, eta: DiscreteMeasure, r) -> VerificationReport:
    """Check H(nu; r|2r) <= H(mu; r|2r) <= H(nu; r|2r) + 3 |eta| log(1/|eta|) for mu = nu + eta.

    The report carries the tighter of the two margins.
    """
    r = Fraction(r)
    mu = ms.add(nu, eta)
    e = eta.total_mass()
    hypothesis = mu.total_mass() == 1 and 0 < e <= Fraction(1, 2)
    h_mu = cond_entropy(mu, r, 2 * r)
    h_nu = cond_entropy(nu, r, 2 * r)
    upper = h_nu + 3 * float(e) * math.log2(1 / float(e)) if e else h_nu
    lower_margin = (h_mu - h_nu).value
    upper_margin = (upper - h_mu).value
    rep = leq("component-sandwich", digest([ms.to_json(nu), ms.to_json(eta), str(r)]), h_mu, upper, hypothesis)
    rep.margin = min(lower_margin, upper_margin)
    rep.details = {"lower_margin": lower_margin, "upper_margin": upper_margin}
    return rep
