"""Studies of finite-level Bernoulli convolutions.

The level-l measure is the law of sum_{n < l} xi_n lam^n with independent
signs, P(xi = 1) = p.  From it we estimate the Garsia entropy H_l / l,
measure atom separation, and probe the multi-scale entropy profile.
Everything rests on exact atom merging, so collisions caused by algebraic
relations among powers of lam are never missed.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import measure as ms
from .algebraic import AlgebraicNumber, MahlerEnclosure, mahler_measure
from .config import DEFAULT, Config
from .entropy import EntropyProfile, EntropyValue, cond_entropy, pow2, scale_entropy, shannon
from .measure import DiscreteMeasure, MeasureError
from .report import TOLERANCE, VerificationReport, digest, equal, geq


class ScaleWindowError(ValueError):
    """Requested scales fall below the resolution of the finite measure."""


def _lam(lam) -> AlgebraicNumber:
    lam = ms.as_owner(lam)
    if not 0 < float(lam) < 1:
        raise MeasureError("lam must lie in (0, 1)")
    return lam


def _mahler(lam: AlgebraicNumber, config: Config) -> MahlerEnclosure:
    return mahler_measure(lam.minpoly, config=config)


def _log2_enclosure(enc: MahlerEnclosure) -> tuple:
    return math.log2(enc.lo), math.log2(enc.hi)


def _gap(m: DiscreteMeasure) -> tuple:
    """Enclosure of the minimal atom gap, refined until its lower end is positive."""
    bits = 64
    while True:
        lo, hi = ms.min_gap(m, bits)
        if lo > 0 or bits > 4096:
            return lo, hi
        bits *= 2


@dataclass
class LevelStat:
    l: int
    entropy: EntropyValue
    atom_count: int
    min_gap: tuple | None
    diameter: Fraction

    @property
    def ratio(self) -> float:
        return self.entropy.value / self.l


@dataclass
class HLambdaEstimate:
    lam: AlgebraicNumber
    p: Fraction
    levels: list
    mahler: MahlerEnclosure

    def to_json(self) -> dict:
        return {
            "lam": str(float(self.lam)),
            "minpoly": self.lam.minpoly.to_list(),
            "p": f"{self.p.numerator}/{self.p.denominator}",
            "mahler": self.mahler.to_json(),
            "levels": [
                {
                    "l": s.l,
                    "H": s.entropy.value,
                    "H_error": s.entropy.abs_error,
                    "ratio": s.ratio,
                    "atoms": s.atom_count,
                    "min_gap": None if s.min_gap is None else float(s.min_gap[0]),
                }
                for s in self.levels
            ],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["l", "H", "ratio", "atoms", "min_gap"])
        for s in self.levels:
            w.writerow([s.l, repr(s.entropy.value), repr(s.ratio), s.atom_count, "" if s.min_gap is None else repr(float(s.min_gap[0]))])
        return buf.getvalue()


def h_estimate(lam, p, l_max: int, config: Config = DEFAULT, with_gaps: bool = True) -> HLambdaEstimate:
    """Shannon entropy of every level up to l_max, with exact dedup."""
    lam = _lam(lam)
    p = Fraction(p)
    if not 0 < p < 1:
        raise MeasureError("p must lie in (0, 1)")
    levels = []
    for l, m in ms.iter_level_measures(lam, p, l_max, config):
        gap = _gap(m) if with_gaps and len(m) > 1 else None
        levels.append(LevelStat(l, shannon(m), len(m), gap, ms.diameter(m)[1]))
    return HLambdaEstimate(lam, p, levels, _mahler(lam, config))


def h_bounds_check(est: HLambdaEstimate, c0: float = 0.44) -> VerificationReport:
    """Compare H_l / l with c0 min(log M, 1) <= h <= min(log M, 1) at finite l.

    Components, all folded into the margin:

    * lower: ratio at the largest level >= c0 min(log M, 1).  Finite ratios
      dominate the limit, so no slack is needed; only applies for p = 1/2.
    * upper: ratio <= min(1, log M + slack) with slack
      (d log l + log(diameter / c_fit)) / l, where c_fit is the smallest
      observed min_gap * l^d * M^l.  This slack is a heuristic (flagged in
      ``details``), not a proof.
    * trend: H_l nondecreasing, and H_{a+b} <= H_a + H_b for all a + b <= l,
      both of which are exact consequences of independence.
    """
    if len(est.levels) < 3:
        raise ValueError("need at least three levels")
    lm_lo, lm_hi = _log2_enclosure(est.mahler)
    d = est.lam.degree
    top = est.levels[-1]
    ratio = top.ratio
    tol = top.entropy.abs_error / top.l + TOLERANCE
    margins = {}
    lower_applies = est.p == Fraction(1, 2)
    lower = c0 * min(lm_lo, 1.0)
    if lower_applies:
        margins["lower"] = ratio - lower
    gaps = [(s.l, s.min_gap[0]) for s in est.levels if s.min_gap is not None and s.min_gap[0] > 0]
    M_lo = float(est.mahler.lo)
    if gaps:
        c_fit = min(float(g) * l**d * M_lo**l for l, g in gaps)
        slack = (d * math.log2(top.l) + math.log2(max(float(top.diameter), 1e-300) / c_fit)) / top.l
    else:
        c_fit, slack = None, math.inf
    upper = min(1.0, lm_hi + max(slack, 0.0))
    margins["upper"] = upper - ratio
    margins["counting"] = math.log2(top.atom_count) / top.l - ratio
    H = {s.l: s.entropy for s in est.levels}
    trend = math.inf
    for s0, s1 in zip(est.levels, est.levels[1:]):
        trend = min(trend, (s1.entropy - s0.entropy).value + s1.entropy.abs_error + s0.entropy.abs_error)
    for a in H:
        for b in H:
            if a <= b and a + b in H:
                e = H[a] + H[b] - H[a + b]
                trend = min(trend, e.value + e.abs_error)
    margins["trend"] = trend
    rep = geq(
        "h-bounds",
        digest([est.lam.minpoly.to_list(), str(float(est.lam)), str(est.p), len(est.levels)]),
        ratio,
        lower if lower_applies else 0.0,
    )
    rep.margin = min(margins.values()) + tol
    rep.details = {
        "ratio": ratio,
        "log_mahler": [lm_lo, lm_hi],
        "lower_bound": lower if lower_applies else None,
        "upper_bound": upper,
        "slack": slack,
        "c_fit": c_fit,
        "upper_is_heuristic": True,
        "margins": margins,
    }
    return rep


def separation_check(lam, p, l: int, config: Config = DEFAULT, window: float = 0.15, from_level: int = 15) -> VerificationReport:
    """Separation rate -log(min_gap) / l against log M.

    The rate must sit within ``window`` of log M once l >= from_level; for
    smaller l the report is informational (vacuous).
    """
    lam = _lam(lam)
    m = ms.level_measure_top(lam, p, l, config)
    if len(m) < 2:
        raise MeasureError("a single atom has no gap")
    lo, hi = _gap(m)
    if lo <= 0:
        raise AssertionError("distinct atoms must have a positive gap")
    rate = -math.log2(float(lo)) / l
    lm_lo, lm_hi = _log2_enclosure(_mahler(lam, config))
    d = lam.degree
    rep = geq("separation", digest([lam.minpoly.to_list(), str(float(lam)), str(p), l]), rate, lm_lo, l >= from_level)
    rep.margin = window - max(rate - lm_hi, lm_lo - rate, 0.0)
    rep.details = {
        "min_gap": [float(lo), float(hi)],
        "rate": rate,
        "log_mahler": [lm_lo, lm_hi],
        "garsia_rate": lm_hi + d * math.log2(l) / l,
        "atoms": len(m),
    }
    return rep


def full_entropy_scale_check(lam, p, l: int, alpha, config: Config = DEFAULT) -> VerificationReport:
    """H(mu; alpha^l) = H(mu) for the level-l measure whenever min_gap >= alpha^l."""
    lam = _lam(lam)
    alpha = Fraction(alpha)
    enc = _mahler(lam, config)
    if not (0 < alpha and alpha * enc.hi < 1):
        raise ValueError("alpha must satisfy 0 < alpha < 1 / M")
    m = ms.level_measure_top(lam, p, l, config)
    s = alpha**l
    if len(m) > 1:
        lo, hi = _gap(m)
    else:
        lo = hi = Fraction(0)
    hyp = len(m) > 1 and lo >= s
    lhs = scale_entropy(m, s, config)
    rhs = shannon(m)
    rep = equal("full-entropy-scale", digest([lam.minpoly.to_list(), str(float(lam)), str(p), l, str(alpha)]), lhs, rhs, hyp or len(m) == 1)
    rep.details = {"gap_margin": float(lo - s), "scale": float(s), "min_gap": float(lo)}
    return rep


def _indices_in(lam, I, L: int, config: Config) -> set:
    if isinstance(I, ms.Interval):
        I = (I.lo, I.hi, I.lo_closed, I.hi_closed)
    return {n for n in ms.level_indices(lam, I, config) if n < L}


def factorization_check(lam, p, intervals, L: int, config: Config = DEFAULT) -> VerificationReport:
    """Level-L measure equals the convolution of its pieces over a partition.

    ``intervals`` are (lo, hi, lo_closed, hi_closed) tuples; the indices of
    (lam^L, 1] not covered by any of them form the complementary factor.
    """
    lam = _lam(lam)
    pieces = [_indices_in(lam, I, L, config) for I in intervals]
    for i in range(len(pieces)):
        for j in range(i + 1, len(pieces)):
            if pieces[i] & pieces[j]:
                raise ValueError(f"intervals {i} and {j} overlap")
    rest = set(range(L)).difference(*pieces) if pieces else set(range(L))
    whole = ms.level_measure(lam, p, indices=range(L), config=config)
    parts = [ms.level_measure(lam, p, indices=sorted(s), config=config) for s in pieces + [rest] if s]
    prod = parts[0] if parts else ms.dirac(0)
    for q in parts[1:]:
        prod = ms.convolve(prod, q)
    same = prod == whole
    rep = equal("factorization", digest([lam.minpoly.to_list(), str(p), [sorted(s) for s in pieces], L]), len(whole), len(prod))
    rep.margin = 0.0 if same else -1.0
    rep.details = {"pieces": [sorted(s) for s in pieces], "complement": sorted(rest), "atoms": len(whole)}
    return rep


@dataclass
class DecayProfile:
    profile: EntropyProfile
    fit_constant: float
    fit_residual: float
    dim_estimate: float
    min_gap: float | None
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "n": [-s for s in self.profile.grid],
            "values": list(self.profile.values),
            "abs_error": self.profile.abs_error,
            "fit_constant": self.fit_constant,
            "fit_residual": self.fit_residual,
            "dim_estimate": self.dim_estimate,
            "min_gap": self.min_gap,
        }


def decay_profile(lam, p, L: int, n_max: int, n_min: int = 1, config: Config = DEFAULT) -> DecayProfile:
    """H(mu_L; 2^-n | 2^-n+1) for n_min <= n <= n_max, with a C n^-2 fit.

    Scales must stay well above the atom spacing: 2^-n_max >= 8 min_gap.
    """
    lam = _lam(lam)
    if n_min < 1 or n_max < n_min:
        raise ValueError("need 1 <= n_min <= n_max")
    m = ms.level_measure_top(lam, p, L, config) if L > 0 else ms.dirac(0)
    gap = None
    if len(m) > 1:
        lo, hi = _gap(m)
        gap = float(hi)
        if Fraction(1, 1 << n_max) < 8 * hi:
            raise ScaleWindowError(f"2^-{n_max} is below 8 x min_gap = {8 * float(hi):.3g}")
    ns = list(range(n_min, n_max + 1))
    values, err = [], 0.0
    for n in ns:
        c = cond_entropy(m, pow2(-n), pow2(-n + 1), config)
        values.append(c.value)
        err = max(err, c.abs_error)
    profile = EntropyProfile([-n for n in ns], values, err)
    xs = [n**-2 for n in ns]
    ys = [1 - v for v in values]
    sxx = math.fsum(x * x for x in xs)
    C = math.fsum(x * y for x, y in zip(xs, ys)) / sxx
    resid = math.sqrt(math.fsum((y - C * x) ** 2 for x, y in zip(xs, ys)) / len(xs))
    h_est = shannon(m).value / L if L > 0 else 0.0
    dim = min(-h_est / math.log2(float(lam)), 1.0)
    return DecayProfile(profile, C, resid, dim, gap, {"h_estimate": h_est, "L": L})
