"""Executable catalogue of entropy inequalities.

Each rule turns one inequality into a check on concrete measures: a
hypothesis test, a left and a right side, and a margin that is non-negative
when the inequality holds.  Rules whose hypothesis fails (or cannot be
certified) pass vacuously.  ``run_suite`` draws hypothesis-targeted random
instances, and ``tightness_scan`` reports the instances with least slack.

Rule ids:

===== ============================================================
R1    convolution does not lower entropy between scales of integer ratio
R2    scale entropy is monotone and 2-Lipschitz in log r
R3    small perturbations barely move entropy at a larger scale
R4    convolution lowers entropy between fractional scales only slightly
R5    superadditivity of conditional entropy over sums of measures
R6    submodularity H(X+Y+Z) + H(Y) <= H(X+Y) + H(Y+Z), discrete form
R7    high-entropy convolution theorem, C = 1e8
R8    missing entropy of nu * nu~ on Z, C6 = 6e4, C7 = 4000
R9    same for the restricted convolution, C4 = 4e4, C5 = 3000
R10   low-entropy convolution theorem, c = 1/(1000 log 1/a) and a/(1e7 log 1/a)
R11   convolution with a Bernoulli measure gains (1 - H(mu; t|2t)) / 3
R12   H(mu * nu; t) = H(mu; t) + 1 - H(mu; t|2t) for nu Bernoulli at distance t
R13   |H(X) - H(Y)| <= H(Y - X)
R14   H(X + Y) <= H(X) + H(Y) for independent discrete X, Y
R15   L2 convolution bound, C1 = 1000
R16   L2 / L1 convolution bound 8N|f - chi|^2 |g| + 6 M log M / N
R17   |f*f~(n) - f*f~(n+m)| <= 3m/N^2 + 2|f - chi| |f~ - chi|
R18   f*f~(n) >= 1/(4N) on [N/2+1, 3N/2] when |f - chi|_2 <= 1/(10 sqrt N)
===== ============================================================
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import measure as ms
from .decompose import l1_norm, l2_dist_sq_to_uniform, l2_l1_split, linf_norm
from .entropy import (
    EntropyValue,
    certified_window_min,
    cond_entropy,
    entropy_profile,
    scale_entropy,
    separated_level_set_count,
    shannon,
    z_block_entropy,
)
from .measure import DiscreteMeasure, Interval, MeasureError
from .report import TOLERANCE, VerificationReport, digest, equal, geq, leq

LN2 = math.log(2)

# constants exactly as footnoted
HIGH_ENTROPY_C = 10**8
HIGH_ENT_Z_C6 = 6 * 10**4
HIGH_ENT_Z_C7 = 4000
RESTRICTED_C4 = 4 * 10**4
RESTRICTED_C5 = 3000
L2_CONV_C1 = 1000


def low_entropy_hypothesis_c(alpha: float) -> float:
    return 1 / (1000 * math.log2(1 / alpha))


def low_entropy_conclusion_c(alpha: float) -> float:
    return alpha / (10**7 * math.log2(1 / alpha))


class UnknownRule(KeyError):
    pass


class MalformedInstance(ValueError):
    pass


# ---------------------------------------------------------------------------
# instances


def _fingerprint(m: DiscreteMeasure) -> list:
    if m.owner is None:
        return [list(m.keys), list(m.weights), m.den, m.wden]
    return [[list(k) for k in m.keys], list(m.weights), m.den, m.wden, m.owner.minpoly.to_list()]


def _encode(v):
    if isinstance(v, Fraction):
        return {"q": f"{v.numerator}/{v.denominator}"}
    if isinstance(v, (list, tuple)):
        return [_encode(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def _decode(v):
    if isinstance(v, dict) and set(v) == {"q"}:
        return Fraction(v["q"])
    if isinstance(v, list):
        return [_decode(x) for x in v]
    return v


@dataclass
class Instance:
    """Named measures plus scalar or list parameters for one rule."""

    measures: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def measure(self, name: str) -> DiscreteMeasure:
        try:
            return self.measures[name]
        except KeyError:
            raise MalformedInstance(f"instance lacks measure {name!r}") from None

    def param(self, name: str):
        try:
            return self.params[name]
        except KeyError:
            raise MalformedInstance(f"instance lacks parameter {name!r}") from None

    def digest(self) -> str:
        return digest({"m": {k: _fingerprint(v) for k, v in sorted(self.measures.items())}, "p": _encode(self.params)})

    def to_json(self) -> dict:
        return {
            "measures": {k: ms.to_json(v) for k, v in self.measures.items()},
            "params": {k: _encode(v) for k, v in self.params.items()},
        }

    @classmethod
    def from_json(cls, doc) -> "Instance":
        if isinstance(doc, str):
            doc = json.loads(doc)
        try:
            measures = {k: ms.from_json(v) for k, v in doc.get("measures", {}).items()}
            params = {k: _decode(v) for k, v in doc.get("params", {}).items()}
        except (AttributeError, MeasureError) as exc:
            raise MalformedInstance(str(exc)) from exc
        return cls(measures, params)


def _q(x) -> Fraction:
    try:
        return Fraction(x)
    except (TypeError, ValueError) as exc:
        raise MalformedInstance(f"not a rational: {x!r}") from exc


def _log2q(q: Fraction) -> float:
    return math.log2(q.numerator) - math.log2(q.denominator)


def _coupling(inst: Instance) -> tuple:
    """Marginals and difference law of a joint distribution given as (x, y, mass) triples."""
    pairs = [(_q(x), _q(y), _q(w)) for x, y, w in inst.param("pairs")]
    X = ms.from_atoms([(x, w) for x, _, w in pairs])
    Y = ms.from_atoms([(y, w) for _, y, w in pairs])
    D = ms.from_atoms([(y - x, w) for x, y, w in pairs])
    return pairs, X, Y, D


# ---------------------------------------------------------------------------
# rule evaluators


def _r1(inst: Instance) -> VerificationReport:
    X, Y = inst.measure("X"), inst.measure("Y")
    r1, r2 = _q(inst.param("r1")), _q(inst.param("r2"))
    ratio = r2 / r1
    hyp = ratio.denominator == 1 and ratio > 1
    lhs = cond_entropy(ms.convolve(X, Y), r1, r2)
    rhs = cond_entropy(X, r1, r2)
    return geq("R1", inst.digest(), lhs, rhs, hyp)


def _r2(inst: Instance) -> VerificationReport:
    X = inst.measure("X")
    r1, r2 = _q(inst.param("r1")), _q(inst.param("r2"))
    hyp = r1 >= r2 > 0
    d = scale_entropy(X, r2) - scale_entropy(X, r1)
    bound = 2 * (_log2q(r1) - _log2q(r2))
    rep = leq("R2", inst.digest(), d, bound, hyp)
    rep.margin = min(d.value, bound - d.value)
    rep.details = {"lower_margin": d.value, "upper_margin": bound - d.value}
    return rep


def _r3(inst: Instance) -> VerificationReport:
    pairs, X, Y, _ = _coupling(inst)
    r1, r2 = _q(inst.param("r1")), _q(inst.param("r2"))
    hyp = 0 < r1 and 2 * r1 <= r2 and all(x <= y <= x + r1 for x, y, _ in pairs)
    lhs = scale_entropy(X, r2) - scale_entropy(Y, r2)
    lhs = EntropyValue(abs(lhs.value), lhs.abs_error)
    rhs = 2 * float(r1 / r2) * math.log2(float(r2 / r1))
    return leq("R3", inst.digest(), lhs, rhs, hyp)


def _r4(inst: Instance) -> VerificationReport:
    mu, nu = inst.measure("mu"), inst.measure("nu")
    r1, r2 = _q(inst.param("r1")), _q(inst.param("r2"))
    hyp = 0 < r2 < r1 and mu.total_mass() == 1 and nu.total_mass() == 1
    lhs = cond_entropy(ms.convolve(mu, nu), r2, r1)
    rhs = cond_entropy(mu, r2, r1) - 2 / (LN2 * float(r1 / r2 - 1)) if hyp else EntropyValue(0.0)
    return geq("R4", inst.digest(), lhs, rhs, hyp)


def _r5(inst: Instance) -> VerificationReport:
    parts = [inst.measures[k] for k in sorted(inst.measures)]
    if not parts:
        raise MalformedInstance("R5 needs at least one measure")
    r, N = _q(inst.param("r")), inst.param("N")
    hyp = isinstance(N, int) and N >= 1 and r > 0
    total = ms.add(*parts)
    lhs = cond_entropy(total, r / N, r)
    rhs = EntropyValue(0.0)
    for p in parts:
        rhs = rhs + cond_entropy(p, r / N, r)
    return geq("R5", inst.digest(), lhs, rhs, hyp, parts=len(parts))


def _r6(inst: Instance) -> VerificationReport:
    X, Y, Z = inst.measure("X"), inst.measure("Y"), inst.measure("Z")
    XY = ms.convolve(X, Y)
    YZ = ms.convolve(Y, Z)
    lhs = shannon(ms.convolve(XY, Z)) + shannon(Y)
    rhs = shannon(XY) + shannon(YZ)
    return leq("R6", inst.digest(), lhs, rhs)


def _r7(inst: Instance) -> VerificationReport:
    mu, mu2 = inst.measure("mu"), inst.measure("mu2")
    alpha, r = _q(inst.param("alpha")), _q(inst.param("r"))
    step = float(inst.params.get("step", Fraction(1, 8)))
    hyp = 0 < alpha < Fraction(1, 2) and r > 0
    a = float(alpha)
    la = math.log2(1 / a)
    lhs = cond_entropy(ms.convolve(mu, mu2), r, 2 * r)
    rhs = 1 - HIGH_ENTROPY_C * la**3 * a * a
    details = {}
    if hyp:
        # the window is open; covering its closure is conservative
        lo, hi = _log2q(r) - 3 * la, _log2q(r) + 3 * la
        b1 = certified_window_min(mu, lo, hi, step)
        b2 = certified_window_min(mu2, lo, hi, step)
        details = {"window": [lo, hi], "certified_min": [b1.lower, b2.lower]}
        hyp = b1.lower >= 1 - a and b2.lower >= 1 - a
    return geq("R7", inst.digest(), lhs, rhs, hyp, **details)


def _int_param(inst: Instance, name: str) -> int:
    v = inst.param(name)
    if isinstance(v, Fraction) and v.denominator == 1:
        v = int(v)
    if not isinstance(v, int):
        raise MalformedInstance(f"{name} must be an integer")
    return v


def _divisibility(N: int, M: int) -> bool:
    return N >= 2 and N % 2 == 0 and M >= 2 and N % M == 0


def _r8(inst: Instance) -> VerificationReport:
    nu, nu2 = inst.measure("nu"), inst.measure("nu2")
    N, M = _int_param(inst, "N"), _int_param(inst, "M")
    hyp = (
        _divisibility(N, M)
        and nu.is_integer_supported()
        and nu2.is_integer_supported()
        and nu.total_mass() == 1
        and nu2.total_mass() == 1
    )
    if not hyp:
        return geq("R8", inst.digest(), 0.0, 0.0, False)
    lm, ln = math.log2(M), math.log2(N)
    lhs = lm - z_block_entropy(ms.convolve(nu, nu2), M)
    miss1 = ln - z_block_entropy(nu, N)
    miss2 = ln - z_block_entropy(nu2, N)
    rhs = HIGH_ENT_Z_C6 * lm * miss1.value * miss2.value + HIGH_ENT_Z_C7 * M * lm / N
    return leq("R8", inst.digest(), lhs, EntropyValue(rhs, HIGH_ENT_Z_C6 * lm * (miss1.abs_error + miss2.abs_error)))


def _on_block(m: DiscreteMeasure, N: int) -> bool:
    return m.is_integer_supported() and (not len(m) or (m.keys[0] >= 1 and m.keys[-1] <= N))


def _middle(m: DiscreteMeasure, N: int) -> DiscreteMeasure:
    return ms.restrict(m, Interval.closed(Fraction(N // 2 + 1), Fraction(3 * N // 2)))


def _missing_on_block(rho: DiscreteMeasure, M: int) -> EntropyValue:
    """|rho| log M - H(rho; 1 | M)."""
    if not len(rho):
        return EntropyValue(0.0)
    return float(rho.total_mass()) * math.log2(M) - z_block_entropy(rho, M)


def _r9(inst: Instance) -> VerificationReport:
    mu, mu2 = inst.measure("mu"), inst.measure("mu2")
    N, M = _int_param(inst, "N"), _int_param(inst, "M")
    hyp = _divisibility(N, M) and _on_block(mu, N) and _on_block(mu2, N) and mu.total_mass() == 1 and mu2.total_mass() == 1
    if not hyp:
        return geq("R9", inst.digest(), 0.0, 0.0, False)
    sigma = _middle(ms.convolve(mu, mu2), N)
    lhs = _missing_on_block(sigma, M)
    lm, ln = math.log2(M), math.log2(N)
    d1 = ln - shannon(mu)
    d2 = ln - shannon(mu2)
    rhs = RESTRICTED_C4 * lm * d1.value * d2.value + RESTRICTED_C5 * M * lm / N
    return leq("R9", inst.digest(), lhs, EntropyValue(rhs, RESTRICTED_C4 * lm * (d1.abs_error + d2.abs_error)))


def _r10(inst: Instance) -> VerificationReport:
    mu, nu = inst.measure("mu"), inst.measure("nu")
    alpha, beta = _q(inst.param("alpha")), _q(inst.param("beta"))
    s2, s1 = _int_param(inst, "sigma2"), _int_param(inst, "sigma1")
    if not (0 < alpha < Fraction(1, 2) and 0 < beta <= Fraction(1, 2) and s2 < s1 < 0):
        return geq("R10", inst.digest(), 0.0, 0.0, False)
    a, b = float(alpha), float(beta)
    width = s1 - s2
    r2, r1 = Fraction(1, 1 << -s2), Fraction(1, 1 << -s1)
    profile = entropy_profile(mu, s2, s1, 0.125)
    lo, hi = separated_level_set_count(profile, a, s2, s1)
    threshold = low_entropy_hypothesis_c(a) * b * width
    nu_entropy = cond_entropy(nu, r2, r1)
    hyp_count = hi < threshold
    hyp_nu = nu_entropy.value - nu_entropy.abs_error > b * width
    lhs = cond_entropy(ms.convolve(mu, nu), r2, r1)
    gain = low_entropy_conclusion_c(a) * b / math.log2(1 / b) * width
    rhs = cond_entropy(mu, r2, r1) + gain - 3
    return geq(
        "R10",
        inst.digest(),
        lhs,
        rhs,
        hyp_count and hyp_nu,
        count=[lo, hi],
        count_threshold=threshold,
        count_straddles=lo < threshold <= hi,
    )


def bernoulli_window(mu: DiscreteMeasure, t) -> tuple:
    """A certified-safe (r2, r1) for the Bernoulli gain rule, or None if 1 - H(mu; t|2t) = 0."""
    t = Fraction(t)
    c = cond_entropy(mu, t, 2 * t)
    d_lo = 1 - c.value - c.abs_error
    if d_lo <= 0:
        return None
    r2 = t * Fraction(math.floor(d_lo / 10 * (1 << 30)), 1 << 30)
    r1 = t * Fraction(math.ceil(144 / d_lo**2 * (1 << 10)), 1 << 10)
    if r2 <= 0:
        return None
    return r2, r1


def _r11(inst: Instance) -> VerificationReport:
    mu = inst.measure("mu")
    t, r1, r2 = _q(inst.param("t")), _q(inst.param("r1")), _q(inst.param("r2"))
    center = _q(inst.params.get("center", 0))
    nu = ms.bernoulli_pair(center, t, 1)
    c = cond_entropy(mu, t, 2 * t)
    d_lo = 1 - c.value - c.abs_error
    hyp = mu.total_mass() == 1 and d_lo > 0 and float(r2) <= t * d_lo / 10 and float(r1) >= 144 * float(t) / d_lo**2
    lhs = cond_entropy(ms.convolve(mu, nu), r2, r1)
    rhs = cond_entropy(mu, r2, r1) + (1 - c.value) / 3
    rhs = EntropyValue(rhs.value, rhs.abs_error + c.abs_error / 3)
    return geq("R11", inst.digest(), lhs, rhs, hyp, deficit=1 - c.value)


def _r12(inst: Instance) -> VerificationReport:
    mu = inst.measure("mu")
    t = _q(inst.param("t"))
    center = _q(inst.params.get("center", 0))
    nu = ms.bernoulli_pair(center, t, 1)
    hyp = mu.total_mass() == 1
    lhs = scale_entropy(ms.convolve(mu, nu), t)
    rhs = scale_entropy(mu, t) + 1 - cond_entropy(mu, t, 2 * t)
    return equal("R12", inst.digest(), lhs, rhs, hyp)


def _r13(inst: Instance) -> VerificationReport:
    _, X, Y, D = _coupling(inst)
    lhs = shannon(X) - shannon(Y)
    lhs = EntropyValue(abs(lhs.value), lhs.abs_error)
    return leq("R13", inst.digest(), lhs, shannon(D), X.total_mass() == 1)


def _r14(inst: Instance) -> VerificationReport:
    X, Y = inst.measure("X"), inst.measure("Y")
    return leq("R14", inst.digest(), shannon(ms.convolve(X, Y)), shannon(X) + shannon(Y))


def _l2_hyp(f: DiscreteMeasure, N: int) -> Fraction | None:
    """|f - chi_N|_2^2 when f lives on [1, N], else None."""
    if not _on_block(f, N):
        return None
    return l2_dist_sq_to_uniform(f, N)


def _r15(inst: Instance) -> VerificationReport:
    f, f2 = inst.measure("f"), inst.measure("f2")
    N, M = _int_param(inst, "N"), _int_param(inst, "M")
    d1, d2 = _l2_hyp(f, N), _l2_hyp(f2, N)
    cap = Fraction(2, N)
    hyp = (
        _divisibility(N, M)
        and d1 is not None
        and d2 is not None
        and linf_norm(f) <= cap
        and linf_norm(f2) <= cap
        and d1 <= Fraction(1, 100 * N)
        and d2 <= Fraction(1, 100 * N)
    )
    if not hyp:
        return geq("R15", inst.digest(), 0.0, 0.0, False)
    rho = _middle(ms.convolve(f, f2), N)
    lhs = _missing_on_block(rho, M)
    rhs = L2_CONV_C1 * (N * N * float(d1 * d2) + M * math.log2(M) / N)
    return leq("R15", inst.digest(), lhs, rhs)


def _r16(inst: Instance) -> VerificationReport:
    f, g = inst.measure("f"), inst.measure("g")
    N, M = _int_param(inst, "N"), _int_param(inst, "M")
    d = _l2_hyp(f, N)
    hyp = (
        _divisibility(N, M)
        and d is not None
        and _on_block(g, N)
        and l1_norm(f) >= Fraction(1, 2)
        and linf_norm(f) <= Fraction(2, N)
        and l1_norm(g) <= 1
    )
    if not hyp:
        return geq("R16", inst.digest(), 0.0, 0.0, False)
    rho = _middle(ms.convolve(f, g), N)
    lhs = _missing_on_block(rho, M)
    rhs = 8 * N * float(d * l1_norm(g)) + 6 * M * math.log2(M) / N
    return leq("R16", inst.digest(), lhs, rhs)


def _dense_convolution(f: DiscreteMeasure, g: DiscreteMeasure, N: int) -> tuple:
    """Integer array c with f*g(n) = c[n - 2] / den for n = 2 .. 2N."""
    a = np.zeros(N, dtype=object)
    b = np.zeros(N, dtype=object)
    for k, w in zip(f.keys, f.weights):
        a[k - 1] = w
    for k, w in zip(g.keys, g.weights):
        b[k - 1] = w
    if len(f) and len(g) and max(f.weights) * max(g.weights) * N < 1 << 62:
        c = np.convolve(a.astype(np.int64), b.astype(np.int64))
    else:
        c = np.convolve(a, b)
    return c, f.wden * g.wden


def _r17(inst: Instance) -> VerificationReport:
    f, f2 = inst.measure("f"), inst.measure("f2")
    N, m = _int_param(inst, "N"), _int_param(inst, "m")
    d1, d2 = _l2_hyp(f, N), _l2_hyp(f2, N)
    cap = Fraction(2, N)
    hyp = d1 is not None and d2 is not None and m >= 0 and linf_norm(f) < cap and linf_norm(f2) < cap
    if not hyp:
        return geq("R17", inst.digest(), 0.0, 0.0, False)
    c, den = _dense_convolution(f, f2, N)
    # pad with zeros so that n + m may leave the support
    padded = np.concatenate([np.zeros(m, dtype=c.dtype), c, np.zeros(m, dtype=c.dtype)])
    diff = int(np.max(np.abs(padded[m:] - padded[:-m]))) if m else 0
    lhs = Fraction(diff, den)
    rhs = 3 * m / N**2 + 2 * math.sqrt(float(d1)) * math.sqrt(float(d2))
    return leq("R17", inst.digest(), float(lhs), rhs, m=m)


def _r18(inst: Instance) -> VerificationReport:
    f, f2 = inst.measure("f"), inst.measure("f2")
    N = _int_param(inst, "N")
    d1, d2 = _l2_hyp(f, N), _l2_hyp(f2, N)
    bound = Fraction(1, 100 * N)
    hyp = N >= 2 and N % 2 == 0 and d1 is not None and d2 is not None and d1 <= bound and d2 <= bound
    if not hyp:
        return geq("R18", inst.digest(), 0.0, 0.0, False)
    c, den = _dense_convolution(f, f2, N)
    # index of n in c is n - 2
    window = c[N // 2 - 1 : 3 * N // 2 - 1]
    lhs = Fraction(int(np.min(window)), den)
    rhs = Fraction(1, 4 * N)
    return geq("R18", inst.digest(), float(lhs), float(rhs), exact_margin=str(lhs - rhs))


# ---------------------------------------------------------------------------
# generators


@dataclass(frozen=True)
class GeneratorConfig:
    """Knobs for the random instance generators."""

    min_log_n: int = 6
    max_log_n: int = 12
    max_atoms: int = 24
    near_uniform_eps: float = 0.15
    high_entropy_log_n: tuple = (9, 11)

    def __post_init__(self):
        if not 1 <= self.min_log_n <= self.max_log_n <= 16:
            raise ValueError("need 1 <= min_log_n <= max_log_n <= 16")
        if self.max_atoms < 2:
            raise ValueError("max_atoms must be at least 2")
        if not 0 <= self.near_uniform_eps < 1:
            raise ValueError("near_uniform_eps must lie in [0, 1)")


DEFAULT_GENERATOR = GeneratorConfig()

_PROFILES = ("uniform", "dirichlet", "sparse_dirichlet", "geometric")


def _seed(rng) -> int:
    return int(rng.integers(1 << 31))


def _small(rng, cfg: GeneratorConfig, span=None, integer=False) -> DiscreteMeasure:
    n = int(rng.integers(1, cfg.max_atoms + 1))
    profile = _PROFILES[int(rng.integers(len(_PROFILES)))]
    if integer:
        span = int(rng.integers(max(2, n), 4 * n + 2))
        return ms.random_integer_measure(rng, span, n, profile, lo=int(rng.integers(-span, span)))
    span = Fraction(int(rng.integers(1, 65)), int(rng.integers(1, 9))) if span is None else span
    return ms.random_measure(_seed(rng), n, span, profile, denominator=int(2 ** rng.integers(3, 10)))


def _scale(rng, lo=-4, hi=4) -> Fraction:
    return Fraction(int(rng.integers(1, 17)), 8) * Fraction(2) ** int(rng.integers(lo, hi + 1))


def _gen_r1(rng, cfg):
    r1 = _scale(rng)
    return Instance({"X": _small(rng, cfg), "Y": _small(rng, cfg)}, {"r1": r1, "r2": r1 * int(rng.integers(2, 9))})


def _gen_r2(rng, cfg):
    a, b = _scale(rng), _scale(rng)
    return Instance({"X": _small(rng, cfg)}, {"r1": max(a, b), "r2": min(a, b)})


def _gen_r3(rng, cfg):
    X = _small(rng, cfg)
    r1 = _scale(rng, -5, 0)
    r2 = r1 * int(rng.integers(2, 40))
    pairs = []
    for x, w in X.atoms():
        off = r1 * Fraction(int(rng.integers(0, 17)), 16)
        pairs.append([x, x + off, w])
    return Instance({}, {"pairs": pairs, "r1": r1, "r2": r2})


def _gen_r4(rng, cfg):
    r2 = _scale(rng)
    r1 = r2 * (1 + Fraction(int(rng.integers(1, 64)), 8))
    return Instance({"mu": _small(rng, cfg), "nu": _small(rng, cfg)}, {"r1": r1, "r2": r2})


def _gen_r5(rng, cfg):
    k = int(rng.integers(2, 5))
    raw = [int(x) for x in rng.integers(1, 100, size=k)]
    total = sum(raw) + int(rng.integers(0, 50))
    parts = {f"m{i}": ms.scale_mass(_small(rng, cfg), Fraction(w, total)) for i, w in enumerate(raw)}
    return Instance(parts, {"r": _scale(rng), "N": int(rng.integers(1, 9))})


def _gen_r6(rng, cfg):
    integer = bool(rng.integers(2))
    return Instance({k: _small(rng, cfg, integer=integer) for k in "XYZ"})


def _gen_r13(rng, cfg):
    n = int(rng.integers(1, cfg.max_atoms + 1))
    w = ms._integer_weights(rng, n, _PROFILES[int(rng.integers(len(_PROFILES)))])
    T = sum(w)
    k = int(rng.integers(2, 8))
    pairs = [[int(rng.integers(-k, k + 1)), int(rng.integers(-k, k + 1)), Fraction(x, T)] for x in w]
    return Instance({}, {"pairs": pairs})


def _gen_r14(rng, cfg):
    integer = bool(rng.integers(2))
    return Instance({"X": _small(rng, cfg, integer=integer), "Y": _small(rng, cfg, integer=integer)})


def _log_n(rng, cfg) -> int:
    return int(rng.integers(cfg.min_log_n, cfg.max_log_n + 1))


def _z_measure(rng, cfg, N: int) -> DiscreteMeasure:
    """Probability measure on [1, N]: near-uniform, Dirichlet, or sparse."""
    kind = int(rng.integers(3))
    if kind == 0:
        return ms.near_uniform_measure(rng, N, float(rng.uniform(0, cfg.near_uniform_eps)))
    if kind == 1:
        return ms.random_integer_measure(rng, N, N, "dirichlet")
    n = int(rng.integers(1, max(2, N // 4)))
    return ms.random_integer_measure(rng, N, n, _PROFILES[int(rng.integers(len(_PROFILES)))])


def _gen_r7(rng, cfg):
    lo, hi = cfg.high_entropy_log_n
    N = 1 << int(rng.integers(lo, hi + 1))
    eps = float(rng.uniform(0, cfg.near_uniform_eps))
    alpha = Fraction(int(rng.integers(40, 49)), 100)
    r = Fraction(1 << int(rng.integers(3, 5)))
    return Instance(
        {"mu": ms.near_uniform_measure(rng, N, eps), "mu2": ms.near_uniform_measure(rng, N, eps)},
        {"alpha": alpha, "r": r, "step": Fraction(1, 8)},
    )


def _gen_r8(rng, cfg):
    a = _log_n(rng, cfg)
    N = 1 << a
    M = 1 << int(rng.integers(1, a + 1))
    nu = ms.affine(_z_measure(rng, cfg, N), 1, int(rng.integers(-N, N)))
    nu2 = ms.affine(_z_measure(rng, cfg, N), 1, int(rng.integers(-N, N)))
    return Instance({"nu": nu, "nu2": nu2}, {"N": N, "M": M})


def _gen_r9(rng, cfg):
    a = _log_n(rng, cfg)
    N = 1 << a
    M = 1 << int(rng.integers(1, a + 1))
    return Instance({"mu": _z_measure(rng, cfg, N), "mu2": _z_measure(rng, cfg, N)}, {"N": N, "M": M})


def _gen_r10(rng, cfg):
    s2 = -int(rng.integers(6, 11))
    s1 = -int(rng.integers(1, 3))
    n = int(rng.integers(1, 5))
    mu = ms.random_measure(_seed(rng), n, 1, "dirichlet", denominator=1 << 12)
    k = -s2 + 1
    nu = ms.random_measure(_seed(rng), 1 << k, 1, "uniform", denominator=1 << k)
    alpha = Fraction(int(rng.integers(10, 49)), 100)
    beta = Fraction(int(rng.integers(10, 51)), 100)
    return Instance({"mu": mu, "nu": nu}, {"alpha": alpha, "beta": beta, "sigma2": s2, "sigma1": s1})


def _gen_r11(rng, cfg):
    mu = _small(rng, cfg)
    t = _scale(rng, -3, 3)
    window = bernoulli_window(mu, t)
    if window is None:
        r2, r1 = t / 10, t * 144
    else:
        r2, r1 = window
    return Instance({"mu": mu}, {"t": t, "r1": r1, "r2": r2, "center": Fraction(int(rng.integers(-8, 9)), 4)})


def _gen_r12(rng, cfg):
    n = int(rng.integers(1, 201))
    mu = ms.random_measure(_seed(rng), n, Fraction(int(rng.integers(1, 65))), _PROFILES[int(rng.integers(4))], denominator=1 << 10)
    return Instance({"mu": mu}, {"t": _scale(rng, -3, 3), "center": Fraction(int(rng.integers(-8, 9)), 4)})


def _near_uniform_f(rng, cfg, N, mass=None) -> DiscreteMeasure:
    """Near-uniform sub-probability on [1, N] with a hypothesis-friendly L2 distance."""
    f = ms.near_uniform_measure(rng, N, float(rng.uniform(0, min(cfg.near_uniform_eps, 0.17))))
    return f if mass is None else ms.scale_mass(f, mass)


def _f_part(rng, cfg, N) -> DiscreteMeasure:
    """Either a near-uniform measure or the capped part of an L2/L1 split."""
    if rng.integers(2):
        return _near_uniform_f(rng, cfg, N)
    base = ms.add(
        ms.scale_mass(ms.near_uniform_measure(rng, N, 0.08), Fraction(63, 64)),
        ms.scale_mass(ms.random_integer_measure(rng, N, max(1, N // 4), "dirichlet"), Fraction(1, 64)),
    )
    return l2_l1_split(base, N).f


def _gen_r15(rng, cfg):
    a = _log_n(rng, cfg)
    N = 1 << a
    M = 1 << int(rng.integers(1, a + 1))
    return Instance({"f": _f_part(rng, cfg, N), "f2": _f_part(rng, cfg, N)}, {"N": N, "M": M})


def _gen_r16(rng, cfg):
    a = _log_n(rng, cfg)
    N = 1 << a
    M = 1 << int(rng.integers(1, a + 1))
    if rng.integers(2):
        split = l2_l1_split(_z_measure(rng, cfg, N), N)
        f, g = split.f, split.g
        if l1_norm(f) < Fraction(1, 2) or not len(g):
            f = _near_uniform_f(rng, cfg, N)
            g = ms.random_integer_measure(rng, N, int(rng.integers(1, N + 1)), "dirichlet")
    else:
        f = _near_uniform_f(rng, cfg, N, Fraction(int(rng.integers(8, 17)), 16))
        g = ms.scale_mass(_z_measure(rng, cfg, N), Fraction(int(rng.integers(1, 17)), 16))
    return Instance({"f": f, "g": g}, {"N": N, "M": M})


def _gen_r17(rng, cfg):
    N = 1 << _log_n(rng, cfg)
    f = _near_uniform_f(rng, cfg, N) if rng.integers(2) else ms.near_uniform_measure(rng, N, 0.9)
    return Instance({"f": f, "f2": _near_uniform_f(rng, cfg, N)}, {"N": N, "m": int(rng.integers(1, N + 1))})


def _gen_r18(rng, cfg):
    N = 1 << _log_n(rng, cfg)
    return Instance({"f": _f_part(rng, cfg, N), "f2": _f_part(rng, cfg, N)}, {"N": N})


@dataclass(frozen=True)
class Rule:
    id: str
    name: str
    evaluate: Callable
    generate: Callable
    constants: dict = field(default_factory=dict)


RULES = {
    r.id: r
    for r in [
        Rule("R1", "conv-nondecrease", _r1, _gen_r1),
        Rule("R2", "lipschitz", _r2, _gen_r2),
        Rule("R3", "perturb", _r3, _gen_r3),
        Rule("R4", "fractional-scale", _r4, _gen_r4),
        Rule("R5", "superadditivity", _r5, _gen_r5),
        Rule("R6", "submodularity", _r6, _gen_r6),
        Rule("R7", "high-entropy", _r7, _gen_r7, {"C": HIGH_ENTROPY_C}),
        Rule("R8", "high-ent-Z", _r8, _gen_r8, {"C6": HIGH_ENT_Z_C6, "C7": HIGH_ENT_Z_C7}),
        Rule("R9", "restricted-conv", _r9, _gen_r9, {"C4": RESTRICTED_C4, "C5": RESTRICTED_C5}),
        Rule("R10", "low-entropy", _r10, _gen_r10, {"c_hypothesis": "1/(1000 log 1/a)", "c_conclusion": "a/(1e7 log 1/a)"}),
        Rule("R11", "conv-by-bernoulli", _r11, _gen_r11, {"gain": "1/3", "r2": "t D / 10", "r1": "144 t / D^2"}),
        Rule("R12", "conv-by-bernoulli-exact", _r12, _gen_r12),
        Rule("R13", "entropy-difference", _r13, _gen_r13),
        Rule("R14", "subadditivity", _r14, _gen_r14),
        Rule("R15", "l2-conv", _r15, _gen_r15, {"C1": L2_CONV_C1}),
        Rule("R16", "l2-l1-conv", _r16, _gen_r16, {"8": 8, "6": 6}),
        Rule("R17", "diff-bound", _r17, _gen_r17, {"3": 3, "2": 2}),
        Rule("R18", "lower-bound", _r18, _gen_r18, {"1/4": "1/4", "1/10": "1/10"}),
    ]
}


def get_rule(rule_id: str) -> Rule:
    try:
        return RULES[rule_id.upper()]
    except KeyError:
        raise UnknownRule(f"unknown rule {rule_id!r}; known: {', '.join(RULES)}") from None


def verify(rule_id: str, instance: Instance) -> VerificationReport:
    """Evaluate one rule on one instance."""
    rule = get_rule(rule_id)
    if not isinstance(instance, Instance):
        instance = Instance.from_json(instance)
    try:
        return rule.evaluate(instance)
    except (MeasureError, ZeroDivisionError, TypeError) as exc:
        raise MalformedInstance(f"{rule.id}: {exc}") from exc


def generate(rule_id: str, seed: int, index: int, cfg: GeneratorConfig = DEFAULT_GENERATOR) -> Instance:
    """The index-th instance of a rule's generator; independent of evaluation order."""
    rule = get_rule(rule_id)
    rng = np.random.default_rng([seed, int(rule.id[1:]), index])
    return rule.generate(rng, cfg)


# ---------------------------------------------------------------------------
# suites


@dataclass
class SuiteSummary:
    total: int = 0
    passed: int = 0
    vacuous: int = 0
    failed: int = 0
    per_rule: dict = field(default_factory=dict)
    reproducers: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "total": self.total,
            "passed": self.passed,
            "vacuous": self.vacuous,
            "failed": self.failed,
            "per_rule": self.per_rule,
            "reproducers": self.reproducers,
        }


def _task(args):
    rule_id, seed, index, cfg = args
    inst = generate(rule_id, seed, index, cfg)
    return rule_id, index, verify(rule_id, inst), inst


def run_suite(
    rule_ids,
    cfg: GeneratorConfig = DEFAULT_GENERATOR,
    n_instances: int = 100,
    seed: int = 0,
    threads: int = 1,
    jsonl_path=None,
    repro_dir=None,
) -> tuple:
    """Run every rule on n_instances generated instances.

    Returns (reports, summary).  Reports are ordered by rule then index
    whatever the degree of parallelism.  Each non-vacuous failure writes
    its instance to ``repro_dir`` when given.
    """
    if n_instances < 1:
        raise ValueError("n_instances must be positive")
    ids = [get_rule(r).id for r in rule_ids]
    tasks = [(r, seed, i, cfg) for r in ids for i in range(n_instances)]
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (4 * threads))))
    else:
        results = [_task(t) for t in tasks]
    order = {r: k for k, r in enumerate(ids)}
    results.sort(key=lambda x: (order[x[0]], x[1]))
    summary = SuiteSummary()
    reports = []
    for rule_id, index, rep, inst in results:
        reports.append(rep)
        stats = summary.per_rule.setdefault(rule_id, {"total": 0, "passed": 0, "vacuous": 0, "failed": 0, "min_margin": None})
        stats["total"] += 1
        summary.total += 1
        if rep.vacuous:
            stats["vacuous"] += 1
            summary.vacuous += 1
        elif rep.passed:
            stats["passed"] += 1
            summary.passed += 1
        else:
            stats["failed"] += 1
            summary.failed += 1
            if repro_dir is not None:
                os.makedirs(repro_dir, exist_ok=True)
                path = os.path.join(str(repro_dir), f"{rule_id}_seed{seed}_{index}.json")
                with open(path, "w") as fh:
                    json.dump({"rule": rule_id, "seed": seed, "index": index, "instance": inst.to_json()}, fh, indent=1)
                summary.reproducers.append(path)
        if not rep.vacuous and (stats["min_margin"] is None or rep.margin < stats["min_margin"]):
            stats["min_margin"] = rep.margin
    if jsonl_path is not None:
        with open(jsonl_path, "w") as fh:
            for rep in reports:
                fh.write(json.dumps(rep.to_json(), sort_keys=True) + "\n")
    return reports, summary


@dataclass
class TightInstance:
    index: int
    relative_slack: float
    report: VerificationReport


def tightness_scan(rule_id: str, cfg: GeneratorConfig = DEFAULT_GENERATOR, n_instances: int = 200, seed: int = 0, top: int = 5) -> list:
    """Instances with the smallest margin relative to |RHS|, most extreme first.

    Vacuous instances are skipped; zero-margin degenerate cases are kept and
    sort first, which flags them for inspection.
    """
    out = []
    for i in range(n_instances):
        rep = verify(rule_id, generate(rule_id, seed, i, cfg))
        if rep.vacuous:
            continue
        scale = max(abs(rep.rhs.value), abs(rep.lhs.value), 1e-300)
        out.append(TightInstance(i, rep.margin / scale, rep))
    out.sort(key=lambda x: (x.relative_slack, x.index))
    return out[:top]
