"""Shannon entropy, entropy at a scale, and the predicates built on them.

Logs are base 2.  For a measure of total mass p the convention
H(mu) = p H(mu / p) is used throughout, for plain and scale entropies.

``scale_entropy`` integrates t -> H(floor(X / r + t)) over [0, 1] exactly:
the integrand is a step function whose jumps sit where an atom crosses a
bucket boundary.  Each bucket contributes (time spent at a weight) x
phi(weight); these are non-negative, so the final ``fsum`` involves no
cancellation.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from .config import DEFAULT, Config
from .measure import DiscreteMeasure, MeasureError

_EPS = 2.0**-52


@dataclass(frozen=True)
class EntropyValue:
    value: float
    abs_error: float = 0.0

    def __float__(self):
        return self.value

    def __sub__(self, other):
        if isinstance(other, EntropyValue):
            return EntropyValue(self.value - other.value, self.abs_error + other.abs_error)
        return EntropyValue(self.value - float(other), self.abs_error)

    def __add__(self, other):
        if isinstance(other, EntropyValue):
            return EntropyValue(self.value + other.value, self.abs_error + other.abs_error)
        return EntropyValue(self.value + float(other), self.abs_error)

    def __rsub__(self, other):
        return EntropyValue(float(other) - self.value, self.abs_error)

    def __mul__(self, c):
        return EntropyValue(self.value * float(c), self.abs_error * abs(float(c)))

    __rmul__ = __mul__

    def __repr__(self):
        return f"EntropyValue({self.value!r}, err<={self.abs_error:.1e})"


def _err(n_terms: int, magnitude: float) -> float:
    # every summand is non-negative with a few ulps of relative error, and
    # fsum adds them exactly, so the bound scales with the magnitude only
    return 16 * _EPS * max(1.0, magnitude) + n_terms * 2.0**-100


def _phi_all(weights, total: int) -> list:
    """(w / T) log2(T / w) for each weight, computed without overflow."""
    out = []
    T = total
    big = T >= 1 << 1000
    for w in weights:
        if big:
            out.append((w / T) * (math.log2(T) - math.log2(w)))
        else:
            p = w / T
            out.append(-p * math.log2(p))
    return out


def _phi_factory(T: int):
    """phi(w) = (w / T) log2(T / w), zero at w = 0 and w = T."""
    if T < 1 << 52:
        invT = 1.0 / T

        def phi(w):
            if w == 0 or w == T:
                return 0.0
            p = w * invT
            return -p * math.log2(p)

    else:
        logT = math.log2(T)

        def phi(w):
            if w == 0 or w == T:
                return 0.0
            return (w / T) * (logT - math.log2(w))

    return phi


def _scale_factor(m: DiscreteMeasure) -> float:
    return m.total_weight() / m.wden


def shannon(m: DiscreteMeasure) -> EntropyValue:
    """Entropy of the atom masses under the p H(mu / p) convention."""
    if len(m) == 0:
        return EntropyValue(0.0, 0.0)
    T = m.total_weight()
    if len(m) == 1:
        return EntropyValue(0.0, 0.0)
    if T < 1 << 52 and max(m.weights) < 1 << 52:
        p = np.asarray(m.weights, dtype=float) / float(T)
        terms = -p * np.log2(p)
        s = math.fsum(terms.tolist())
    else:
        s = math.fsum(_phi_all(m.weights, T))
    v = _scale_factor(m) * s
    return EntropyValue(v, _err(len(m), v))


def _as_scale(r) -> Fraction:
    if isinstance(r, Fraction):
        q = r
    elif isinstance(r, float):
        q = Fraction(r)
    else:
        q = Fraction(r)
    if q <= 0:
        raise ValueError("scale must be positive")
    return q


_POW2_BITS = 20


def _exact_pow2(e: int) -> Fraction:
    return Fraction(1 << e) if e >= 0 else Fraction(1, 1 << -e)


def pow2(sigma) -> Fraction:
    """A rational within relative 2^-20 of 2^sigma; exact for integer sigma.

    The mantissa is kept short so that sweeps at such scales stay in
    machine integers, and pow2(sigma + 1) == 2 * pow2(sigma) holds exactly.
    """
    if isinstance(sigma, Fraction) and sigma.denominator == 1:
        sigma = int(sigma)
    if isinstance(sigma, int) or float(sigma).is_integer():
        return _exact_pow2(int(sigma))
    e = math.floor(sigma)
    mant = round(2.0 ** (float(sigma - e)) * (1 << _POW2_BITS))
    return Fraction(mant, 1 << _POW2_BITS) * _exact_pow2(e)


def _rational_parts(m: DiscreteMeasure, r, config: Config):
    """Integer keys, their denominator and the position error for any owner."""
    if m.owner is None:
        return m.keys, m.den, Fraction(0)
    bits = config.precision_bits + max(0, -math.floor(math.log2(float(r)))) + 8
    ints = [int(q * (1 << bits)) for q in m.shadow_positions(bits)]
    return ints, 1 << bits, Fraction(1, 1 << bits)


def _shadow_error(delta: Fraction, r: Fraction) -> float:
    """Effect on H(.; r) of moving every atom by at most delta."""
    if delta == 0:
        return 0.0
    x = float(4 * delta / r)
    if x >= 0.5:
        return math.inf
    return x * math.log2(1 / x) * 2


_I64 = 1 << 62


def _sweep_numpy(keys, den: int, weights, r: Fraction) -> float:
    """Vectorised form of ``_sweep`` for keys and weights that fit in int64.

    Every atom contributes an arrival event at time 0 in its starting bucket
    and, unless it sits on a boundary, a move at time B - rho.  Sorting the
    events by (bucket, time) turns each bucket's weight history into a
    segmented cumulative sum.
    """
    rn, rd = r.numerator, r.denominator
    B = den * rn
    T = sum(weights)
    a = np.asarray(keys, dtype=np.int64) * rd
    w = np.asarray(weights, dtype=np.int64)
    k = a // B
    rho = a - k * B
    mv = rho != 0
    tau = B - rho[mv]
    wm = w[mv]
    buckets = np.concatenate([k, k[mv], k[mv] + 1])
    times = np.concatenate([np.zeros(len(k), dtype=np.int64), tau, tau])
    deltas = np.concatenate([w, -wm, wm])
    order = np.lexsort((times, buckets))
    buckets, times, deltas = buckets[order], times[order], deltas[order]
    cs = np.cumsum(deltas)
    first = np.ones(len(buckets), dtype=bool)
    first[1:] = buckets[1:] != buckets[:-1]
    base = np.maximum.accumulate(np.where(first, np.arange(len(cs)), 0))
    weight = cs - (cs[base] - deltas[base])
    nxt = np.empty_like(times)
    nxt[:-1] = times[1:]
    last = np.ones(len(buckets), dtype=bool)
    last[:-1] = first[1:]
    nxt[last] = B
    dur = (nxt - times).astype(float)
    live = (weight > 0) & (weight < T) & (dur > 0)
    p = weight[live] / float(T)
    return math.fsum((dur[live] * (-p * np.log2(p))).tolist()) / B


def _sweep(keys, den: int, weights, r: Fraction) -> float:
    """Normalised H(X; r) for atoms keys/den with integer weights."""
    n = len(keys)
    if n <= 1:
        return 0.0
    rn, rd = r.numerator, r.denominator
    B = den * rn
    T = sum(weights)
    if B < _I64 and T < 1 << 52 and max(map(abs, keys)) * rd < _I64 // 4:
        return _sweep_numpy(keys, den, weights, r)
    phi = _phi_factory(sum(weights))
    bucket_w: dict = {}
    moves = []
    for key, w in zip(keys, weights):
        a = key * rd
        k, rho = divmod(a, B)
        bucket_w[k] = bucket_w.get(k, 0) + w
        if rho:
            moves.append((B - rho, k, w))
    if not moves:
        return math.fsum(phi(w) for w in bucket_w.values())
    moves.sort()
    last = dict.fromkeys(bucket_w, 0)
    parts = []
    append = parts.append
    for t, k, w in moves:
        wk = bucket_w[k]
        append((t - last[k]) * phi(wk))
        bucket_w[k] = wk - w
        last[k] = t
        k1 = k + 1
        w1 = bucket_w.get(k1)
        if w1 is None:
            bucket_w[k1] = w
            last[k1] = t
        else:
            append((t - last[k1]) * phi(w1))
            bucket_w[k1] = w1 + w
            last[k1] = t
    for k, wk in bucket_w.items():
        if wk:
            append((B - last[k]) * phi(wk))
    return math.fsum(parts) / B


def scale_entropy(m: DiscreteMeasure, r, config: Config = DEFAULT) -> EntropyValue:
    """H(mu; r), the translation-averaged entropy of floor(X / r + t)."""
    r = _as_scale(r)
    if len(m) <= 1:
        return EntropyValue(0.0, 0.0)
    keys, den, delta = _rational_parts(m, r, config)
    v = _scale_factor(m) * _sweep(keys, den, m.weights, r)
    return EntropyValue(v, _err(2 * len(m), v) + _shadow_error(delta, r))


def scale_entropy_via_smoothing(m: DiscreteMeasure, r, config: Config = DEFAULT) -> EntropyValue:
    """H(mu; r) as the differential entropy of X + U[0, r] minus log r.

    The density of X + U is a step function; on a piece where it equals
    c / (T r) the piece contributes (len / r)(c / T) log2(T / c).
    """
    r = _as_scale(r)
    if len(m) <= 1:
        return EntropyValue(0.0, 0.0)
    keys, den, delta = _rational_parts(m, r, config)
    rn, rd = r.numerator, r.denominator
    width = rn * den
    events = []
    for key, w in zip(keys, m.weights):
        x = key * rd
        events.append((x, w))
        events.append((x + width, -w))
    events.sort()
    T = m.total_weight()
    phi = _phi_factory(T)
    parts = []
    cur = 0
    prev = events[0][0]
    i = 0
    n = len(events)
    while i < n:
        x = events[i][0]
        if 0 < cur < T and x > prev:
            parts.append((x - prev) * phi(cur))
        while i < n and events[i][0] == x:
            cur += events[i][1]
            i += 1
        prev = x
    v = _scale_factor(m) * math.fsum(parts) / width
    return EntropyValue(v, _err(2 * len(m), v) + _shadow_error(delta, r))


def cond_entropy(m: DiscreteMeasure, r1, r2, config: Config = DEFAULT) -> EntropyValue:
    """H(mu; r1 | r2) = H(mu; r1) - H(mu; r2)."""
    r1, r2 = _as_scale(r1), _as_scale(r2)
    if r1 == r2:
        return EntropyValue(0.0, 0.0)
    return scale_entropy(m, r1, config) - scale_entropy(m, r2, config)


def z_block_entropy(m: DiscreteMeasure, M: int) -> EntropyValue:
    """(1/M) sum_a H(mu restricted to [a+1, a+M]) for a measure on Z.

    Uses sum_a H(rho_a) = M sum_i F(m_i) - sum_a F(mu[a+1, a+M]), with the
    window masses from prefix sums.
    """
    if M < 2 or int(M) != M:
        raise ValueError("M must be an integer at least 2")
    M = int(M)
    if m.owner is not None or m.den != 1:
        raise MeasureError("z_block_entropy needs integer positions")
    if len(m) <= 1:
        return EntropyValue(0.0, 0.0)
    T = m.total_weight()
    lo, hi = m.keys[0], m.keys[-1]
    span = hi - lo + 1
    small = T < 1 << 52
    dense = np.zeros(span + 2 * M, dtype=np.int64 if small else object)
    dense[np.asarray(m.keys, dtype=np.int64) - lo + M] = m.weights
    prefix = np.concatenate([np.zeros(1, dtype=dense.dtype), np.cumsum(dense)])
    window = prefix[M:] - prefix[:-M]
    window = window[window > 0]
    if small:
        q = window / float(T)
        p = np.asarray(m.weights, dtype=float) / float(T)
    else:
        # exact integers, one correctly rounded division each
        q = np.array([int(w) / T for w in window], dtype=float)
        p = np.array([w / T for w in m.weights], dtype=float)
    atom_part = math.fsum((-p * np.log2(p)).tolist())
    window_part = math.fsum((-q * np.log2(q)).tolist())
    count = len(q)
    s = M * atom_part - window_part
    v = _scale_factor(m) * s / M
    return EntropyValue(v, _err(len(m) + count, M * atom_part) / M)


def hpm(m: DiscreteMeasure) -> EntropyValue:
    """Binary entropy of the split mu(-inf, 0) versus mu[0, inf), normalised."""
    from .measure import compare_to_rational

    T = m.total_weight()
    if T == 0:
        return EntropyValue(0.0, 0.0)
    neg = sum(w for i, w in enumerate(m.weights) if compare_to_rational(m, i, Fraction(0)) < 0)
    v = 0.0
    for part in (neg, T - neg):
        if 0 < part < T:
            p = part / T
            v -= p * math.log2(p)
    return EntropyValue(v, _err(2, v))


def garsia_diagnostic(m: DiscreteMeasure, r, config: Config = DEFAULT) -> EntropyValue:
    """log(1/r) - H(mu; r); bounded along r -> 0 iff the limit is absolutely continuous."""
    r = _as_scale(r)
    log_inv = math.log2(r.denominator) - math.log2(r.numerator)
    return log_inv - scale_entropy(m, r, config)


# ---------------------------------------------------------------------------
# profiles


@dataclass
class EntropyProfile:
    """Samples of sigma -> H(mu; 2^sigma | 2^(sigma+1))."""

    grid: list
    values: list
    abs_error: float = 0.0
    lipschitz_constant: float = 4.0

    def step(self) -> float:
        if len(self.grid) < 2:
            return 0.0
        return max(b - a for a, b in zip(self.grid, self.grid[1:]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["sigma", "value"])
        for s, v in zip(self.grid, self.values):
            w.writerow([repr(float(s)), repr(float(v))])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {
                "grid": [float(s) for s in self.grid],
                "values": [float(v) for v in self.values],
                "abs_error": self.abs_error,
                "lipschitz_constant": self.lipschitz_constant,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "EntropyProfile":
        d = json.loads(text)
        return cls(d["grid"], d["values"], d.get("abs_error", 0.0), d.get("lipschitz_constant", 4.0))


def entropy_profile(m: DiscreteMeasure, sigma_lo: float, sigma_hi: float, step: float = 0.125, config: Config = DEFAULT) -> EntropyProfile:
    """Conditional entropies on the grid sigma_lo, sigma_lo + step, ..., >= sigma_hi."""
    n = max(0, math.ceil((sigma_hi - sigma_lo) / step - 1e-12))
    grid = [sigma_lo + j * step for j in range(n + 1)]
    cache: dict = {}

    def H(s):
        key = round(s / step * 4096)
        if key not in cache:
            cache[key] = scale_entropy(m, pow2(s), config)
        return cache[key]

    values = []
    err = 0.0
    for s in grid:
        c = H(s) - H(s + 1)
        values.append(c.value)
        err = max(err, c.abs_error)
    return EntropyProfile(grid, values, err)


@dataclass
class WindowBound:
    """Certified lower bound for inf of H(mu; s | 2s) over log2 s in a window."""

    lower: float
    grid_min: float
    cells: int


def certified_window_min(m: DiscreteMeasure, sigma_lo: float, sigma_hi: float, step: float = 1 / 16, config: Config = DEFAULT) -> WindowBound:
    """Lower bound for H(mu; s | 2s) over all s with sigma_lo <= log2 s <= sigma_hi.

    The grid is aligned to multiples of ``step`` (a power of two) so that
    s and 2s are both grid scales.  On a cell [s_a, s_b] two certificates
    are available and the better one is kept: monotonicity of H(mu; .)
    gives H(mu; s_b) - H(mu; 2 s_a), and the 4-Lipschitz property in log s
    gives the mean of the endpoint values minus 2 * step.
    """
    inv = round(1 / step)
    if inv <= 0 or inv & (inv - 1) or abs(1 / inv - step) > 1e-15:
        raise ValueError("step must be 1 / 2^k")
    j_lo = math.floor(sigma_lo * inv + 1e-12)
    j_hi = max(j_lo, math.ceil(sigma_hi * inv - 1e-12))
    cache: dict = {}
    # scale(j + inv) must be exactly 2 * scale(j)
    base = [pow2(Fraction(i, inv)) for i in range(inv)]

    def S(j):
        if j not in cache:
            q, i = divmod(j, inv)
            cache[j] = scale_entropy(m, base[i] * pow2(q), config)
        return cache[j]

    cond =[S(j) - S(j + inv) for j in range(j_lo, j_hi + 1)]
    err = max(c.abs_error for c in cond)
    grid_min = min(c.value for c in cond)
    if j_hi == j_lo:
        return WindowBound(grid_min - err, grid_min, 0)
    lower = math.inf
    for idx, j in enumerate(range(j_lo, j_hi)):
        mono = (S(j + 1) - S(j + inv)).value
        lip = (cond[idx].value + cond[idx + 1].value) / 2 - 2 * step
        lower = min(lower, max(mono, lip))
    return WindowBound(lower - 2 * err, grid_min, j_hi - j_lo)


def _greedy_packing(intervals: list) -> int:
    """Largest 1-separated subset of a union of closed intervals (greedy leftmost)."""
    count = 0
    nxt = -math.inf
    for a, b in sorted(intervals):
        start = max(a, nxt)
        if start > b:
            continue
        k = math.floor((b - start) + 1e-12) + 1
        count += k
        nxt = start + k
    return count


def _merge(intervals):
    out = []
    for a, b in sorted(intervals):
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [tuple(x) for x in out]


def separated_level_set_count(profile: EntropyProfile, alpha: float, sigma2: float, sigma1: float, max_step: float = 0.125) -> tuple:
    """Bounds (lo, hi) on N_1 of {sigma in [sigma2, sigma1] : value(sigma) > 1 - alpha}.

    The lower bound packs points into neighbourhoods of grid samples that
    are certified above the threshold by the Lipschitz constant; the upper
    bound packs the set where the value could possibly exceed it.
    """
    g, v = profile.grid, profile.values
    L = profile.lipschitz_constant
    err = profile.abs_error
    if not g or g[0] > sigma2 + 1e-12 or g[-1] < sigma1 - 1e-12:
        raise ValueError("profile does not cover the window")
    if profile.step() > max_step + 1e-12:
        raise ValueError("profile step is too coarse")
    theta = 1 - alpha
    sure = []
    for s, val in zip(g, v):
        margin = val - err - theta
        if margin > 0:
            rad = margin / L * (1 - 1e-9)
            a, b = max(s - rad, sigma2), min(s + rad, sigma1)
            if a <= b:
                sure.append((a, b))
    maybe = []
    for (s0, v0), (s1, v1) in zip(zip(g, v), zip(g[1:], v[1:])):
        a = s0 + (theta - v0 - err) / L
        b = s1 - (theta - v1 - err) / L
        a, b = max(a, s0, sigma2), min(b, s1, sigma1)
        if a <= b:
            maybe.append((a, b))
    for s, val in zip(g, v):
        if val + err > theta and sigma2 <= s <= sigma1:
            maybe.append((s, s))
    lo = _greedy_packing(_merge(sure))
    hi = _greedy_packing(_merge(maybe))
    return lo, max(lo, hi)


# ---------------------------------------------------------------------------
# k-th high entropy inequality


class KHEStatus(str, Enum):
    HOLDS = "HOLDS"
    FAILS = "FAILS"
    UNDECIDED = "UNDECIDED"


@dataclass
class KHEResult:
    status: KHEStatus
    threshold_deficit: Fraction  # the inequality asks H >= 1 - deficit
    window: tuple  # (log t low, log t high), empty when low > high
    witness: Fraction | None = None
    min_value: float | None = None
    margin_used: float = 0.0


def k_he_window(r, k: int, A: int) -> tuple:
    r = _as_scale(r)
    if not r < Fraction(1, 16):
        raise ValueError("k-HE is defined for r < 2^-4")
    log_r = math.log2(r.numerator) - math.log2(r.denominator)
    ll = math.log2(-log_r)
    lll = math.log2(ll)
    half = A * (2 + lll - k) * ll
    return log_r - half, log_r + half


def k_he_check(m: DiscreteMeasure, r, k: int, A: int, step: float = 1 / 16, config: Config = DEFAULT) -> KHEResult:
    """Grid test of H(mu; t | 2t) >= 1 - 2^-(2^k + 3k + A) over the k-HE window.

    HOLDS is certified with a 4-Lipschitz margin sized by the largest
    distance from a window point to the nearest grid point.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    r = _as_scale(r)
    deficit = Fraction(1, 1 << (2**k + 3 * k + A)) if 2**k + 3 * k + A >= 0 else Fraction(1 << -(2**k + 3 * k + A))
    lo, hi = k_he_window(r, k, A)
    if lo > hi:
        return KHEResult(KHEStatus.HOLDS, deficit, (lo, hi))
    log_r = (lo + hi) / 2
    if hi - lo == 0:
        sigmas = [log_r]
    else:
        n = max(1, math.ceil((hi - lo) / step))
        sigmas = [lo + (hi - lo) * j / n for j in range(n + 1)]
    gap = 0.0 if len(sigmas) == 1 else (sigmas[1] - sigmas[0]) / 2
    margin = 4 * gap
    values = []
    worst = None
    d = float(deficit)
    undecided = False
    for s in sigmas:
        t = r if len(sigmas) == 1 else pow2(s)
        c = cond_entropy(m, t, 2 * t, config)
        values.append(c.value)
        shortfall = 1 - c.value  # compare against the deficit
        if shortfall - c.abs_error > d:
            return KHEResult(KHEStatus.FAILS, deficit, (lo, hi), t, c.value, margin)
        if shortfall + c.abs_error + margin > d:
            undecided = True
        if worst is None or c.value < worst:
            worst = c.value
    status = KHEStatus.UNDECIDED if undecided else KHEStatus.HOLDS
    return KHEResult(status, deficit, (lo, hi), None, worst, margin)
