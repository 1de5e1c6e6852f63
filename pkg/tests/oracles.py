"""Independent reference computations used by the tests.

Nothing here imports the library's entropy or Mahler code; the oracles
work from first principles so agreement is meaningful.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import numpy as np


def shannon_of(masses) -> float:
    """sum p log2(1/p) with the p H(mu/p) convention for sub-probabilities."""
    masses = [Fraction(m) for m in masses if m]
    total = sum(masses)
    if total == 0:
        return 0.0
    return float(total) * -sum(float(m / total) * math.log2(float(m / total)) for m in masses)


def scale_entropy_bruteforce(atoms, r) -> float:
    """int_0^1 H(floor(X / r + t)) dt by exact breakpoints in t."""
    r = Fraction(r)
    atoms = [(Fraction(x), Fraction(m)) for x, m in atoms]
    u = [x / r for x, _ in atoms]
    cuts = sorted({Fraction(0), Fraction(1)} | {(-v) % 1 for v in u})
    total = 0.0
    for a, b in zip(cuts, cuts[1:]):
        if a == b:
            continue
        t = (a + b) / 2
        cells = {}
        for v, (_, m) in zip(u, atoms):
            k = math.floor(v + t)
            cells[k] = cells.get(k, 0) + m
        total += float(b - a) * shannon_of(cells.values())
    return total


def mahler_float(coeffs) -> float:
    """|a_d| prod max(1, |z|) from numpy roots; coefficients constant term first."""
    c = [int(x) for x in coeffs]
    while c and c[-1] == 0:
        c.pop()
    lead = abs(c[-1])
    if len(c) == 1:
        return float(lead)
    roots = np.roots(c[::-1])
    return lead * float(np.prod([max(1.0, abs(z)) for z in roots]))


def distinct_sums(lam_mp, l: int, tol) -> list:
    """Sorted distinct values of sum_{i<l} +-lam^i at mpmath precision."""
    pts = [mpmath.mpf(0)]
    for i in range(l):
        pw = lam_mp**i
        new = sorted([x + pw for x in pts] + [x - pw for x in pts])
        ded = [new[0]]
        for x in new[1:]:
            if x - ded[-1] > tol:
                ded.append(x)
        pts = ded
    return pts


def gaussian_gap_grid(p: float, h: float, half_width: float = 14.0) -> float:
    """Composite Simpson estimate of the Gaussian mixture entropy gap."""
    n = int(round(2 * half_width / h))
    n += n % 2
    x = np.linspace(-half_width, half_width, n + 1)

    def negent(j):
        g = p * np.exp(-0.5 * (x + j) ** 2) + (1 - p) * np.exp(-0.5 * (x - j) ** 2)
        g /= math.sqrt(2 * math.pi)
        f = np.where(g > 0, g * np.log2(np.where(g > 0, g, 1.0)), 0.0)
        w = np.ones(n + 1)
        w[1:-1:2] = 4
        w[2:-1:2] = 2
        return float(np.sum(w * f) * (x[1] - x[0]) / 3)

    return negent(1.0) - negent(math.sqrt(2))


def level_entropy_float(lam: float, p: float, l: int, tol: float = 1e-9) -> tuple:
    """(entropy, atom count) of sum_{i<l} +-lam^i by float enumeration.

    Sums closer than ``tol`` are merged; fine while the true gaps are far
    above double rounding, which holds for the small levels used here.
    """
    bits = (np.arange(2**l)[:, None] >> np.arange(l)) & 1
    x = ((2 * bits - 1) * lam ** np.arange(l)).sum(axis=1)
    w = np.prod(np.where(bits == 1, p, 1 - p), axis=1)
    order = np.argsort(x)
    x, w = x[order], w[order]
    starts = np.concatenate([[True], np.diff(x) > tol])
    masses = np.add.reduceat(w, np.flatnonzero(starts))
    return float(-(masses * np.log2(masses)).sum()), len(masses)
