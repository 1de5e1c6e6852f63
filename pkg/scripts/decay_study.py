"""Conditional entropy H(mu_L; 2^-n | 2^-n+1) as n grows, against the
uniform-boundary prediction 1 - 2^-n / (2 D ln 2) with D the support length."""

import argparse
import math
from fractions import Fraction

from bcentropy import bcstudy as bs
from bcentropy import measure as ms
from bcentropy.cli import parse_lambda


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lambda", dest="lam", default="1/2")
    ap.add_argument("--p", default="1/2")
    ap.add_argument("--L", type=int, default=16)
    ap.add_argument("--nmax", type=int, default=10)
    args = ap.parse_args()
    lam = parse_lambda(args.lam)
    d = bs.decay_profile(lam, Fraction(args.p), args.L, args.nmax)
    lo, hi = ms.diameter(ms.level_measure_top(lam, Fraction(args.p), args.L))
    D = (float(lo) + float(hi)) / 2
    print(f"support length ~ {D:.6f}; dimension estimate {d.dim_estimate}")
    print(f"{'n':>3} {'value':>14} {'1 - value':>12} {'boundary term':>14}")
    for n, v in zip(range(1, args.nmax + 1), d.profile.values):
        print(f"{n:>3} {v:14.10f} {1 - v:12.3e} {2.0**-n / (2 * D * math.log(2)):14.3e}")


if __name__ == "__main__":
    main()
