"""Locate the certified thresholds of the closed-form criteria.

Prints the smallest b for which 1 - 1/b passes the rational test, the
n-th root thresholds k*(n), and the sparse-family thresholds n*(Q).
"""

import argparse

from bcentropy import criteria as cr


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--roots", default="2,3,10,1000000")
    ap.add_argument("--sparse", default="2x-4,2x^2-6")
    args = ap.parse_args()
    print(f"rational  b* = {cr.rational_boundary()}")
    for n in (int(v) for v in args.roots.split(",")):
        print(f"nth-root  n={n:<8} k* = {cr.nth_root_threshold(n)}")
    for q in args.sparse.split(","):
        print(f"sparse    Q={q:<8} n* = {cr.sparse_threshold(q)}")
    for n in (3, 16, 10**6):
        lo, hi = cr.dobrowolski_lower(n)
        print(f"dobrowolski n={n:<8} [{float(lo):.16f}, {float(hi):.16f}]")


if __name__ == "__main__":
    main()
