"""Level entropies H_l / l for a list of parameters, written as CSV.

    python3 scripts/entropy_table.py --lambda 1/2 --lambda x^2+x-1 --lmax 18 --out results/
"""

import argparse
import pathlib
from fractions import Fraction

from bcentropy import bcstudy as bs
from bcentropy.cli import parse_lambda


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lambda", dest="lams", action="append", required=True)
    ap.add_argument("--p", default="1/2")
    ap.add_argument("--lmax", type=int, default=16)
    ap.add_argument("--out", type=pathlib.Path, default=pathlib.Path("results"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for text in args.lams:
        est = bs.h_estimate(parse_lambda(text), Fraction(args.p), args.lmax)
        bounds = bs.h_bounds_check(est) if args.lmax >= 3 else None
        name = "".join(c if c.isalnum() else "_" for c in text)
        (args.out / f"entropy_{name}.csv").write_text(est.to_csv())
        top = est.levels[-1]
        note = "" if bounds is None else f"  bounds {'ok' if bounds.passed else 'VIOLATED'}"
        print(f"{text:>12}  l={top.l}  H/l={top.ratio:.6f}  atoms={top.atom_count}{note}")


if __name__ == "__main__":
    main()
