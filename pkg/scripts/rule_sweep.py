"""Run the rule catalogue at several seeds and tabulate margins.

Writes one JSON summary per seed plus a tightness table of the instances
closest to equality for each rule.
"""

import argparse
import json
import pathlib

from bcentropy.verify import RULES, run_suite, tightness_scan


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rules", default=",".join(RULES))
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--seeds", default="0,1,2")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", type=pathlib.Path, default=pathlib.Path("results"))
    args = ap.parse_args()
    rules = [r.strip() for r in args.rules.split(",") if r.strip()]
    args.out.mkdir(parents=True, exist_ok=True)
    failed = 0
    for seed in (int(s) for s in args.seeds.split(",")):
        _, summary = run_suite(rules, n_instances=args.n, seed=seed, threads=args.threads,
                               repro_dir=args.out / "reproducers")
        (args.out / f"rules_seed{seed}.json").write_text(json.dumps(summary.to_json(), indent=1))
        failed += summary.failed
        print(f"seed {seed}: {summary.total} run, {summary.vacuous} vacuous, {summary.failed} failed")
    tight = {r: [t.relative_slack for t in tightness_scan(r, n_instances=args.n, top=3)] for r in rules}
    (args.out / "tightness.json").write_text(json.dumps(tight, indent=1))
    raise SystemExit(1 if failed else 0)


if __name__ == "__main__":
    main()
