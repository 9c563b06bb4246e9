"""Differential run of the evaluator against the brute-force oracle over seeded snapshots."""

import argparse
import time

from aclaudit.cli import first_mismatch
from aclaudit.fixtures import gen_random, sized_params


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--first", type=int, default=1)
    ap.add_argument("--count", type=int, default=1000)
    args = ap.parse_args()

    start = time.perf_counter()
    for seed in range(args.first, args.first + args.count):
        snap = gen_random(sized_params(seed))
        bad = first_mismatch(snap)
        if bad:
            print(f"seed {seed}: mismatch {bad}")
            raise SystemExit(1)
    print(f"{args.count} snapshots agree ({time.perf_counter() - start:.1f} s)")


if __name__ == "__main__":
    main()
