"""Time full matrix builds over a grid of user and folder counts."""

import argparse
import time

from aclaudit.evaluator import Evaluator
from aclaudit.fixtures import GenParams, gen_random


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--users", type=int, nargs="+", default=[10, 50, 100])
    ap.add_argument("--folders", type=int, nargs="+", default=[100, 500, 1000])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    print("users,folders,best_ms")
    for u in args.users:
        for f in args.folders:
            snap = gen_random(GenParams(seed=0, users=u, folders=f, groups=20))
            sids = [p.sid for p in snap.directory.users]
            best = float("inf")
            for _ in range(args.repeat):
                t = time.perf_counter()
                Evaluator(snap).build_matrix(sids, snap.paths())
                best = min(best, time.perf_counter() - t)
            print(f"{u},{f},{best * 1000:.0f}")


if __name__ == "__main__":
    main()
