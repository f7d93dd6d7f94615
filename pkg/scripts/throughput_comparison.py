"""Aggregate multi-user throughput against one user sending K bits per Walsh symbol."""

import argparse
import math

from walshmary.capacity import InterferenceEnv, LinkParams, degraded_capacity, mary_bit_rate, pole_capacity
from walshmary.codebook import CodebookError, make_codebook


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--W", type=float, default=400e3)
    ap.add_argument("--R", type=float, default=25e3)
    ap.add_argument("--p", type=float, default=0.7)
    ap.add_argument("--ratio", type=float, default=2.0, help="S_ni / S, linear")
    args = ap.parse_args()

    lp = LinkParams(W=args.W, R=args.R)
    env = InterferenceEnv(p=args.p, S_ni=args.ratio)
    n_pole = pole_capacity(lp, exact=False)
    users = max(0, math.floor(degraded_capacity(lp, env) + 1e-9))
    print(f"clean band    : {n_pole:g} users x {args.R / 1e3:g} kbps = {n_pole * args.R / 1e3:g} kbps")
    print(f"with p={args.p:g}    : {users} user(s) x {args.R / 1e3:g} kbps = {users * args.R / 1e3:g} kbps")
    print("single user, M-ary Walsh, chip rate = W:")
    for n in (12, 20, 24, 40):
        for k in (4, 5, 6):
            try:
                make_codebook(n, k)
            except CodebookError:
                continue
            rate = mary_bit_rate(args.W, n, k)
            print(f"  N={n:2d} K={k}: {rate / 1e3:7.2f} kbps  ({rate / args.R:4.2f} x the per-user rate)")


if __name__ == "__main__":
    main()
