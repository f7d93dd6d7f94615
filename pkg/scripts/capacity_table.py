"""Users supported versus data rate, clean band and with narrowband occupancy.

    python3 scripts/capacity_table.py --ratio-db 3.01 --p 0.7
"""

import argparse

import numpy as np

from walshmary.capacity import InterferenceEnv, LinkParams, db_to_linear, degraded_capacity, pole_capacity


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--W", type=float, default=400e3)
    ap.add_argument("--W-ni", type=float, default=35e3)
    ap.add_argument("--p", type=float, nargs="+", default=[0.0, 0.35, 0.7, 1.0])
    ap.add_argument("--ratio-db", type=float, default=10 * np.log10(2))
    ap.add_argument("--sinr-db", type=float, default=0.0)
    args = ap.parse_args()

    rates = [10e3, 20e3, 25e3, 40e3, 50e3, 100e3]
    print(f"W = {args.W / 1e3:g} kHz, W_ni = {args.W_ni / 1e3:g} kHz, S_ni/S = {args.ratio_db:.2f} dB, "
          f"SINR_req = {args.sinr_db:g} dB")
    print("R_kbps  pole  " + "  ".join(f"p={p:<5g}" for p in args.p))
    for R in rates:
        lp = LinkParams(W=args.W, R=R, sinr_req=db_to_linear(args.sinr_db))
        row = [degraded_capacity(lp, InterferenceEnv(p=p, S_ni=db_to_linear(args.ratio_db), W_ni=args.W_ni))
               for p in args.p]
        print(f"{R / 1e3:6g}  {pole_capacity(lp, exact=False):5.1f}  " + "  ".join(f"{n:7.2f}" for n in row))


if __name__ == "__main__":
    main()
