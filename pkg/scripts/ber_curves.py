"""Monte Carlo SER/BER for uncoded and LDPC-coded links next to the coherent bi-orthogonal SER.

    python3 scripts/ber_curves.py --trials 200 --workers 4
"""

import argparse
import io
import math
from pathlib import Path

import numpy as np

from walshmary.cli import ExperimentSpec, run_ber_sweep


def biorthogonal_ser(esn0_db: float, m: int) -> float:
    """Exact coherent SER by trapezoidal integration of the correct-decision density."""
    a = math.sqrt(2 * 10 ** (esn0_db / 10))
    z = np.linspace(max(0.0, a - 12), a + 12, 20001)
    q = 0.5 * np.array([math.erfc(v / math.sqrt(2)) for v in z])
    pdf = np.exp(-0.5 * (z - a) ** 2) / math.sqrt(2 * math.pi)
    f = pdf * (1 - 2 * q) ** (m // 2 - 1)
    return float(1 - np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(z)))


def rows(text: str) -> list[dict]:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    head = lines[0].split(",")
    return [dict(zip(head, ln.split(","))) for ln in lines[1:]]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=12)
    ap.add_argument("--K", type=int, default=4)
    ap.add_argument("--modulation", default="bpsk", choices=["bpsk", "cpfsk"])
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()

    grid = {"start": 0, "stop": 8, "step": 1}
    common = dict(N=args.N, K=args.K, modulation=args.modulation, ebn0_db=grid, trials=args.trials,
                  workers=args.workers, seed=args.seed)
    uncoded, _ = run_ber_sweep(ExperimentSpec(mode="ber", **common))
    coded, _ = run_ber_sweep(ExperimentSpec(mode="ber", coded=True, **common))

    out = io.StringIO()
    out.write("EbN0_dB,ser_theory,ser_uncoded,ber_uncoded,ber_coded\n")
    print(" EbN0  SER theory  SER uncoded  BER uncoded  BER coded")
    for u, c in zip(rows(uncoded), rows(coded)):
        e = float(u["EbN0_dB"])
        theory = biorthogonal_ser(e + 10 * math.log10(args.K), 2**args.K)
        print(f"{e:5.1f}  {theory:10.2e}  {float(u['ser']):11.2e}  {float(u['ber']):11.2e}  {float(c['ber']):9.2e}")
        out.write(f"{e},{theory:.6g},{u['ser']},{u['ber']},{c['ber']}\n")
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / f"ber_{args.modulation}_{args.N}_{args.K}.csv").write_text(out.getvalue())


if __name__ == "__main__":
    main()
