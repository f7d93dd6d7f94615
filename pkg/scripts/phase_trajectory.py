"""Codebook listing and the CPFSK phase trajectory of one word and its complement.

Writes ``results/trajectory.csv``; with matplotlib installed also ``results/trajectory.png``.
"""

import argparse
from pathlib import Path

import numpy as np

from walshmary.codebook import encode_bits, make_codebook, transitions
from walshmary.waveform import phase_trajectory, trajectory_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=12)
    ap.add_argument("--K", type=int, default=4)
    ap.add_argument("--word", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()

    cb = make_codebook(args.N, args.K)
    for w in range(cb.constellation_size):
        chips = encode_bits(cb, w)
        print(f"{w:0{args.K}b}  {''.join('+' if c > 0 else '-' for c in chips)}  transitions={transitions(chips)}")
    print(f"sync  {''.join('+' if c > 0 else '-' for c in cb.sync_code)}")

    comp = args.word ^ (1 << (args.K - 1))
    a = phase_trajectory(encode_bits(cb, args.word))
    b = phase_trajectory(encode_bits(cb, comp))
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "trajectory.csv").write_text(trajectory_csv(a))
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return
    fig, ax = plt.subplots(figsize=(6, 3))
    ax.plot(np.arange(a.size), a / np.pi, "o-", label=f"word {args.word:0{args.K}b}")
    ax.plot(np.arange(b.size), b / np.pi, "s--", label=f"word {comp:0{args.K}b}")
    ax.set_xlabel("chip")
    ax.set_ylabel("phase / pi")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.out / "trajectory.png", dpi=120)


if __name__ == "__main__":
    main()
