#!/usr/bin/env python3
"""Desk-scale tail study of the harmonic cancel lattice (d_k = 1/k).

Solves the block recurrence for both canonical seeds out to a large index
(default 100000), reports the squared-norm tail certificates, and prints a
few sample partial sums. Both independent solutions should certify as
square-summable, the discrete signature of the maximal-deficiency case.

Usage: python scripts/tail_decay_study.py [steps]
"""

import pathlib
import sys
import time

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from sldl import blocks_from_delta, christ_stolz_family, l2_tail_report, solve_recurrence


def main() -> None:
    steps = int(sys.argv[1]) if len(sys.argv) > 1 else 100_000
    t0 = time.monotonic()
    d, H = christ_stolz_family(steps + 2)
    blocks = blocks_from_delta(d, H)
    print(f"lattice with {len(d)} spacings built in {time.monotonic() - t0:.1f}s")
    for label, seed in (("seed (1, 0)", ([1.0], [0.0])),
                        ("seed (0, 1)", ([0.0], [1.0]))):
        t0 = time.monotonic()
        u = solve_recurrence(blocks, seed[0], seed[1], steps)
        rep = l2_tail_report(u)
        sums = rep.partial_sums
        print(f"{label}: verdict={rep.verdict}  ({rep.verdict_basis})")
        for k in (100, 1000, 10_000, steps - 1):
            if k < len(sums):
                print(f"    partial sum through k={k:>6d}: {sums[k]:.12f}")
        print(f"    solved {steps} steps in {time.monotonic() - t0:.1f}s")


if __name__ == "__main__":
    main()
