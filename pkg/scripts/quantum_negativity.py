"""Quantum counterpart: sweep s_z at fixed |mu| and record the reconstructed minimum.

Onsets should sit at |s_z| = (1 - |mu|^2)/(1 + |mu|^2).
"""
import argparse
import csv
import math
from pathlib import Path

import numpy as np

from complementarity.distributions import PhiGrid
from complementarity.pipeline import quantum_state_on_sweep, run_quantum


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mu", type=float, default=0.6)
    ap.add_argument("--steps", type=int, default=199)
    ap.add_argument("--vartheta", type=float, default=math.pi / 3)
    ap.add_argument("--grid", type=int, default=128)
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args()

    grid = PhiGrid(args.grid)
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "quantum_sweep.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sz", "min_value", "is_pathological"])
        for sz in np.linspace(-0.99, 0.99, args.steps):
            r = run_quantum(quantum_state_on_sweep(sz, args.mu), args.vartheta, grid).report
            w.writerow([sz, r.min_value, r.is_pathological])
    onset = (1 - args.mu**2) / (1 + args.mu**2)
    print(f"predicted onsets at sz = +/-{onset:.6f}; wrote {path}")


if __name__ == "__main__":
    main()
