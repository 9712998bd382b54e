"""Zeeman branches and no-flip probabilities against x.

Writes zeeman_branches.csv and zeeman_noflip.csv to the output directory.
"""

import argparse
from pathlib import Path

import numpy as np

from pauliblock.io import write_csv
from pauliblock.zeeman import M_F_VALUES, no_flip_crossing, no_flip_probability, track_branches

ap = argparse.ArgumentParser()
ap.add_argument("--out", default="results")
ap.add_argument("--points", type=int, default=400)
args = ap.parse_args()
out = Path(args.out)

x = np.linspace(0.0, 4.0, args.points)
energies = track_branches(x)
write_csv(out / "zeeman_branches.csv", ["x"] + [f"E_{k}" for k in range(6)], np.column_stack([x, energies]).tolist())

xs = np.geomspace(1e-2, 1e2, args.points)
rows = [[v] + [no_flip_probability(m, v) for m in M_F_VALUES[:3]] for v in xs]
write_csv(out / "zeeman_noflip.csv", ["x", "P_+1.5", "P_+0.5", "P_-0.5"], rows)
for m in (0.5, -0.5):
    print(f"m_F = {m:+g}: 95% no-flip above x = {no_flip_crossing(m):.6f}")
