"""Wavepacket profiles on the trap axis for the three initial states."""

import argparse
from pathlib import Path

from pauliblock.photon import (
    PhotonScenario,
    SuperpositionInit,
    beat_frequency,
    emitted_norm,
    export_profile,
    profile_along_axis,
    tail_rate,
)

ap = argparse.ArgumentParser()
ap.add_argument("--out", default="results")
ap.add_argument("--eta", type=float, default=0.28)
ap.add_argument("--nu", type=float, default=20.0)
ap.add_argument("--points", type=int, default=40001)
args = ap.parse_args()

s = PhotonScenario(args.eta, args.nu)
states = {
    "mu0": SuperpositionInit(1.0, 0.0),
    "mu1": SuperpositionInit(0.0, 1.0),
    "shaped": SuperpositionInit.shaped(args.eta),
}
t = 10.0 / s.gamma0
print(f"Gamma0 = {s.gamma0:.8f}, Gamma1 = {s.gamma1:.8f}, t = {t:.4f}")
for name, init in states.items():
    tt = t if abs(init.mu0) > 0 else 10.0 / s.gamma1
    prof = profile_along_axis(s, init, tt, args.points)
    export_profile(prof, Path(args.out) / f"photon_{name}")
    line = f"{name:7s} tail rate {tail_rate(prof):.8f}  I(-ct)/I(+ct) {prof.total[0] / prof.total[-1]:.4e}"
    line += f"  norm {emitted_norm(s, init, tt):.8f}"
    if name == "shaped":
        f, bw = beat_frequency(prof)
        line += f"  beat {f:.6f} (bin {bw:.2e})"
    print(line)
