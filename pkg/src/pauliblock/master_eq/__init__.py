"""Two-fermion master equation on one lattice site."""

from __future__ import annotations

from ..io import write_csv, write_json
from .assemble import KernelError, SuperoperatorBundle, assemble, channel_kernel
from .basis import TwoFermionBasis, apply_ops, build_basis
from .dipole import DipoleDipoleSpec, dipole_dipole_element
from .evolve import DensityMatrix, PositivityError, StepControl, StepUnderflowError, Trajectory, evolve
from .observables import observables, pair_distribution


def snapshot_table(trajectory):
    """Header and rows (time, p_excited, sector populations) of a trajectory."""
    obs = [observables(r) for r in trajectory.states]
    sectors = sorted(obs[0]["sector_populations"]) if obs else []
    header = ["time", "p_excited"] + [f"sector_{s}" for s in sectors]
    rows = [[o["time"], o["p_excited"]] + [o["sector_populations"][s] for s in sectors] for o in obs]
    return header, rows


def export_snapshots(trajectory, stem, metadata):
    """Write ``stem``.csv and ``stem``.json; returns both paths."""
    header, rows = snapshot_table(trajectory)
    full = []
    for r in trajectory.states:
        o = observables(r)
        full.append(
            {
                "time": o["time"],
                "p_excited": o["p_excited"],
                "trace": o["trace"],
                "sector_populations": o["sector_populations"],
                "motional_distribution": o["motional_distribution"],
                "internal_distribution": {f"{b}:{','.join(map(str, n))}": v for (b, n), v in o["internal_distribution"].items()},
            }
        )
    csv_path = write_csv(f"{stem}.csv", header, rows)
    json_path = write_json(f"{stem}.json", {"metadata": metadata, "snapshots": full})
    return csv_path, json_path


__all__ = [
    "DensityMatrix",
    "DipoleDipoleSpec",
    "KernelError",
    "PositivityError",
    "StepControl",
    "StepUnderflowError",
    "SuperoperatorBundle",
    "Trajectory",
    "TwoFermionBasis",
    "apply_ops",
    "assemble",
    "build_basis",
    "channel_kernel",
    "dipole_dipole_element",
    "evolve",
    "export_snapshots",
    "observables",
    "pair_distribution",
    "snapshot_table",
]
