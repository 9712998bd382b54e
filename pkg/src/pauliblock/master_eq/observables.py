"""Expectation values on a density matrix over a TwoFermionBasis."""

from __future__ import annotations

import numpy as np

from .basis import INTERNAL


def _occupations(basis):
    """Matrix (states x single-particle modes) of occupation numbers 0/1."""
    occ = np.zeros((basis.dim, len(basis.single)))
    for i, st in enumerate(basis.states):
        occ[i, list(st)] = 1.0
    return occ


def observables(rho):
    """p_excited, per-mode occupations and per-sector traces of a DensityMatrix."""
    basis = rho.basis
    if basis is None:
        raise ValueError("density matrix carries no basis")
    diag = np.real(np.diag(rho.data))
    occ = diag @ _occupations(basis)
    m = basis.n_modes
    motional = {}
    internal = {}
    for k, (beta, n) in enumerate(basis.single):
        internal[(beta, n)] = float(occ[k])
        motional[n] = motional.get(n, 0.0) + float(occ[k])
    sectors = {int(s): float(diag[basis.sector_of == s].sum()) for s in sorted(set(basis.sector_of))}
    return {
        "time": rho.time,
        "p_excited": float(occ[m:].sum()),
        "trace": float(diag.sum()),
        "motional_distribution": motional,
        "internal_distribution": internal,
        "sector_populations": sectors,
    }


def pair_distribution(rho, sector=0):
    """Populations of the two-particle states of one sector, keyed by mode labels."""
    basis = rho.basis
    diag = np.real(np.diag(rho.data))
    out = {}
    for i, st in enumerate(basis.states):
        if basis.sector_of[i] != sector:
            continue
        key = tuple((basis.single[p][0], basis.single[p][1]) for p in st)
        out[key] = float(diag[i])
    return out


__all__ = ["observables", "pair_distribution", "INTERNAL"]
