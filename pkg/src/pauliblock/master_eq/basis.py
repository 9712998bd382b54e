"""Antisymmetrized one- and two-fermion Fock basis on a truncated trap.

Single-particle modes are ordered (internal state, motional tuple) with every
g mode before every e mode, motional tuples lexicographic. A basis state is a
sorted tuple of mode indices ``(p, q)`` meaning c_p^dag c_q^dag |vac>, p < q.
Ladder operators carry the Jordan-Wigner sign of that ordering. States are
grouped by excitation number (sector), lexicographic within a sector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy import sparse

from ..recoil import modes_3d

INTERNAL = ("g", "e")
MAX_SINGLE_PARTICLE_MODES = 200


def annihilate(b, state):
    """c_b acting on a sorted occupation tuple; returns (sign, new_state) or None."""
    if b not in state:
        return None
    pos = state.index(b)
    return (-1) ** pos, state[:pos] + state[pos + 1 :]


def create(a, state):
    """c_a^dag acting on a sorted occupation tuple; returns (sign, new_state) or None."""
    if a in state:
        return None
    pos = sum(1 for s in state if s < a)
    return (-1) ** pos, state[:pos] + (a,) + state[pos:]


def apply_ops(ops, state):
    """Apply a product of ladder operators, rightmost first.

    ``ops`` is a sequence of ('+', mode) / ('-', mode) pairs written left to
    right as in the operator product.
    """
    sign = 1
    for kind, mode in reversed(ops):
        res = create(mode, state) if kind == "+" else annihilate(mode, state)
        if res is None:
            return None
        s, state = res
        sign *= s
    return sign, state


@dataclass
class TwoFermionBasis:
    n_max: tuple
    n_particles: int = 2
    sectors: tuple = (0, 1, 2)
    modes: list = field(init=False)
    single: list = field(init=False)
    states: list = field(init=False)
    sector_of: np.ndarray = field(init=False, repr=False)
    index: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.n_max = tuple(int(v) for v in np.broadcast_to(self.n_max, (3,)))
        self.modes = modes_3d(self.n_max)
        self.single = [(beta, n) for beta in INTERNAL for n in self.modes]
        n_sp = len(self.single)
        if n_sp > MAX_SINGLE_PARTICLE_MODES:
            raise MemoryError(f"{n_sp} single-particle modes exceed the guard of {MAX_SINGLE_PARTICLE_MODES}")
        if self.n_particles not in (1, 2):
            raise ValueError("only one- and two-particle sectors are supported")
        # grouped by sector, lexicographic within a sector
        states = [st for st in combinations(range(n_sp), self.n_particles) if self.excitations(st) in self.sectors]
        states.sort(key=lambda st: (self.excitations(st), st))
        self.states = states
        self.sector_of = np.array([self.excitations(s) for s in states], dtype=int)
        self.index = {s: i for i, s in enumerate(states)}

    @property
    def dim(self):
        return len(self.states)

    def sector_slices(self):
        """Contiguous index range of every populated sector."""
        out = {}
        for s in sorted(set(self.sector_of.tolist())):
            idx = np.flatnonzero(self.sector_of == s)
            out[s] = slice(int(idx[0]), int(idx[-1]) + 1)
        return out

    @property
    def n_modes(self):
        return len(self.modes)

    def mode_index(self, beta, n):
        """Single-particle index of internal state ``beta`` in motional mode ``n``."""
        return INTERNAL.index(beta) * len(self.modes) + self.modes.index(tuple(n))

    def excitations(self, state):
        m = len(self.modes)
        return sum(1 for p in state if p >= m)

    def state_of(self, *pairs):
        """Basis index and sign of c^dag_{pair1} c^dag_{pair2} ... |vac>.

        ``pairs`` are (beta, n) tuples in the written operator order.
        """
        ops = [("+", self.mode_index(b, n)) for b, n in pairs]
        res = apply_ops(ops, ())
        if res is None:
            raise ValueError("state violates the Pauli principle")
        sign, st = res
        return self.index[st], sign

    def ket(self, *pairs):
        idx, sign = self.state_of(*pairs)
        v = np.zeros(self.dim, dtype=complex)
        v[idx] = sign
        return v

    def operator(self, ops, coeff=1.0, fmt="csr"):
        """Sparse matrix of coeff * (product of ladder operators) on this basis."""
        rows, cols, vals = [], [], []
        for j, st in enumerate(self.states):
            res = apply_ops(ops, st)
            if res is None:
                continue
            sign, new = res
            i = self.index.get(new)
            if i is None:
                continue
            rows.append(i)
            cols.append(j)
            vals.append(sign * coeff)
        mat = sparse.coo_matrix((vals, (rows, cols)), shape=(self.dim, self.dim), dtype=complex)
        return mat.asformat(fmt)

    def number_operator(self, beta=None):
        """Diagonal of sum_n c^dag c over the chosen internal state(s)."""
        m = len(self.modes)
        diag = np.zeros(self.dim)
        for i, st in enumerate(self.states):
            for p in st:
                if beta is None or (p >= m) == (beta == "e"):
                    diag[i] += 1.0
        return diag

    def motion_energy(self, nu):
        """Diagonal of sum nu . n over both particles."""
        nu = np.asarray(nu, dtype=float)
        m = len(self.modes)
        energies = np.array([float(np.dot(nu, n)) for n in self.modes])
        return np.array([sum(energies[p % m] for p in st) for st in self.states])

    def decay_map(self, m, n):
        """Arrays (dst, src, sign) for c^dag_{g m} c_{e n}; m, n are motional indices."""
        a = self.modes.index(tuple(m))
        b = len(self.modes) + self.modes.index(tuple(n))
        dst, src, sgn = [], [], []
        for j, st in enumerate(self.states):
            res = apply_ops([("+", a), ("-", b)], st)
            if res is None:
                continue
            s, new = res
            i = self.index.get(new)
            if i is not None:
                dst.append(i)
                src.append(j)
                sgn.append(s)
        return np.array(dst, dtype=int), np.array(src, dtype=int), np.array(sgn, dtype=float)


def build_basis(n_max, sectors=(0, 1, 2), n_particles=2):
    return TwoFermionBasis(n_max=n_max, n_particles=n_particles, sectors=tuple(sectors))
