"""Hyperfine and Zeeman structure of a J = 1, I = 1/2 manifold.

H = A I.J + g_J mu_B B J_z - g_I mu_N B I_z, written in units of |A| on the
product basis |m_J, m_I>, ordered m_J = 1, 0, -1 and m_I = +1/2, -1/2 within.

Each state |m_F> of a mixed block (m_F = +-1/2) is
c_up |m_J = m_F - 1/2, m_I = +1/2> + c_dn |m_J = m_F + 1/2, m_I = -1/2>.
The '+' branch is the one that tends to m_I = +1/2 at large field; it is the
lower state of its block for every x >= 0. The closed-form coefficients hold
for A < 0 as written and for A > 0 after m_F -> -m_F.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import constants, optimize

MU_B_MHZ_PER_T = constants.physical_constants["Bohr magneton in Hz/T"][0] * 1e-6
MU_N_MHZ_PER_T = constants.physical_constants["nuclear magneton in MHz/T"][0]

M_J = (1, 0, -1)
M_I = (0.5, -0.5)
PRODUCT_BASIS = [(mj, mi) for mj in M_J for mi in M_I]
M_F_VALUES = (1.5, 0.5, -0.5, -1.5)


@dataclass(frozen=True)
class SpeciesConstants:
    name: str
    a_mhz: float
    g_j: float
    g_i: float

    def __post_init__(self):
        if self.a_mhz == 0:
            raise ValueError("hyperfine constant must be non-zero")


def load_species(source):
    """Read {name: {"A_MHz": .., "g_J": .., "g_I": ..}} from a path or a mapping."""
    if isinstance(source, (str, Path)):
        source = json.loads(Path(source).read_text())
    out = {}
    for name, block in source.items():
        if name.startswith("_"):
            continue
        unknown = set(block) - {"A_MHz", "g_J", "g_I", "note"}
        if unknown:
            raise ValueError(f"species {name!r}: unknown keys {sorted(unknown)}")
        out[name] = SpeciesConstants(name, float(block["A_MHz"]), float(block["g_J"]), float(block["g_I"]))
    return out


@dataclass(frozen=True)
class HyperfineParams:
    """Field either as dimensionless x or as B (tesla) with species constants.

    In the x form, ``a_sign`` fixes the sign of A and ``nuclear_ratio`` is
    g_I mu_N / (g_J mu_B), which only shifts the stretched states.
    """

    x: float | None = None
    b_field: float | None = None
    species: SpeciesConstants | None = None
    a_sign: int = -1
    nuclear_ratio: float = 0.0

    def __post_init__(self):
        have_x = self.x is not None
        have_b = self.b_field is not None or self.species is not None
        if have_x == have_b:
            raise ValueError("supply exactly one of x or (b_field and species constants)")
        if have_b and (self.b_field is None or self.species is None):
            raise ValueError("b_field needs species constants and vice versa")
        if have_x and self.x < 0:
            raise ValueError("x must be non-negative")
        if have_b and self.b_field < 0:
            raise ValueError("b_field must be non-negative")
        if self.a_sign not in (-1, 1):
            raise ValueError("a_sign must be +1 or -1")

    def reduced(self):
        """(A, a, b) in units of |A|: A = +-1, a = g_J mu_B B, b = g_I mu_N B."""
        if self.x is not None:
            a = 1.5 * self.x / (1.0 + self.nuclear_ratio)
            return float(self.a_sign), a, a * self.nuclear_ratio
        s = self.species
        scale = abs(s.a_mhz)
        a = s.g_j * MU_B_MHZ_PER_T * self.b_field / scale
        b = s.g_i * MU_N_MHZ_PER_T * self.b_field / scale
        return math.copysign(1.0, s.a_mhz), a, b

    @property
    def x_value(self):
        _, a, b = self.reduced()
        return 2.0 * (a + b) / 3.0

    @property
    def sign(self):
        return int(self.reduced()[0])


def _ladder(j, m):
    """<m+1| J_+ |m>."""
    return math.sqrt(j * (j + 1) - m * (m + 1))


def build_hamiltonian(p):
    """6x6 real symmetric H in units of |A| on PRODUCT_BASIS."""
    a_hfs, a, b = p.reduced()
    h = np.zeros((6, 6))
    for i, (mj, mi) in enumerate(PRODUCT_BASIS):
        h[i, i] = a_hfs * mj * mi + a * mj - b * mi
    for i, (mj, mi) in enumerate(PRODUCT_BASIS):
        for k, (mj2, mi2) in enumerate(PRODUCT_BASIS):
            # (A/2)(I_+ J_- + I_- J_+)
            if mj2 == mj + 1 and mi2 == mi - 1:
                val = 0.5 * a_hfs * _ladder(1, mj) * _ladder(0.5, mi2)
                h[k, i] = h[i, k] = val
    return h


@dataclass(frozen=True)
class ZeemanState:
    m_f: float
    branch: str
    energy: float
    c_up: float
    c_dn: float


def _block_indices(m_f):
    up = (m_f - 0.5, 0.5)
    dn = (m_f + 0.5, -0.5)
    idx_up = PRODUCT_BASIS.index(up) if up in PRODUCT_BASIS else None
    idx_dn = PRODUCT_BASIS.index(dn) if dn in PRODUCT_BASIS else None
    return idx_up, idx_dn


def eigensystem(p):
    """Six ZeemanStates; within each mixed block '+' is the lower state."""
    h = build_hamiltonian(p)
    out = []
    for m_f in M_F_VALUES:
        iu, idn = _block_indices(m_f)
        if iu is None or idn is None:
            k = iu if iu is not None else idn
            branch = "+" if iu is not None else "-"
            out.append(ZeemanState(m_f, branch, float(h[k, k]), float(iu is not None), float(idn is not None)))
            continue
        blk = h[np.ix_([iu, idn], [iu, idn])]
        w, v = np.linalg.eigh(blk)
        for branch, col in (("+", 0), ("-", 1)):
            vec = v[:, col]
            out.append(ZeemanState(m_f, branch, float(w[col]), float(abs(vec[0])), float(abs(vec[1]))))
    return out


def state(p, m_f, branch="+"):
    for s in eigensystem(p):
        if s.m_f == m_f and s.branch == branch:
            return s
    raise KeyError(f"no state m_F = {m_f}, branch {branch!r}")


def mixing_coefficients(m_f, x, a_sign=-1):
    """Closed-form (c_up, c_dn) of the '+' state in a mixed block."""
    if m_f not in (0.5, -0.5):
        if m_f == 1.5:
            return 1.0, 0.0
        raise ValueError("closed form applies to m_F = +-1/2; m_F = 3/2 is pure")
    if x < 0:
        raise ValueError("x must be non-negative")
    m = m_f if a_sign < 0 else -m_f
    ratio = (x + 2.0 * m / 3.0) / math.sqrt(x * x + 4.0 * m * x / 3.0 + 1.0)
    return math.sqrt(0.5 * (1.0 + ratio)), math.sqrt(max(0.0, 0.5 * (1.0 - ratio)))


def spin_flip_probability(m_f, x, a_sign=-1):
    """|c_dn|^2: decay from |m_F^+> ends with a flipped nuclear spin."""
    return mixing_coefficients(m_f, x, a_sign)[1] ** 2


def no_flip_probability(m_f, x, a_sign=-1):
    return 1.0 - spin_flip_probability(m_f, x, a_sign)


def no_flip_crossing(m_f, level=0.95, a_sign=-1, x_max=1e3):
    """Smallest x with no-flip probability >= level (root of the closed form)."""
    f = lambda x: no_flip_probability(m_f, x, a_sign) - level  # noqa: E731
    if f(0.0) >= 0:
        return 0.0
    if f(x_max) < 0:
        raise ValueError(f"level {level} not reached below x = {x_max}")
    return float(optimize.brentq(f, 0.0, x_max, xtol=1e-14, rtol=1e-14))


def track_branches(x_grid, a_sign=-1, nuclear_ratio=0.0):
    """Energies (len(x), 6) ordered like eigensystem at x_grid[0], continued by overlap.

    Each step assigns new eigenvectors to old ones by maximal overlap, so the
    labels follow the states adiabatically rather than by energy order.
    """
    x_grid = np.asarray(x_grid, dtype=float)
    prev = None
    energies = np.empty((x_grid.size, 6))
    for i, x in enumerate(x_grid):
        h = build_hamiltonian(HyperfineParams(x=float(x), a_sign=a_sign, nuclear_ratio=nuclear_ratio))
        w, v = np.linalg.eigh(h)
        if prev is None:
            order = np.arange(6)
        else:
            overlap = np.abs(prev.T @ v)
            _, order = optimize.linear_sum_assignment(-overlap)
        v = v[:, order]
        w = w[order]
        # fix eigenvector sign for a smooth continuation
        if prev is not None:
            v = v * np.sign(np.sum(prev * v, axis=0))[None, :]
        energies[i] = w
        prev = v
    return energies
