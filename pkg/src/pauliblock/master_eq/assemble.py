"""Assembly of the effective Hamiltonian and the recycling superoperator.

Decay channels are labelled i = (m, n): an e atom in motional mode n emits and
lands as a g atom in mode m, A_i = c^dag_{g m} c_{e n}. The channel kernel

    K_ij = int dOmega N(k) R_{m_i n_i}(k) conj(R_{m_j n_j}(k))

is real symmetric and positive semidefinite. Its eigenvectors define
orthogonal jump operators J_a = sum_i v_ai A_i with weights w_a, so that the
recycling term is sum_a w_a J_a rho J_a^dag.

The anti-hermitian part is built from the same kernel,

    H_eff1 = -(i/2) Gamma [N_e - sum_ij K_ij c^dag_{e n_j} c^dag_{g m_i} c_{g m_j} c_{e n_i}],

which differs from sum_a w_a J_a^dag J_a only by the one-body weight of
recoil into modes outside the basis. The trace therefore leaks at most at the
completeness deficit of the truncation, and the decay rate of any state in
the basis is independent of the truncation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from ..quadrature import QuadratureError, SphereRule
from ..recoil import completeness_deficit, dipole_pattern, recoil_table
from .basis import apply_ops
from .dipole import DipoleDipoleSpec, cached_element

KERNEL_NEG_TOL = 1e-10
KERNEL_DROP = 1e-15


class KernelError(ArithmeticError):
    """The channel kernel is not positive semidefinite within tolerance."""


@dataclass
class SuperoperatorBundle:
    """Effective Hamiltonian parts plus the recycling kernel on one basis.

    The recycling term is applied as Q^T rho Q -> kernel contraction -> P X P^T,
    where Q splits each source state into (spectator, emitting e mode) and P
    rebuilds (spectator, new g mode) into antisymmetrized states. This equals
    sum_a w_a J_a rho J_a^dag for the eigen-channels exposed by jump_channels.
    """

    h_eff0: np.ndarray
    h_eff1: np.ndarray
    weights: np.ndarray
    kernel: np.ndarray
    split: sparse.csr_matrix
    rebuild: sparse.csr_matrix
    metadata: dict = field(default_factory=dict)
    sectors: dict = field(default_factory=dict, repr=False)
    _vectors: np.ndarray = field(default=None, repr=False)
    _entries: tuple = field(default=None, repr=False)

    def __post_init__(self):
        h = self.h_eff0 + self.h_eff1
        self._h = h
        m2 = self.kernel.shape[0]
        self._m = int(round(np.sqrt(m2)))
        m = self._m
        # rows (m, m'), columns (n, n')
        k4 = self.kernel.reshape(m, m, m, m).transpose(0, 2, 1, 3).reshape(m2, m2)
        self._k_contract = np.ascontiguousarray(k4, dtype=complex)
        self._split_t = self.split.T.tocsr()
        self._rebuild_t = self.rebuild.T.tocsr()
        self._r = self.split.shape[1] // m
        self._blocks = []
        slices = list(self.sectors.values()) or [slice(0, h.shape[0])]
        for sl in slices:
            blk = h[sl, sl]
            if np.count_nonzero(blk - np.diag(np.diag(blk))) == 0:
                self._blocks.append((sl, np.diag(blk).copy()))
            else:
                self._blocks.append((sl, np.ascontiguousarray(blk)))
        off = h.copy()
        for sl in slices:
            off[sl, sl] = 0.0
        if np.any(off):
            self._blocks = [(slice(0, h.shape[0]), np.ascontiguousarray(h))]

    @property
    def dim(self):
        return self.h_eff0.shape[0]

    @property
    def h_eff(self):
        return self._h

    @property
    def jump_channels(self):
        """List of (J_a, w_a) with sparse J_a; Gamma_hat = sum_a w_a J_a rho J_a^dag."""
        chan, dst, src, sgn = self._entries
        out = []
        for a, w in enumerate(self.weights):
            vals = self._vectors[chan, a] * sgn
            mat = sparse.csr_matrix((vals.astype(complex), (dst, src)), shape=(self.dim, self.dim))
            out.append((mat, float(w)))
        return out

    def recycle(self, rho):
        m, r = self._m, self._r
        t = self._split_t @ rho
        t = (self._split_t @ t.T).T  # Q^T rho Q, indices (r, n) x (r', n')
        t = t.reshape(r, m, r, m).transpose(1, 3, 0, 2).reshape(m * m, r * r)
        x = (self._k_contract @ np.ascontiguousarray(t)).reshape(m, m, r, r).transpose(2, 0, 3, 1).reshape(r * m, r * m)
        out = self.rebuild @ x
        return (self.rebuild @ out.T).T

    def apply_h(self, rho):
        """-i (H rho - rho H^dag) for hermitian rho, using the sector blocks of H."""
        out = np.empty_like(rho)
        for sl, blk in self._blocks:
            if blk.ndim == 1:
                out[sl, :] = blk[:, None] * rho[sl, :]
            else:
                out[sl, :] = blk @ rho[sl, :]
        # rho H^dag = (H rho)^dag when rho is hermitian
        return -1j * (out - out.conj().T)

    def rhs(self, rho):
        return self.apply_h(rho) + self.recycle(rho)


def decay_entries(basis):
    """All nonzero matrix elements of the channel operators A_i on the basis.

    Returns arrays (channel, dst, src, sign) with channel = m * M + n.
    """
    m_count = basis.n_modes
    chan, dst, src, sgn = [], [], [], []
    for j, st in enumerate(basis.states):
        for p in st:
            if p < m_count:
                continue
            for a in range(m_count):
                res = apply_ops([("+", a), ("-", p)], st)
                if res is None:
                    continue
                s, new = res
                i = basis.index.get(new)
                if i is None:
                    continue
                chan.append(a * m_count + (p - m_count))
                dst.append(i)
                src.append(j)
                sgn.append(s)
    return (
        np.array(chan, dtype=int),
        np.array(dst, dtype=int),
        np.array(src, dtype=int),
        np.array(sgn, dtype=float),
    )


def split_rebuild(basis):
    """Sparse Q (states x spectator*emitter) and P (states x spectator*new g mode).

    Every e particle p of a state x gives x = s c^dag_r c^dag_p |vac> with the
    other particle r as spectator (none for one-particle bases). Emission into
    g mode m then yields s c^dag_r c^dag_{g m} |vac>.
    """
    m_count = basis.n_modes
    if basis.n_particles == 2:
        spectators = sorted({q for st in basis.states for q in st if any(p >= m_count and p != q for p in st)})
    else:
        spectators = [-1]
    spectators = spectators or [-1]
    r_index = {q: k for k, q in enumerate(spectators)}
    q_rows, q_cols, q_vals = [], [], []
    for j, st in enumerate(basis.states):
        for pos, p in enumerate(st):
            if p < m_count:
                continue
            if len(st) == 1:
                r, s = -1, 1.0
            else:
                r = st[1 - pos]
                s = 1.0 if pos == 1 else -1.0
            q_rows.append(j)
            q_cols.append(r_index[r] * m_count + (p - m_count))
            q_vals.append(s)
    p_rows, p_cols, p_vals = [], [], []
    for r, k in r_index.items():
        for a in range(m_count):
            if r == a:
                continue
            if r < 0:
                st, s = (a,), 1.0
            elif r < a:
                st, s = (r, a), 1.0
            else:
                st, s = (a, r), -1.0
            i = basis.index.get(st)
            if i is not None:
                p_rows.append(i)
                p_cols.append(k * m_count + a)
                p_vals.append(s)
    shape = (basis.dim, len(spectators) * m_count)
    q = sparse.csr_matrix((q_vals, (q_rows, q_cols)), shape=shape)
    p = sparse.csr_matrix((p_vals, (p_rows, p_cols)), shape=shape)
    return q, p


def _channel_recoil(basis, cfg, khat):
    """R_{m n}(k) for every channel (rows) and direction (columns)."""
    tables = [recoil_table(basis.n_max[j], khat[:, j] * cfg.eta[j]) for j in range(3)]
    modes = np.array(basis.modes)
    per_mode = tables[0][modes[:, None, 0], modes[None, :, 0]]
    for j in (1, 2):
        per_mode = per_mode * tables[j][modes[:, None, j], modes[None, :, j]]
    return per_mode.reshape(len(basis.modes) ** 2, khat.shape[0])


def channel_kernel(basis, cfg, rule=SphereRule(16, 32), rtol=1e-10, atol=1e-13, max_doublings=3):
    """Real symmetric kernel K over (m, n) channels, with order-doubling control."""
    if not any(cfg.eta):
        # no recoil: R_mn = delta_mn and the pattern integrates to one
        m = basis.n_modes
        diag = np.array([1.0 if a == b else 0.0 for a in range(m) for b in range(m)])
        return np.outer(diag, diag), {"kernel_rule": "exact (eta = 0)", "kernel_error": 0.0}

    def evaluate(r):
        khat, w = r.nodes()
        rc = _channel_recoil(basis, cfg, khat)
        weighted = rc * (w * dipole_pattern(khat, cfg.d_hat))[None, :]
        return weighted @ rc.conj().T

    prev = evaluate(rule)
    for _ in range(max_doublings):
        rule = rule.doubled()
        cur = evaluate(rule)
        err = float(np.max(np.abs(cur - prev)))
        if err <= atol + rtol * float(np.max(np.abs(cur))):
            break
        prev = cur
    else:
        raise QuadratureError(f"channel kernel not converged, error {err:.3e}", estimate=cur, error=err)
    residue = float(np.max(np.abs(cur.imag)))
    if residue > 1e-10:
        raise ArithmeticError(f"channel kernel has imaginary residue {residue:.3e}")
    kern = cur.real
    return 0.5 * (kern + kern.T), {"kernel_rule": [rule.n_theta, rule.n_phi], "kernel_error": err}


def _pair_index(basis):
    """Basis index of |g m, e n> for all motional index pairs, -1 when absent."""
    m_count = basis.n_modes
    idx = -np.ones((m_count, m_count), dtype=int)
    if basis.n_particles != 2:
        return idx
    for m in range(m_count):
        for n in range(m_count):
            idx[m, n] = basis.index.get((m, m_count + n), -1)
    return idx


def cross_damping(basis, kernel):
    """Two-body operator sum_ij K_ij c^dag_{e n_j} c^dag_{g m_i} c_{g m_j} c_{e n_i}.

    On |g m, e n> = c^dag_{g m} c^dag_{e n}|vac> the element
    <g m', e n'| . |g m, e n> equals K[(m', n), (m, n')] with sign +1.
    """
    m_count = basis.n_modes
    out = np.zeros((basis.dim, basis.dim))
    idx = _pair_index(basis)
    if np.all(idx < 0):
        return out
    k4 = kernel.reshape(m_count, m_count, m_count, m_count)
    block = k4.transpose(0, 3, 2, 1).reshape(m_count**2, m_count**2)
    flat = idx.reshape(-1)
    keep = flat >= 0
    out[np.ix_(flat[keep], flat[keep])] = block[np.ix_(keep, keep)]
    return out


def dipole_dipole_block(basis, cfg, dd):
    """-sum L_{n'm'mn} c^dag_{e n'} c^dag_{g m'} c_{g m} c_{e n} on the basis."""
    out = np.zeros((basis.dim, basis.dim))
    idx = _pair_index(basis)
    modes = basis.modes
    m_count = len(modes)
    pairs = [(m, n) for m in range(m_count) for n in range(m_count) if idx[m, n] >= 0]
    for mp, np_ in pairs:
        for m, n in pairs:
            val = cached_element(dd, modes[np_], modes[mp], modes[m], modes[n], cfg)
            out[idx[mp, np_], idx[m, n]] = -val
    return 0.5 * (out + out.T)


def assemble(cfg, basis, dd=None, rule=SphereRule(16, 32), h_extra=None):
    """Build the SuperoperatorBundle for a LambDickeConfig on a TwoFermionBasis.

    ``h_extra`` is an optional hermitian matrix added to the hermitian part.
    """
    dd = dd or DipoleDipoleSpec()
    gamma = cfg.gamma
    kernel, meta = channel_kernel(basis, cfg, rule)
    w, v = np.linalg.eigh(kernel)
    if w.min() < -KERNEL_NEG_TOL:
        raise KernelError(f"channel kernel has eigenvalue {w.min():.3e} below -{KERNEL_NEG_TOL}")
    keep = w > KERNEL_DROP * max(w.max(), 1.0)
    w, v = w[keep] * gamma, v[:, keep]

    n_e = basis.number_operator("e")
    h0 = np.diag(basis.motion_energy(cfg.nu)).astype(complex)
    if dd.include:
        h0 = h0 + dipole_dipole_block(basis, cfg, dd) * gamma
    if h_extra is not None:
        h_extra = np.asarray(h_extra, dtype=complex)
        if h_extra.shape != h0.shape or not np.allclose(h_extra, h_extra.conj().T, atol=1e-12):
            raise ValueError("extra Hamiltonian block must be hermitian on the basis")
        h0 = h0 + h_extra
    h1 = -0.5j * gamma * (np.diag(n_e) - cross_damping(basis, kernel))

    chan, dst, src, sgn = decay_entries(basis)
    split, rebuild = split_rebuild(basis)
    d = basis.dim
    n_a = w.size

    deficits = [completeness_deficit(basis.n_max, cfg, n) for n in basis.modes]
    meta.update(
        {
            "n_max": list(basis.n_max),
            "dim": d,
            "n_channels": int(n_a),
            "kernel_min_eigenvalue": float(np.linalg.eigvalsh(kernel).min()),
            "deficit_ground": float(deficits[0]),
            "deficit_max": float(max(deficits)),
            "dipole_dipole": bool(dd.include),
            "cutoff": dd.cutoff,
        }
    )
    bundle = SuperoperatorBundle(h0, h1, w, kernel * gamma, split, rebuild, meta, basis.sector_slices())
    bundle._vectors = v * 1.0
    bundle._entries = (chan, dst, src, sgn)
    return bundle
