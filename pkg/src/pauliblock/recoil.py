"""Photon-recoil matrix elements of a harmonically trapped atom.

Conventions: ``R_mn(kappa) = <m| exp(-i kappa (a + a^dagger)) |n>`` per axis,
with ``kappa = khat_j * eta_j``. The 3D element is the product over axes. All
rates are in units of the single-particle decay rate (Gamma = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .quadrature import SphereRule, integrate_interval, integrate_sphere

LAGUERRE_MAX_DEGREE = 60


@dataclass(frozen=True)
class LambDickeConfig:
    """Trap and transition parameters for one lattice site.

    eta: Lamb-Dicke parameter per axis. nu: trap angular frequency per axis, in
    units of gamma. dipole: unit vector of the transition dipole.
    """

    eta: tuple = (0.0, 0.0, 0.0)
    nu: tuple = (1.0, 1.0, 1.0)
    dipole: tuple = (0.0, 0.0, 1.0)
    gamma: float = 1.0

    def __post_init__(self):
        eta = tuple(float(e) for e in np.broadcast_to(self.eta, (3,)))
        nu = tuple(float(v) for v in np.broadcast_to(self.nu, (3,)))
        d = np.asarray(self.dipole, dtype=float)
        if d.shape != (3,):
            raise ValueError("dipole must be a 3-vector")
        if abs(np.linalg.norm(d) - 1.0) > 1e-12:
            raise ValueError(f"dipole must be a unit vector, |d| = {np.linalg.norm(d)!r}")
        if any(e < 0 for e in eta):
            raise ValueError("eta must be non-negative on every axis")
        if any(v <= 0 for v in nu):
            raise ValueError("nu must be positive on every axis")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "dipole", tuple(float(x) for x in d))

    @classmethod
    def isotropic(cls, eta, dipole=(0.0, 0.0, 1.0), nu=1.0, gamma=1.0):
        return cls(eta=(eta,) * 3, nu=(nu,) * 3, dipole=dipole, gamma=gamma)

    @classmethod
    def one_axis(cls, eta, orientation=0.0, nu=1.0, gamma=1.0):
        """Motion along x only; ``orientation`` is the cosine between dipole and x."""
        c = float(orientation)
        if not -1.0 <= c <= 1.0:
            raise ValueError("orientation must be a cosine in [-1, 1]")
        return cls(
            eta=(eta, 0.0, 0.0), nu=(nu, nu, nu), dipole=(c, 0.0, math.sqrt(1.0 - c * c)), gamma=gamma
        )

    @property
    def d_hat(self):
        return np.asarray(self.dipole)


def laguerre(b, c, x):
    """Generalized Laguerre polynomial L_b^c(x) by the three-term recurrence."""
    if b < 0 or c < 0:
        raise ValueError("degree and order must be non-negative")
    if b > LAGUERRE_MAX_DEGREE:
        raise ValueError(f"Laguerre degree {b} exceeds the stability bound {LAGUERRE_MAX_DEGREE}")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if b == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + c - x
    for k in range(1, b):
        prev, cur = cur, ((2 * k + 1 + c - x) * cur - (k + c) * prev) / (k + 1)
    return cur if cur.ndim else float(cur)


def laguerre_sum(b, c, x):
    """Direct alternating-sum form; reference only (cancels badly for large b)."""
    return sum((-1) ** j * math.comb(b + c, b - j) * x**j / math.factorial(j) for j in range(b + 1))


def recoil_element_1d(m, n, kappa):
    """Exact R_mn(kappa); vectorized over kappa."""
    if m < 0 or n < 0:
        raise ValueError("mode indices must be non-negative")
    lo, hi = (m, n) if m <= n else (n, m)
    d = hi - lo
    kappa = np.asarray(kappa, dtype=float)
    # factorial ratio in the log domain
    log_pref = 0.5 * (math.lgamma(lo + 1) - math.lgamma(hi + 1)) - 0.5 * kappa**2
    val = np.exp(log_pref) * kappa**d * laguerre(lo, d, kappa**2) * (-1j) ** d
    return val if val.ndim else complex(val)


def recoil_element_ld(m, n, kappa):
    """Lamb-Dicke expansion of R_mn to second order in kappa."""
    d = abs(m - n)
    top = max(m, n)
    if d == 0:
        return complex(1.0 - (top + 0.5) * kappa**2)
    if d == 1:
        return complex(-1j * kappa * math.sqrt(top))
    if d == 2:
        return complex(-0.5 * kappa**2 * math.sqrt(top * (top - 1)))
    raise ValueError(f"|m - n| = {d} exceeds the second-order expansion")


def recoil_table(n_max, kappa):
    """All R_mn(kappa) for m, n <= n_max; shape (n_max+1, n_max+1, *kappa.shape)."""
    kappa = np.asarray(kappa, dtype=float)
    out = np.empty((n_max + 1, n_max + 1) + kappa.shape, dtype=complex)
    for m in range(n_max + 1):
        for n in range(m, n_max + 1):
            out[m, n] = out[n, m] = recoil_element_1d(m, n, kappa)
    return out


def recoil_element_3d(m, n, khat, cfg):
    """R_mn(khat) = prod_j R_{m_j n_j}(khat_j eta_j); khat may be (3,) or (Q, 3)."""
    khat = np.asarray(khat, dtype=float)
    val = 1.0 + 0j
    for j in range(3):
        val = val * recoil_element_1d(m[j], n[j], khat[..., j] * cfg.eta[j])
    return val


def dipole_pattern(khat, d_hat):
    """Angular distribution of dipole radiation, N(k) = 3/(8 pi) (1 - |d.k|^2)."""
    khat = np.asarray(khat, dtype=float)
    dk = khat @ np.asarray(d_hat, dtype=float)
    return 3.0 / (8.0 * np.pi) * (1.0 - dk**2)


def projected_pattern(u, axis_cos):
    """Azimuthal marginal of N(k) at fixed khat.chi = u; integrates to 1 on [-1, 1]."""
    u = np.asarray(u, dtype=float)
    c2 = float(axis_cos) ** 2
    return 0.75 * (1.0 - u**2 * c2 - 0.5 * (1.0 - u**2) * (1.0 - c2))


def alpha_coefficients(d_hat):
    """Closed form alpha_j = (2 - d_j^2) / 5."""
    d = np.asarray(d_hat, dtype=float)
    return (2.0 - d**2) / 5.0


def alpha_quadrature(d_hat, rule=SphereRule()):
    """alpha_j = integral of N(k) k_j^2 over the sphere, by quadrature."""
    val, _ = integrate_sphere(lambda k: dipole_pattern(k, d_hat)[:, None] * k**2, rule)
    return np.real(val)


def pattern_norm_1d(axis_cos):
    val, _ = integrate_interval(lambda u: projected_pattern(u, axis_cos))
    return float(val)


@dataclass
class RtildeResult:
    value: float
    error: float
    imag_residue: float = field(default=0.0)


def rtilde(nprime, mprime, m, n, cfg, rule=SphereRule(), rtol=1e-10, full=False):
    """Angular-averaged coefficient: integral of N(k) conj(R_{n'm'}(k)) R_{mn}(k).

    Real by symmetry; an imaginary residue above 1e-10 is an error.
    """

    def integrand(k):
        return (
            dipole_pattern(k, cfg.d_hat)
            * np.conj(recoil_element_3d(nprime, mprime, k, cfg))
            * recoil_element_3d(m, n, k, cfg)
        )

    val, err = integrate_sphere(integrand, rule, rtol=rtol)
    if abs(val.imag) > 1e-10:
        raise ArithmeticError(f"rtilde has imaginary residue {val.imag:.3e}")
    if full:
        return RtildeResult(float(val.real), err, float(abs(val.imag)))
    return float(val.real)


def ld_case(nprime, mprime, m, n):
    """Classify an index pattern by the second-order Lamb-Dicke cases.

    Returns ('i', None), ('ii', axis), ('iii', axis) or (None, None) when the
    coefficient is of higher order.
    """
    d_left = [abs(a - b) for a, b in zip(nprime, mprime)]
    d_right = [abs(a - b) for a, b in zip(m, n)]
    if not any(d_left) and not any(d_right):
        return "i", None
    for i in range(3):
        unit = [int(j == i) for j in range(3)]
        if d_left == unit and d_right == unit:
            return "ii", i
        two = [2 * u for u in unit]
        if (not any(d_right) and d_left == two) or (not any(d_left) and d_right == two):
            return "iii", i
    return None, None


def rtilde_ld(nprime, mprime, m, n, cfg):
    """Second-order Lamb-Dicke value of rtilde; 0.0 for higher-order patterns."""
    case, i = ld_case(nprime, mprime, m, n)
    alpha = alpha_coefficients(cfg.d_hat)
    eta2 = np.asarray(cfg.eta) ** 2
    if case == "i":
        return float(1.0 - sum((mprime[j] + m[j] + 1) * alpha[j] * eta2[j] for j in range(3)))
    if case == "ii":
        top_l = max(nprime[i], mprime[i])
        top_r = max(m[i], n[i])
        return float(alpha[i] * eta2[i] * math.sqrt(top_l * top_r))
    if case == "iii":
        if any(abs(a - b) for a, b in zip(nprime, mprime)):
            top = max(nprime[i], mprime[i])
        else:
            top = max(m[i], n[i])
        return float(-0.5 * alpha[i] * eta2[i] * math.sqrt(top * (top - 1)))
    return 0.0


def completeness(n, khat, cfg, m_max):
    """Truncated sum over m (each axis <= m_max) of |R_mn(khat)|^2."""
    total = 1.0
    khat = np.asarray(khat, dtype=float)
    for j in range(3):
        tab = recoil_table(max(m_max, n[j]), khat[j] * cfg.eta[j])
        total *= float(np.sum(np.abs(tab[: m_max + 1, n[j]]) ** 2))
    return total


def completeness_deficit(n_max, cfg, n=(0, 0, 0)):
    """1 - sum over the truncated basis of |R_mn|^2 at the largest kick per axis.

    The kick kappa_j = eta_j (emission along axis j) bounds every direction.
    """
    per_axis = np.broadcast_to(n_max, (3,))
    kept = 1.0
    for j in range(3):
        tab = recoil_table(max(int(per_axis[j]), n[j]), cfg.eta[j])
        kept *= float(np.sum(np.abs(tab[: int(per_axis[j]) + 1, n[j]]) ** 2))
    return max(0.0, 1.0 - kept)


def modes_3d(n_max):
    """All motional index tuples with n_j <= n_max[j], lexicographic order."""
    per_axis = tuple(int(v) for v in np.broadcast_to(n_max, (3,)))
    return [tuple(t) for t in product(*(range(v + 1) for v in per_axis))]
