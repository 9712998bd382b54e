"""Effective Pauli-blocked decay rates, the quench rate and its rate equations.

Rates are in units of the single-particle decay rate unless stated otherwise.
The quench functions work in SI angular units (s^-1).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .quadrature import SphereRule, integrate_interval, integrate_sphere
from .recoil import dipole_pattern, projected_pattern, recoil_element_1d, recoil_table

NORM_TOL = 1e-10


class AdiabaticityWarning(UserWarning):
    """Detuning is not large enough for adiabatic elimination to be trusted."""


def _tail_converged(terms, rel=1e-14):
    return len(terms) >= 3 and all(t < rel * max(sum(terms), 1e-300) for t in terms[-3:])


def gamma_eff_1d(eta, orientation=0.0, blocked=True):
    """Blocked decay rate of the motional ground state on one trap axis.

    ``orientation`` is the cosine between the dipole and the trap axis. The
    mode sum over n != 0 is extended until three consecutive terms fall below
    1e-14 of the running total.
    """
    if eta < 0:
        raise ValueError("eta must be non-negative")
    if not blocked:
        return 1.0
    if eta == 0:
        return 0.0

    def integrand(u):
        total = np.zeros_like(u)
        terms = []
        n = 1
        while True:
            term = projected_pattern(u, orientation) * np.abs(recoil_element_1d(n, 0, u * eta)) ** 2
            total = total + term
            terms.append(float(np.max(term)))
            if _tail_converged(terms):
                return total
            n += 1
            if n > 60:
                raise ArithmeticError("mode sum did not converge below the Laguerre bound")

    val, _ = integrate_interval(integrand)
    return float(val)


@dataclass
class InitialMotionalState:
    """Motional amplitudes r_n of the excited atom next to a blocking g atom."""

    amplitudes: dict
    blocking_mode: tuple = (0, 0, 0)
    blocking_present: bool = True

    def __post_init__(self):
        amps = {tuple(int(v) for v in k): complex(a) for k, a in self.amplitudes.items()}
        if not amps:
            raise ValueError("amplitude support is empty")
        if any(min(k) < 0 or len(k) != 3 for k in amps):
            raise ValueError("mode indices must be non-negative 3-tuples")
        norm = sum(abs(a) ** 2 for a in amps.values())
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"amplitudes are not normalized: sum |r|^2 = {norm!r}")
        self.amplitudes = amps
        self.blocking_mode = tuple(int(v) for v in self.blocking_mode)

    @classmethod
    def ground(cls, blocking_present=True):
        return cls({(0, 0, 0): 1.0}, blocking_present=blocking_present)

    @property
    def n_max(self):
        return tuple(max(k[j] for k in self.amplitudes) for j in range(3))


def _amplitude_field(init, cfg, khat):
    """sum_n r_n R_{b n}(k) at every direction in khat (Q, 3)."""
    b = init.blocking_mode
    top = [max(init.n_max[j], b[j]) for j in range(3)]
    tables = [recoil_table(top[j], khat[:, j] * cfg.eta[j]) for j in range(3)]
    out = np.zeros(khat.shape[0], dtype=complex)
    for n, r in init.amplitudes.items():
        out += r * tables[0][b[0], n[0]] * tables[1][b[1], n[1]] * tables[2][b[2], n[2]]
    return out


def gamma_eff_general(init, cfg, rule=SphereRule(16, 32), rtol=1e-12):
    """Initial decay rate Gamma (1 - sum r*_{n'} r_n Rtilde_{n' b b n}).

    The double sum equals the sphere integral of N(k) |sum_n r_n R_{b n}(k)|^2,
    which is what is evaluated.
    """
    if not init.blocking_present:
        return float(cfg.gamma)

    def integrand(khat):
        return dipole_pattern(khat, cfg.d_hat) * np.abs(_amplitude_field(init, cfg, khat)) ** 2

    survive, _ = integrate_sphere(integrand, rule, rtol=rtol, atol=1e-15)
    return float(cfg.gamma * (1.0 - float(np.real(survive))))


def laser_recoil(k_hat_l, cfg, n_max=None, tol=1e-13):
    """Motional state r_n = <n| exp(i k_L . X) |0> after absorbing a laser photon.

    With R_mn(kappa) = <m| exp(-i kappa (a + a^dag)) |n>, each axis contributes
    R_{n_j 0}(-k_Lj eta_j). The per-axis cutoff grows until the retained weight
    exceeds 1 - tol.
    """
    k = np.asarray(k_hat_l, dtype=float)
    if not np.all(np.isfinite(k)) or abs(np.linalg.norm(k) - 1.0) > 1e-12:
        raise ValueError("laser direction must be a unit vector")
    kappa = -k * np.asarray(cfg.eta)
    per_axis = []
    for j in range(3):
        if kappa[j] == 0.0:
            per_axis.append(np.array([1.0 + 0j]))
            continue
        top = 4 if n_max is None else int(n_max)
        while True:
            col = np.array([recoil_element_1d(n, 0, kappa[j]) for n in range(top + 1)])
            if 1.0 - float(np.sum(np.abs(col) ** 2)) < tol / 3 or top >= 60:
                break
            top += 4
        per_axis.append(col)
    amps = {}
    for n in product(*(range(len(c)) for c in per_axis)):
        amps[n] = per_axis[0][n[0]] * per_axis[1][n[1]] * per_axis[2][n[2]]
    norm = math.sqrt(sum(abs(a) ** 2 for a in amps.values()))
    return InitialMotionalState({n: a / norm for n, a in amps.items()})


@dataclass(frozen=True)
class QuenchConfig:
    """Dressing of the metastable state to a broad line (angular units, s^-1)."""

    omega_dr: float
    delta_dr: float
    gamma_1p: float
    eta: float = 0.0
    eta_dr: float = 0.0
    c_up_sq: float = 1.0
    c_dn_sq: float = 0.0

    def __post_init__(self):
        for name in ("omega_dr", "delta_dr", "gamma_1p"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.eta < 0 or self.eta_dr < 0:
            raise ValueError("Lamb-Dicke parameters must be non-negative")
        if not (0 <= self.c_up_sq <= 1 and 0 <= self.c_dn_sq <= 1):
            raise ValueError("branching probabilities must lie in [0, 1]")
        if abs(self.c_up_sq + self.c_dn_sq - 1.0) > 1e-10:
            raise ValueError("c_up_sq + c_dn_sq must equal 1")

    @property
    def adiabatic(self):
        return self.delta_dr / self.gamma_1p >= 5.0


def quench_rate(q):
    """Induced decay rate Omega^2 Gamma_1P / (4 Delta^2), in s^-1."""
    if not q.adiabatic:
        warnings.warn(
            f"delta_dr / gamma_1p = {q.delta_dr / q.gamma_1p:.3g} < 5; adiabatic elimination is questionable",
            AdiabaticityWarning,
            stacklevel=2,
        )
    return q.omega_dr**2 * q.gamma_1p / (4.0 * q.delta_dr**2)


@dataclass(frozen=True)
class Populations:
    p_e_up: float
    p_g_up: float
    p_g_dn: float
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        vals = (self.p_e_up, self.p_g_up, self.p_g_dn)
        if any(v < -1e-12 or v > 1 + 1e-12 for v in vals):
            raise ValueError(f"population outside [0, 1]: {vals}")
        if sum(vals) > 1 + 1e-9:
            raise ValueError(f"populations sum to {sum(vals)!r} > 1")

    def as_tuple(self):
        return (self.p_e_up, self.p_g_up, self.p_g_dn)


def total_rate(q):
    """Gamma_tot = (|c_up|^2 (eta^2 + eta_dr^2) + |c_dn|^2) Gamma_quench, in s^-1."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AdiabaticityWarning)
        g = quench_rate(q)
    return (q.c_up_sq * (q.eta**2 + q.eta_dr**2) + q.c_dn_sq) * g


def rate_equation_solution(q, t):
    """Analytic populations at time t (s) from P_e_up = 1 at t = 0.

    Branching is exact: both ground-state populations are fixed fractions of
    the decayed weight, so the three populations always sum to one.
    """
    if t < 0:
        raise ValueError("time must be non-negative")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AdiabaticityWarning)
        g = quench_rate(q)
    up = q.c_up_sq * (q.eta**2 + q.eta_dr**2) * g
    dn = q.c_dn_sq * g
    tot = up + dn
    if tot == 0.0:
        return Populations(1.0, 0.0, 0.0)
    p_e = math.exp(-tot * t)
    decayed = -math.expm1(-tot * t)
    return Populations(p_e, up / tot * decayed, dn / tot * decayed, {"gamma_tot": tot})
