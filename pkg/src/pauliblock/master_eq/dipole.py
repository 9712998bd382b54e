"""Dipole-dipole matrix elements between two-atom motional states.

Each axis uses the dimensionless coordinate xi = x / (sqrt(2) x0_j), in which
the oscillator eigenfunctions are the standard Hermite functions. After
integrating out the centre of mass, every element reduces to a 3D integral
over the relative coordinate delta,

    L / Gamma = int d^3 delta  G(sqrt(2) eta * delta) prod_j h_j(delta_j),

with the short-distance region |delta| < cutoff removed. The cutoff is given
in the same units (oscillator lengths), so for an isotropic trap every element
scales exactly as eta^-3.

Each h_j is a polynomial times exp(-delta_j^2 / 2), so the integrand is
exp(-r^2/2) r^-1 sum_k c_k(direction) r^k. The radial integrals are
incomplete gamma functions; only the angular part needs quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special

from ..quadrature import QuadratureError, SphereRule


@dataclass
class DipoleDipoleSpec:
    cutoff: float = 0.01
    include: bool = False
    element_cache: dict = field(default_factory=dict, repr=False)
    rtol: float = 1e-8

    def __post_init__(self):
        if not 1e-4 < self.cutoff < 1.0:
            raise ValueError(f"cutoff must lie in (1e-4, 1), got {self.cutoff!r}")


@dataclass(frozen=True)
class DipoleElement:
    value: float
    cutoff_sensitivity: float
    error: float


def hermite_poly_parts(n_max, xi):
    """Polynomial factors p_n with psi_n(xi) = p_n(xi) exp(-xi^2/2), n <= n_max."""
    xi = np.asarray(xi, dtype=float)
    out = np.empty((n_max + 1,) + xi.shape)
    out[0] = np.pi**-0.25
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * xi * out[0]
    for n in range(1, n_max):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * xi * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def hermite_function(n, xi):
    xi = np.asarray(xi, dtype=float)
    return hermite_poly_parts(n, xi)[n] * np.exp(-0.5 * xi**2)


@lru_cache(maxsize=16)
def _gauss_hermite(n):
    return np.polynomial.hermite.hermgauss(n)


def _overlap_samples(a, b, c, d, delta):
    y, w = _gauss_hermite((a + b + c + d) // 2 + 2)
    top = max(a, b, c, d)
    x_plus = y / math.sqrt(2.0) + 0.5 * delta[..., None]
    x_minus = y / math.sqrt(2.0) - 0.5 * delta[..., None]
    pp = hermite_poly_parts(top, x_plus)
    pm = hermite_poly_parts(top, x_minus)
    # exp(-(X+d/2)^2 - (X-d/2)^2) = exp(-2X^2) exp(-d^2/2); GH absorbs the first
    return (pp[a] * pp[b] * pm[c] * pm[d]) @ w / math.sqrt(2.0)


@lru_cache(maxsize=4096)
def overlap_polynomial(a, b, c, d):
    """Coefficients q_p with h(delta) = exp(-delta^2/2) sum_p q_p delta^p.

    h is the centre-of-mass integral of psi_a psi_b (X + delta/2) times
    psi_c psi_d (X - delta/2). The polynomial has degree a + b + c + d and is
    recovered exactly from Chebyshev samples.
    """
    deg = a + b + c + d
    nodes = 2.0 * np.cos(np.pi * (np.arange(deg + 1) + 0.5) / (deg + 1))
    vals = _overlap_samples(a, b, c, d, nodes)
    coef = np.linalg.solve(np.vander(nodes, deg + 1, increasing=True), vals)
    coef[(np.arange(deg + 1) - deg) % 2 == 1] = 0.0
    coef.setflags(write=False)
    return coef


def relative_overlap(a, b, c, d, delta):
    """h(delta) = int dX psi_a psi_b (X + delta/2) psi_c psi_d (X - delta/2)."""
    delta = np.asarray(delta, dtype=float)
    return np.exp(-0.5 * delta**2) * np.polynomial.polynomial.polyval(delta, overlap_polynomial(a, b, c, d))


def radial_moments(max_power, cutoff):
    """I_k = int_cutoff^inf r^(k-1) exp(-r^2/2) dr for k = 0..max_power."""
    z = 0.5 * cutoff**2
    out = np.empty(max_power + 1)
    out[0] = 0.5 * special.exp1(z)
    k = np.arange(1, max_power + 1)
    out[1:] = 2.0 ** (0.5 * k - 1.0) * special.gamma(0.5 * k) * special.gammaincc(0.5 * k, z)
    return out


def _angular_coefficients(nprime, mprime, m, n, eta, d_hat, rule):
    """A_k = sphere integral of the G angular factor times the r^k coefficient."""
    s, ws = rule.nodes()
    scaled = s * np.asarray(eta)[None, :]
    norm = np.linalg.norm(scaled, axis=1)
    cos_d = scaled @ np.asarray(d_hat) / norm
    ang = 0.75 * (1.0 - 3.0 * cos_d**2) / (math.sqrt(2.0) * norm) ** 3
    poly = np.ones((s.shape[0], 1))
    # x carries (n', m), x' carries (m', n)
    for j in range(3):
        q = overlap_polynomial(nprime[j], m[j], mprime[j], n[j])
        axis_poly = q[None, :] * s[:, j : j + 1] ** np.arange(q.size)[None, :]
        out = np.zeros((s.shape[0], poly.shape[1] + q.size - 1))
        for p in range(q.size):
            out[:, p : p + poly.shape[1]] += axis_poly[:, p : p + 1] * poly
        poly = out
    return (ws * ang) @ poly


def dipole_dipole_element(nprime, mprime, m, n, cfg, cutoff=0.01, rule=SphereRule(16, 32), rtol=1e-8):
    """L_{n'm'mn} in units of Gamma, with a hard relative-coordinate cutoff.

    Returns a DipoleElement with the value, the change when the cutoff is
    halved, and the order-doubling error of the angular quadrature.
    """
    if not 1e-4 < cutoff < 1.0:
        raise ValueError(f"cutoff must lie in (1e-4, 1), got {cutoff!r}")
    if min(cfg.eta) <= 0.0:
        raise ValueError("dipole-dipole elements need eta > 0 on every axis")
    if (sum(nprime) + sum(mprime) + sum(m) + sum(n)) % 2:
        return DipoleElement(0.0, 0.0, 0.0)
    args = (nprime, mprime, m, n, cfg.eta, cfg.d_hat)
    coarse = _angular_coefficients(*args, rule)
    fine = _angular_coefficients(*args, rule.doubled())
    moments = radial_moments(fine.size - 1, cutoff)
    lo, hi = float(coarse @ moments), float(fine @ moments)
    err = abs(hi - lo)
    if err > rtol * abs(hi) + 1e-10:
        raise QuadratureError(
            f"dipole-dipole quadrature not converged (estimate {hi:.6e}, error {err:.2e})",
            estimate=hi,
            error=err,
        )
    half = float(fine @ radial_moments(fine.size - 1, cutoff / 2.0))
    return DipoleElement(hi, abs(half - hi), err)


def cached_element(spec, nprime, mprime, m, n, cfg):
    key = (tuple(nprime), tuple(mprime), tuple(m), tuple(n))
    if key not in spec.element_cache:
        el = dipole_dipole_element(nprime, mprime, m, n, cfg, spec.cutoff, rtol=spec.rtol)
        if not math.isfinite(el.value):
            raise ArithmeticError(f"non-finite dipole-dipole element for {key}")
        spec.element_cache[key] = el.value
    return spec.element_cache[key]
