"""Product quadrature on the unit sphere and on [-1, 1].

Gauss-Legendre in cos(theta) times a uniform trapezoid in phi. The trapezoid
is exact for trigonometric polynomials of degree < n_phi, so the rule is
spectrally accurate for the smooth integrands used here.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class QuadratureError(RuntimeError):
    """Raised when order doubling does not bring the estimate under tolerance."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


@lru_cache(maxsize=64)
def _gauss_legendre(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@dataclass(frozen=True)
class SphereRule:
    n_theta: int = 32
    n_phi: int = 64

    @property
    def size(self):
        return self.n_theta * self.n_phi

    def nodes(self):
        """Return (khat, weights); khat has shape (Q, 3), weights sum to 4*pi."""
        return _sphere_nodes(self.n_theta, self.n_phi)

    def doubled(self):
        return SphereRule(2 * self.n_theta, 2 * self.n_phi)


@lru_cache(maxsize=32)
def _sphere_nodes(n_theta, n_phi):
    ct, wt = _gauss_legendre(n_theta)
    st = np.sqrt(1.0 - ct**2)
    phi = 2.0 * np.pi * (np.arange(n_phi) + 0.5) / n_phi
    khat = np.empty((n_theta, n_phi, 3))
    khat[..., 0] = st[:, None] * np.cos(phi)[None, :]
    khat[..., 1] = st[:, None] * np.sin(phi)[None, :]
    khat[..., 2] = ct[:, None]
    weights = np.repeat(wt[:, None] * (2.0 * np.pi / n_phi), n_phi, axis=1)
    khat = khat.reshape(-1, 3)
    weights = weights.reshape(-1)
    khat.setflags(write=False)
    weights.setflags(write=False)
    return khat, weights


def integrate_sphere(func, rule=SphereRule(), rtol=1e-10, atol=1e-13, max_doublings=3):
    """Integrate ``func(khat) -> array`` over the sphere with order doubling.

    ``func`` receives all nodes at once (shape (Q, 3)) and returns an array
    whose leading axis is Q. Returns ``(value, error_estimate)``.
    """
    khat, w = rule.nodes()
    prev = np.tensordot(w, func(khat), axes=(0, 0))
    for _ in range(max_doublings):
        rule = rule.doubled()
        khat, w = rule.nodes()
        cur = np.tensordot(w, func(khat), axes=(0, 0))
        err = float(np.max(np.abs(cur - prev))) if np.size(cur) else 0.0
        scale = float(np.max(np.abs(cur))) if np.size(cur) else 0.0
        if err <= atol + rtol * scale:
            return cur, err
        prev = cur
    raise QuadratureError(
        f"sphere quadrature not converged: error estimate {err:.3e} at "
        f"{rule.n_theta}x{rule.n_phi} nodes",
        estimate=cur,
        error=err,
    )


def integrate_interval(func, n=32, rtol=1e-12, atol=1e-15, max_doublings=4):
    """Gauss-Legendre on [-1, 1] with order doubling. Returns (value, error)."""
    x, w = _gauss_legendre(n)
    prev = np.tensordot(w, func(x), axes=(0, 0))
    for _ in range(max_doublings):
        n *= 2
        x, w = _gauss_legendre(n)
        cur = np.tensordot(w, func(x), axes=(0, 0))
        err = float(np.max(np.abs(cur - prev)))
        if err <= atol + rtol * float(np.max(np.abs(cur))):
            return cur, err
        prev = cur
    raise QuadratureError(
        f"interval quadrature not converged: error estimate {err:.3e} at order {n}",
        estimate=cur,
        error=err,
    )
