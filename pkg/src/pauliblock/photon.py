"""One-photon wavepacket of the blocked decay in a Weisskopf-Wigner ansatz.

Geometry: dipole along z, trap axis chi along x, so u = khat.x. The blocking
atom starts in mu0 |0> + mu1 |1>; the excited atom is in the lowest band.
Units: Gamma = c = 1, so x is measured in c / Gamma.

The recoil factors follow the emission direction: a photon sent along khat
leaves the emitter in R_{n0}(u eta)|n>. With this reading the superposition
mu1 = i sqrt(1 - mu0^2) suppresses emission towards -x at early times.

Intensities are the dimensionless bracket I_hat, i.e. the physical
first-order correlation divided by d^2 w0^4 / ((4 pi eps0)^2 c^2 r^2). The
same w0^4 prefactor is used for every term. The probability to find the
photon in dr dOmega is Gamma (3 / 8 pi) I_hat dr dOmega.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .quadrature import integrate_interval
from .recoil import alpha_coefficients, projected_pattern, recoil_element_1d

DIPOLE = (0.0, 0.0, 1.0)
AXIS = (1.0, 0.0, 0.0)
MODE_SUM_REL = 1e-12
REGIME_FACTOR = 10.0


class RegimeError(ValueError):
    """The asymptotic amplitudes are used before the excited state has decayed."""


class RegimeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class PhotonScenario:
    """eta and nu (units of Gamma) of the trap axis.

    ``rates='exact'`` uses the full channel sums for the two decay rates;
    ``rates='lamb_dicke'`` uses alpha eta^2 and 1 - alpha eta^2.
    """

    eta: float
    nu: float
    alpha: float | None = None
    gamma: float = 1.0
    rates: str = "exact"

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.nu <= 0:
            raise ValueError("nu must be positive")
        if self.gamma != 1.0:
            raise ValueError("internal units require gamma = 1")
        if self.rates not in ("exact", "lamb_dicke"):
            raise ValueError("rates must be 'exact' or 'lamb_dicke'")
        if self.alpha is None:
            object.__setattr__(self, "alpha", float(alpha_coefficients(DIPOLE)[0]))
        g0, g1 = self.gamma0, self.gamma1
        if not 0 < g0 < g1:
            raise ValueError(f"need 0 < Gamma0 < Gamma1, got {g0}, {g1}")
        if self.nu <= 1.0:
            warnings.warn(f"nu = {self.nu} is not large compared with Gamma", RegimeWarning, stacklevel=2)

    @property
    def axis_cos(self):
        return float(np.dot(DIPOLE, AXIS))

    @property
    def gamma0(self):
        """Decay rate with the blocker in |0>: channels n >= 1."""
        if self.rates == "lamb_dicke":
            return self.alpha * self.eta**2
        return _exact_rate(self.eta, self.axis_cos, blocked_mode=0)

    @property
    def gamma1(self):
        """Decay rate with the blocker in |1>: every channel except n = 1."""
        if self.rates == "lamb_dicke":
            return 1.0 - self.alpha * self.eta**2
        return _exact_rate(self.eta, self.axis_cos, blocked_mode=1)

    def as_dict(self):
        return {
            "eta": self.eta,
            "nu": self.nu,
            "alpha": self.alpha,
            "rates": self.rates,
            "gamma0": self.gamma0,
            "gamma1": self.gamma1,
        }


_RATE_CACHE = {}


def _exact_rate(eta, axis_cos, blocked_mode):
    key = (eta, axis_cos, blocked_mode)
    if key not in _RATE_CACHE:
        val, _ = integrate_interval(
            lambda u: projected_pattern(u, axis_cos) * np.abs(recoil_element_1d(0, blocked_mode, u * eta)) ** 2
        )
        _RATE_CACHE[key] = 1.0 - float(val)
    return _RATE_CACHE[key]


@dataclass(frozen=True)
class SuperpositionInit:
    mu0: complex
    mu1: complex

    def __post_init__(self):
        norm = abs(self.mu0) ** 2 + abs(self.mu1) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"|mu0|^2 + |mu1|^2 = {norm!r}, expected 1")

    @classmethod
    def shaped(cls, eta):
        """mu0 = 1 - eta^2/2, mu1 = i sqrt(1 - mu0^2)."""
        mu0 = 1.0 - 0.5 * eta**2
        return cls(complex(mu0), 1j * math.sqrt(1.0 - mu0**2))


def higher_mode_weight(u, eta, rel=MODE_SUM_REL):
    """sum_{n > 1} |R_{0n}(u eta)|^2, truncated when a term drops below rel of the total."""
    u = np.asarray(u, dtype=float)
    total = np.zeros_like(u)
    n = 2
    while True:
        term = np.abs(recoil_element_1d(0, n, u * eta)) ** 2
        total = total + term
        if np.all(term <= rel * np.maximum(total, 1e-300)) or n >= 60:
            return total
        n += 1


def _check_regime(s, init, t):
    rate = s.gamma0 if abs(init.mu0) > 0 else s.gamma1
    if t < REGIME_FACTOR / rate:
        raise RegimeError(f"t = {t:.4g} is below {REGIME_FACTOR}/Gamma_eff = {REGIME_FACTOR / rate:.4g}")


def ww_amplitudes(s, init, mode, khat, delta, t, check_regime=True):
    """Photon amplitude a_{mn,k}(t) without the coupling prefactor.

    ``mode`` = (m, n) are the final motional states of the two g atoms, m < n.
    ``delta`` = omega_k - omega_0 and ``khat`` the emission direction.
    """
    if check_regime:
        _check_regime(s, init, t)
    m, n = mode
    if not 0 <= m < n:
        raise ValueError("final modes must satisfy 0 <= m < n")
    u = float(np.dot(khat, AXIS))
    g0, g1, nu = s.gamma0, s.gamma1, s.nu
    r = lambda k: recoil_element_1d(k, 0, u * s.eta)  # noqa: E731
    if (m, n) == (0, 1):
        amp = init.mu0 * r(1) / (delta + nu + 0.5j * g0) - init.mu1 * r(0) / (delta + 0.5j * g1)
        return complex(np.exp(-1j * (delta + nu) * t) * amp)
    if m == 0:
        return complex(np.exp(-1j * (delta + n * nu) * t) * init.mu0 * r(n) / (delta + n * nu + 0.5j * g0))
    if m == 1 and n > 1:
        return complex(
            np.exp(-1j * (delta + (n + 1) * nu) * t) * init.mu1 * r(n) / (delta + (n + 1) * nu + 0.5j * g1)
        )
    return 0j


def amplitude_norm(s, init):
    """Gamma int dOmega N sum_modes int d delta / 2 pi |a|^2, with analytic delta integrals."""
    g0, g1, nu, eta = s.gamma0, s.gamma1, s.nu, s.eta
    mu0, mu1 = init.mu0, init.mu1
    cross = 1j / (nu + 0.5j * (g0 + g1))

    def integrand(u):
        r0 = recoil_element_1d(0, 0, u * eta)
        r1 = recoil_element_1d(1, 0, u * eta)
        a, b = mu0 * r1, mu1 * r0
        val = np.abs(a) ** 2 / g0 + np.abs(b) ** 2 / g1 - 2.0 * np.real(a * np.conj(b) * cross)
        val = val + higher_mode_weight(u, eta) * (abs(mu0) ** 2 / g0 + abs(mu1) ** 2 / g1)
        return projected_pattern(u, s.axis_cos) * val

    val, _ = integrate_interval(integrand)
    return float(val)


def _components(s, init, u, tau, sin2):
    """Per-term arrays (psi1, sum0, sum1, cross) of I_hat at retarded time tau."""
    eta, g0, g1, nu = s.eta, s.gamma0, s.gamma1, s.nu
    mu0, mu1 = init.mu0, init.mu1
    tau = np.asarray(tau, dtype=float)
    live = tau >= 0
    tt = np.where(live, tau, 0.0)
    r0 = recoil_element_1d(0, 0, u * eta)
    r1 = recoil_element_1d(1, 0, u * eta)
    e0, e1 = np.exp(-g0 * tt), np.exp(-g1 * tt)
    a, b = mu0 * r1, mu1 * r0
    cross = -2.0 * np.real(a * np.conj(b) * np.exp(1j * nu * tt) * np.exp(-0.5 * (g0 + g1) * tt))
    psi1 = np.abs(a) ** 2 * e0 + np.abs(b) ** 2 * e1 + cross
    high = higher_mode_weight(u, eta)
    sum0 = abs(mu0) ** 2 * high * e0
    sum1 = abs(mu1) ** 2 * high * e1
    mask = live * sin2
    return psi1 * mask, sum0 * mask, sum1 * mask, cross * mask


def intensity(s, init, r, theta, t, phi=0.0, check_regime=True):
    """Dimensionless intensity I_hat at distance r, polar angle theta from the dipole."""
    if check_regime:
        _check_regime(s, init, t)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or t < 0:
        raise ValueError("r and t must be non-negative")
    u = np.sin(theta) * np.cos(phi)
    psi1, sum0, sum1, _ = _components(s, init, u, t - r, np.sin(theta) ** 2)
    out = psi1 + sum0 + sum1
    return out if np.ndim(out) else float(out)


@dataclass
class WavepacketProfile:
    """I_hat_t(x) on the trap axis with its breakdown.

    psi1 is the full |Psi_1|^2 term, cross the interference part inside it;
    total = psi1 + sum0 + sum1.
    """

    x: np.ndarray
    t: float
    total: np.ndarray
    psi1: np.ndarray
    sum0: np.ndarray
    sum1: np.ndarray
    cross: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def samples(self):
        return list(zip(self.x.tolist(), self.total.tolist()))

    @property
    def components(self):
        return {"I_psi1": self.psi1, "I_sum0": self.sum0, "I_sum1": self.sum1, "I_cross": self.cross}

    def columns(self):
        return ["x", "I_total", "I_psi1", "I_sum0", "I_sum1", "I_cross"], np.column_stack(
            [self.x, self.total, self.psi1, self.sum0, self.sum1, self.cross]
        )


def profile_along_axis(s, init, t, n_points=4001, check_regime=True):
    """Sample I_hat_t(x) = r^2 I on the x axis for x in [-t, t] (c = 1)."""
    if check_regime:
        _check_regime(s, init, t)
    if n_points < 3:
        raise ValueError("need at least three grid points")
    x = np.linspace(-t, t, n_points)
    u = np.where(x >= 0, 1.0, -1.0)
    psi1, sum0, sum1, cross = _components(s, init, u, t - np.abs(x), 1.0)
    total = psi1 + sum0 + sum1
    meta = dict(s.as_dict(), mu0=[init.mu0.real, init.mu0.imag], mu1=[init.mu1.real, init.mu1.imag], t=t)
    return WavepacketProfile(x, float(t), total, psi1, sum0, sum1, cross, meta)


def emitted_norm(s, init, t):
    """Total emitted probability Gamma int dOmega (3/8 pi) int_0^t dr I_hat."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return 0.0
    g0, g1, nu, eta = s.gamma0, s.gamma1, s.nu, s.eta
    mu0, mu1 = init.mu0, init.mu1
    w0 = -math.expm1(-g0 * t) / g0
    w1 = -math.expm1(-g1 * t) / g1
    z = 1j * nu - 0.5 * (g0 + g1)
    wc = (np.exp(z * t) - 1.0) / z

    def integrand(u):
        r0 = recoil_element_1d(0, 0, u * eta)
        r1 = recoil_element_1d(1, 0, u * eta)
        a, b = mu0 * r1, mu1 * r0
        val = np.abs(a) ** 2 * w0 + np.abs(b) ** 2 * w1 - 2.0 * np.real(a * np.conj(b) * wc)
        val = val + higher_mode_weight(u, eta) * (abs(mu0) ** 2 * w0 + abs(mu1) ** 2 * w1)
        return projected_pattern(u, s.axis_cos) * val

    val, _ = integrate_interval(integrand)
    return float(val)


def tail_rate(profile, side=1, skip=0.05):
    """Decay rate from a log-linear fit of I_hat on one side of the axis.

    The wavepacket is I ~ exp(-Gamma (t - |x|)), so the slope of log I
    against |x| is Gamma. The outermost ``skip`` fraction next to the
    front and the origin are excluded.
    """
    x, y = profile.x, profile.total
    sel = (np.sign(x) == side) & (y > 0)
    ax = np.abs(x[sel])
    lo, hi = ax.min(), ax.max()
    span = hi - lo
    keep = (ax > lo + skip * span) & (ax < hi - skip * span)
    slope, _ = np.polyfit(ax[keep], np.log(y[sel][keep]), 1)
    return float(slope)


def beat_frequency(profile, side=1):
    """Dominant spatial frequency (cycles per unit x) of the interference term, and the bin width.

    Only one side of the axis is transformed: the two fronts carry the beat
    with different phases and would interfere in a joint spectrum.
    """
    sel = np.sign(profile.x) == side
    y = profile.cross[sel]
    y = y - y.mean()
    dx = profile.x[1] - profile.x[0]
    spec = np.abs(np.fft.rfft(y))
    freqs = np.fft.rfftfreq(y.size, dx)
    k = int(np.argmax(spec[1:]) + 1)
    return float(freqs[k]), float(freqs[1] - freqs[0])


def export_profile(profile, stem):
    """Write ``stem``.csv (x, I_total, I_psi1, I_sum0, I_sum1, I_cross) and ``stem``.json."""
    from .io import write_csv, write_json

    header, data = profile.columns()
    csv_path = write_csv(f"{stem}.csv", header, data.tolist())
    json_path = write_json(f"{stem}.json", {"metadata": profile.meta, "columns": header})
    return csv_path, json_path
